#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace lnsev {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Ground-up loss W with log(W - w0) ~ N(theta, sigma^2).
struct GroundUpLognormal {
    double w0 = 0.0;
    double theta = 0.0;
    double sigma = 1.0;

    void validate() const;
};

// Coinsurance c, deductible d, policy limit u (may be infinite).
struct PolicySpec {
    double c = 1.0;
    double d = 0.0;
    double u = kInf;

    void validate(double w0) const;
};

struct NormalThresholds {
    double t = 0.0;
    double T = kInf;
    double R = kInf;

    bool censored() const { return T < kInf; }
};

struct StandardizedThresholds {
    double gamma = 0.0;
    double xi = kInf;
    double omega1 = 0.0;
    double omega2 = 0.0;
};

enum class PaymentKind { PerPayment, PerLoss };

std::string_view to_string(PaymentKind kind);

// Observations on the normal scale v = c * (log(W - w0) - t), sorted ascending.
struct PaymentSample {
    PaymentKind kind = PaymentKind::PerPayment;
    std::vector<double> values;
    std::size_t n0 = 0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    PolicySpec policy;
    double w0 = 0.0;
    NormalThresholds thresholds;

    std::size_t n() const { return values.size(); }
    double censoring_point() const { return policy.c * thresholds.R; }  // cR
};

NormalThresholds derive_thresholds(const PolicySpec& policy, double w0);

StandardizedThresholds standardize(const GroundUpLognormal& model, const NormalThresholds& th);

// Tolerance used to classify a normal-scale value as censored at cR.
double censoring_tolerance(double cR);

// Raw currency payments -> classified normal-scale sample.
PaymentSample transform_to_normal(std::span<const double> raw, PaymentKind kind, const PolicySpec& policy,
                                  double w0);

// Apply the policy to ground-up losses. Per-payment drops losses at or below d.
std::vector<double> payments_from_losses(std::span<const double> losses, PaymentKind kind,
                                         const PolicySpec& policy);

// Distribution of a payment variable on the normal scale. At atoms pdf()
// returns the probability mass, elsewhere the density.
class PaymentDistribution {
public:
    PaymentDistribution(PaymentKind kind, const GroundUpLognormal& model, const PolicySpec& policy);

    double cdf(double v) const;
    double cdf_left(double v) const;  // F(v-)
    double pdf(double v) const;
    double qf(double p) const;

    PaymentKind kind() const { return kind_; }
    double censoring_point() const { return c_ * th_.R; }
    const NormalThresholds& thresholds() const { return th_; }
    const StandardizedThresholds& standardized() const { return st_; }

    // Per-payment: P(Y < cR) = s*. Per-loss: F_X(t) and F_X(T).
    double s_star() const;
    double fx_t() const;
    double fx_T() const;

private:
    double z_of(double v) const { return st_.gamma + v / (c_ * sigma_); }

    PaymentKind kind_;
    double sigma_;
    double c_;
    NormalThresholds th_;
    StandardizedThresholds st_;
    double sf_gamma_;  // 1 - Phi(gamma)
    double sf_xi_;     // 1 - Phi(xi)
};

PaymentDistribution dist_y(const GroundUpLognormal& model, const PolicySpec& policy);
PaymentDistribution dist_z(const GroundUpLognormal& model, const PolicySpec& policy);

}  // namespace lnsev
