#include "lnsev/payment_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lnsev/errors.hpp"
#include "lnsev/numerics.hpp"

namespace lnsev {

void GroundUpLognormal::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive and finite");
    if (!std::isfinite(w0) || !std::isfinite(theta)) throw DomainError("w0 and theta must be finite");
}

void PolicySpec::validate(double w0) const {
    if (!(c > 0.0 && c <= 1.0)) throw DomainError("coinsurance factor must lie in (0, 1]");
    if (!(d > w0)) throw DomainError("deductible must exceed w0");
    if (!(u > d)) throw DomainError("policy limit must exceed the deductible");
}

std::string_view to_string(PaymentKind kind) {
    return kind == PaymentKind::PerPayment ? "Y" : "Z";
}

NormalThresholds derive_thresholds(const PolicySpec& policy, double w0) {
    policy.validate(w0);
    NormalThresholds th;
    th.t = std::log(policy.d - w0);
    th.T = policy.u < kInf ? std::log(policy.u - w0) : kInf;
    th.R = th.T - th.t;
    return th;
}

StandardizedThresholds standardize(const GroundUpLognormal& model, const NormalThresholds& th) {
    model.validate();
    StandardizedThresholds st;
    st.gamma = (th.t - model.theta) / model.sigma;
    st.xi = th.censored() ? st.gamma + th.R / model.sigma : kInf;
    const double band = std_normal_sf(st.gamma) - (th.censored() ? std_normal_sf(st.xi) : 0.0);
    if (!(band > 0.0)) throw DomainError("degenerate band: Phi-bar(gamma) equals Phi-bar(xi)");
    st.omega1 = std_normal_pdf(st.gamma) / band;
    st.omega2 = th.censored() ? std_normal_pdf(st.xi) / band : 0.0;
    return st;
}

double censoring_tolerance(double cR) { return 1e-9 * std::max(1.0, cR); }

PaymentSample transform_to_normal(std::span<const double> raw, PaymentKind kind, const PolicySpec& policy,
                                  double w0) {
    PaymentSample s;
    s.kind = kind;
    s.policy = policy;
    s.w0 = w0;
    s.thresholds = derive_thresholds(policy, w0);
    const double cR = s.censoring_point();
    const double cap = policy.u < kInf ? policy.c * (policy.u - policy.d) : kInf;
    const double cap_tol = cap < kInf ? 1e-9 * std::max(1.0, cap) : 0.0;
    const double scale = policy.c * (policy.d - w0);
    const double vtol = censoring_tolerance(cR);

    s.values.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double r = raw[i];
        if (!std::isfinite(r) || r < 0.0)
            throw DataError("payment at index " + std::to_string(i) + " is negative or not finite", i);
        if (kind == PaymentKind::PerPayment && r == 0.0)
            throw DataError("per-payment data cannot contain a zero payment (index " + std::to_string(i) + ")", i);
        if (r > cap + cap_tol)
            throw DataError("payment at index " + std::to_string(i) + " exceeds c(u - d)", i);
        double v = policy.c * std::log1p(r / scale);
        if (r == 0.0) {
            ++s.n0;
            v = 0.0;
        } else if (cR < kInf && std::abs(v - cR) <= vtol) {
            ++s.n2;
            v = cR;
        } else {
            ++s.n1;
        }
        s.values.push_back(v);
    }
    std::sort(s.values.begin(), s.values.end());
    return s;
}

std::vector<double> payments_from_losses(std::span<const double> losses, PaymentKind kind,
                                         const PolicySpec& policy) {
    std::vector<double> out;
    out.reserve(losses.size());
    for (std::size_t i = 0; i < losses.size(); ++i) {
        const double w = losses[i];
        if (!std::isfinite(w)) throw DataError("loss at index " + std::to_string(i) + " is not finite", i);
        if (w <= policy.d) {
            if (kind == PaymentKind::PerLoss) out.push_back(0.0);
            continue;
        }
        out.push_back(policy.c * (std::min(w, policy.u) - policy.d));
    }
    return out;
}

PaymentDistribution::PaymentDistribution(PaymentKind kind, const GroundUpLognormal& model,
                                         const PolicySpec& policy)
    : kind_(kind), sigma_(model.sigma), c_(policy.c) {
    th_ = derive_thresholds(policy, model.w0);
    st_ = standardize(model, th_);
    sf_gamma_ = std_normal_sf(st_.gamma);
    sf_xi_ = th_.censored() ? std_normal_sf(st_.xi) : 0.0;
}

double PaymentDistribution::s_star() const { return (sf_gamma_ - sf_xi_) / sf_gamma_; }
double PaymentDistribution::fx_t() const { return std_normal_cdf(st_.gamma); }
double PaymentDistribution::fx_T() const { return th_.censored() ? std_normal_cdf(st_.xi) : 1.0; }

double PaymentDistribution::cdf(double v) const {
    const double cR = censoring_point();
    if (kind_ == PaymentKind::PerPayment) {
        if (v <= 0.0) return 0.0;
        if (v >= cR) return 1.0;
        return (sf_gamma_ - std_normal_sf(z_of(v))) / sf_gamma_;
    }
    if (v < 0.0) return 0.0;
    if (v >= cR) return 1.0;
    return std_normal_cdf(z_of(v));
}

double PaymentDistribution::cdf_left(double v) const {
    const double cR = censoring_point();
    if (v <= 0.0) return 0.0;
    if (v > cR) return 1.0;
    if (v == cR) return kind_ == PaymentKind::PerPayment ? s_star() : 1.0 - sf_xi_;
    return cdf(v);
}

double PaymentDistribution::pdf(double v) const {
    const double cR = censoring_point();
    if (kind_ == PaymentKind::PerPayment) {
        if (v <= 0.0 || v > cR) return 0.0;
        if (v == cR) return sf_xi_ / sf_gamma_;
        return std_normal_pdf(z_of(v)) / (c_ * sigma_ * sf_gamma_);
    }
    if (v < 0.0 || v > cR) return 0.0;
    if (v == 0.0) return fx_t();
    if (v == cR) return sf_xi_;
    return std_normal_pdf(z_of(v)) / (c_ * sigma_);
}

double PaymentDistribution::qf(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile argument must lie in [0, 1]");
    const double cR = censoring_point();
    if (kind_ == PaymentKind::PerPayment) {
        if (p >= s_star()) return cR;
        if (p == 0.0) return 0.0;
        // Upper-tail mass of the transformed level, kept exact for p near 1.
        const double upper = (1.0 - p) * sf_gamma_;
        const double x = upper < 0.5 ? -std_normal_quantile(upper) : std_normal_quantile(p + (1.0 - p) * (1.0 - sf_gamma_));
        return std::max(0.0, c_ * sigma_ * (x - st_.gamma));
    }
    if (p <= fx_t()) return 0.0;
    if (p >= fx_T()) return cR;
    return std::max(0.0, c_ * sigma_ * (std_normal_quantile(p) - st_.gamma));
}

PaymentDistribution dist_y(const GroundUpLognormal& model, const PolicySpec& policy) {
    return PaymentDistribution(PaymentKind::PerPayment, model, policy);
}

PaymentDistribution dist_z(const GroundUpLognormal& model, const PolicySpec& policy) {
    return PaymentDistribution(PaymentKind::PerLoss, model, policy);
}

}  // namespace lnsev
