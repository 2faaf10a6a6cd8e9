#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lnsev/fit.hpp"
#include "lnsev/matrix2.hpp"
#include "lnsev/numerics.hpp"
#include "lnsev/payment_model.hpp"
#include "lnsev/trim.hpp"

namespace lnsev {

// Smallest trimming proportion accepted by the coefficient integrals.
inline constexpr double kEndpointGuard = 1e-6;

struct CoefficientSet {
    std::array<double, 4> c{};                  // c_1..c_4
    std::array<double, 3> c_star{};             // c*_1..c*_3
    std::array<double, 2> dc_dgamma{};          // d c_k / d gamma, k = 1, 2
    double gamma_used = -kInf;                  // -inf marks the complete-data set

    // dgamma/dtheta = -1/sigma, dgamma/dsigma = -gamma/sigma.
    double dc_dtheta(int k, double sigma) const { return -dc_dgamma.at(k - 1) / sigma; }
    double dc_dsigma(int k, double sigma) const { return -gamma_used * dc_dgamma.at(k - 1) / sigma; }
};

struct MtmCovarianceWork {
    double f11 = 0, f12 = 0, f21 = 0, f22 = 0;
    double K = 0;
    double d11 = 0, d12 = 0, d21 = 0, d22 = 0;
    double sigma2_11 = 0, sigma2_12 = 0, sigma2_22 = 0;
    CoefficientSet coefficients;
    Matrix2 S;
};

struct CoverageInfo {
    double s_star_empirical = 0.0;
    std::optional<double> s_star_parametric;
    double fn_t = 0.0;
    double fn_T = 0.0;
    std::optional<double> fx_t_hat;
    std::optional<double> fx_T_hat;
};

struct TrimValidation {
    CoverageInfo info;
    bool empirical_pass = false;
    std::optional<bool> parametric_pass;
    std::vector<std::string> reasons;

    bool pass() const { return empirical_pass && parametric_pass.value_or(true); }
};

// Whether a fit checks the sample-level window conditions itself.
enum class WindowCheck { Enforce, Skip };

struct MtmOptions {
    WindowCheck check = WindowCheck::Enforce;
    bool covariance = true;  // off leaves cov and intervals empty
};

// Mean of h(v)^j over order statistics m_n+1 .. n-m_n*, with h(v) = v/c + t.
double trimmed_sample_moment(const PaymentSample& sample, const TrimSpec& trim, int j);

CoefficientSet coeff_c_y(double gamma, const TrimSpec& trim, const QuadratureSpec& quad = {});
std::array<double, 3> coeff_c_star_y(double gamma, const TrimSpec& trim, const QuadratureSpec& quad = {});
CoefficientSet coeff_c_complete(const TrimSpec& trim, const QuadratureSpec& quad = {});

FitResult fit_mtm_y(const PaymentSample& sample, const TrimSpec& trim, const SolverSpec& solver = {},
                    const QuadratureSpec& quad = {}, const MtmOptions& opts = {});
FitResult fit_mtm_y_plugin(const PaymentSample& sample, const TrimSpec& trim, const QuadratureSpec& quad = {},
                           const MtmOptions& opts = {});
MtmCovarianceWork mtm_y_covariance_work(double theta, double sigma, const NormalThresholds& th,
                                        const TrimSpec& trim, const QuadratureSpec& quad = {});
Matrix2 cov_mtm_y(double theta, double sigma, const NormalThresholds& th, const TrimSpec& trim,
                  const QuadratureSpec& quad = {});

FitResult fit_mtm_z(const PaymentSample& sample, const TrimSpec& trim, const QuadratureSpec& quad = {},
                    const MtmOptions& opts = {});
FitResult fit_mtm_z(const PaymentSample& sample, const TrimSpec& trim, const CoefficientSet& complete,
                    const MtmOptions& opts = {});
Matrix2 cov_mtm_z(double sigma, const TrimSpec& trim, const QuadratureSpec& quad = {});
Matrix2 cov_mtm_z(double sigma, const CoefficientSet& complete);

TrimValidation validate_trim_y(const PaymentSample& sample, const TrimSpec& trim,
                               const std::optional<FitResult>& fitted = std::nullopt);
TrimValidation validate_trim_z(const PaymentSample& sample, const TrimSpec& trim,
                               const std::optional<FitResult>& fitted = std::nullopt);

// Population-level versions of the same conditions, for simulation designs.
TrimValidation validate_trim_population(PaymentKind kind, const GroundUpLognormal& model, const PolicySpec& policy,
                                        const TrimSpec& trim);

}  // namespace lnsev
