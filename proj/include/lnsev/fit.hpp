#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lnsev/matrix2.hpp"
#include "lnsev/payment_model.hpp"
#include "lnsev/trim.hpp"

namespace lnsev {

enum class Method {
    MleY,
    MleZ,
    LeftTruncatedY,
    LeftTruncatedZ,
    CompleteNormal,
    MtmY,
    MtmYPlugin,
    MtmZ,
};

std::string_view to_string(Method m);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct FitResult {
    Method method = Method::MleY;
    PaymentKind kind = PaymentKind::PerPayment;
    double gamma_hat = 0.0;
    double sigma_hat = 0.0;
    double theta_hat = 0.0;
    // Asymptotic covariance of sqrt(n) (theta_hat - theta, sigma_hat - sigma),
    // evaluated at this fit's own estimates.
    Matrix2 cov;
    std::size_t n = 0;
    double level = 0.95;
    Interval ci_theta;
    Interval ci_sigma;
    int iterations = 0;
    bool converged = false;
    double residual_norm = 0.0;
    bool global_maximum = false;
    std::optional<TrimSpec> trim;
    // Competing solution kept for comparison, as (theta, sigma).
    std::optional<Vec2> alternate;
    std::vector<std::string> notes;

    GroundUpLognormal model(double w0) const { return {w0, theta_hat, sigma_hat}; }
};

// theta-interval theta_hat +- z se; sigma-interval (sigma_hat / K, sigma_hat K)
// with K = exp(z se / sigma_hat).
std::pair<Interval, Interval> confidence_intervals(const FitResult& fit, double level);

// Sets level and both intervals in place.
void attach_intervals(FitResult& fit, double level);

}  // namespace lnsev
