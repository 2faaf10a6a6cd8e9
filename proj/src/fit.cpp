#include "lnsev/fit.hpp"

#include <cmath>

#include "lnsev/errors.hpp"
#include "lnsev/numerics.hpp"

namespace lnsev {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::MleY: return "MLE-Y";
        case Method::MleZ: return "MLE-Z";
        case Method::LeftTruncatedY: return "MLE-Y (left-truncated closed form)";
        case Method::LeftTruncatedZ: return "MLE-Z (left-truncated closed form)";
        case Method::CompleteNormal: return "MLE-Z (complete normal)";
        case Method::MtmY: return "MTM-Y";
        case Method::MtmYPlugin: return "MTM-Y (plug-in)";
        case Method::MtmZ: return "MTM-Z";
    }
    return "unknown";
}

std::pair<Interval, Interval> confidence_intervals(const FitResult& fit, double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
    if (fit.n == 0) throw DomainError("confidence intervals need the sample size");
    const double z = std_normal_quantile(1.0 - 0.5 * (1.0 - level));
    const double n = static_cast<double>(fit.n);
    const double se_theta = std::sqrt(fit.cov.a11 / n);
    const double se_sigma = std::sqrt(fit.cov.a22 / n);
    const double k = std::exp(z * se_sigma / fit.sigma_hat);
    return {{fit.theta_hat - z * se_theta, fit.theta_hat + z * se_theta},
            {fit.sigma_hat / k, fit.sigma_hat * k}};
}

void attach_intervals(FitResult& fit, double level) {
    const auto [ct, cs] = confidence_intervals(fit, level);
    fit.level = level;
    fit.ci_theta = ct;
    fit.ci_sigma = cs;
}

}  // namespace lnsev
