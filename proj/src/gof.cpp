#include "lnsev/gof.hpp"

#include <algorithm>
#include <cmath>

#include "lnsev/errors.hpp"
#include "lnsev/numerics.hpp"

namespace lnsev {

namespace {

double kolmogorov_cdf(double x) {
    if (x <= 0.0) return 0.0;
    double s = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * x * x);
        s += (j % 2 == 1 ? term : -term);
        if (term < 1e-300) break;
    }
    return 1.0 - 2.0 * s;
}

}  // namespace

double kolmogorov_quantile(double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("KS level must lie in (0, 1)");
    SolverSpec s;
    s.residual_tol = 1e-14;
    s.step_tol = 1e-15;
    return solve_monotone_scalar(kolmogorov_cdf, 1.0 - level, {0.3, 3.0}, s);
}

KsResult ks_statistic(const PaymentSample& sample, const PaymentDistribution& F, double level) {
    const std::size_t n = sample.n();
    if (n == 0) throw DataError("KS statistic of an empty sample");
    const double dn = static_cast<double>(n);
    const auto& v = sample.values;
    double d = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && v[j] == v[i]) ++j;
        const double below = static_cast<double>(i) / dn;
        const double upto = static_cast<double>(j) / dn;
        d = std::max(d, std::abs(upto - F.cdf(v[i])));
        d = std::max(d, std::abs(below - F.cdf_left(v[i])));
        i = j;
    }
    // Atoms of the fitted law that may carry no data.
    auto fn = [&](double x) {
        return static_cast<double>(std::upper_bound(v.begin(), v.end(), x) - v.begin()) / dn;
    };
    auto fn_left = [&](double x) {
        return static_cast<double>(std::lower_bound(v.begin(), v.end(), x) - v.begin()) / dn;
    };
    if (sample.kind == PaymentKind::PerLoss) d = std::max(d, std::abs(fn(0.0) - F.cdf(0.0)));
    const double cR = sample.censoring_point();
    if (cR < kInf) d = std::max(d, std::abs(fn_left(cR) - F.cdf_left(cR)));

    KsResult r;
    r.statistic = d;
    r.level = level;
    r.critical_value = kolmogorov_quantile(level) / std::sqrt(dn);
    r.decision = d > r.critical_value ? 1 : 0;
    return r;
}

KsResult ks_statistic(const PaymentSample& sample, const FitResult& fitted, double level) {
    if (fitted.kind != sample.kind) throw DomainError("fit and sample are of different payment types");
    return ks_statistic(sample, PaymentDistribution(sample.kind, fitted.model(sample.w0), sample.policy), level);
}

}  // namespace lnsev
