#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "lnsev/gof.hpp"
#include "lnsev/mle.hpp"
#include "lnsev/simulation.hpp"

using namespace lnsev;
using Catch::Approx;

namespace {

const GroundUpLognormal kModel{1.0, 5.0, 3.0};
const PolicySpec kPolicy{1.0, 4.0, 2e5};

// sup |F_n - F| over a dense grid plus both sides of every data point.
double dense_ks(const PaymentSample& s, const PaymentDistribution& D) {
    const std::vector<double>& v = s.values;
    const double n = static_cast<double>(v.size());
    auto fn = [&](double x) { return std::upper_bound(v.begin(), v.end(), x) - v.begin(); };
    auto fn_left = [&](double x) { return std::lower_bound(v.begin(), v.end(), x) - v.begin(); };
    double worst = 0.0;
    const double hi = D.censoring_point();
    for (int i = 0; i <= 100000; ++i) {
        const double x = hi * i / 100000.0;
        worst = std::max(worst, std::abs(fn(x) / n - D.cdf(x)));
        worst = std::max(worst, std::abs(fn_left(x) / n - D.cdf_left(x)));
    }
    for (double x : v) {
        worst = std::max(worst, std::abs(fn(x) / n - D.cdf(x)));
        worst = std::max(worst, std::abs(fn_left(x) / n - D.cdf_left(x)));
    }
    return worst;
}

}  // namespace

TEST_CASE("Kolmogorov critical value") {
    CHECK(kolmogorov_quantile(0.05) == Approx(1.3581).margin(1e-4));
    CHECK(kolmogorov_quantile(0.01) == Approx(1.6276).margin(1e-4));
    CHECK(kolmogorov_quantile(0.05) / std::sqrt(1500.0) == Approx(0.0351).margin(1e-4));
}

TEST_CASE("KS statistic agrees with a dense-grid evaluation") {
    for (PaymentKind kind : {PaymentKind::PerPayment, PaymentKind::PerLoss}) {
        CounterRng rng(8, 400, 0);
        const PaymentSample s = generate_sample(kModel, kPolicy, kind, 400, rng);
        const FitResult f = fit_mle(s);
        const PaymentDistribution D(kind, f.model(1.0), kPolicy);
        const KsResult r = ks_statistic(s, f);
        CHECK(r.statistic == Approx(dense_ks(s, D)).margin(1e-12));
        CHECK(r.critical_value == Approx(kolmogorov_quantile(0.05) / 20.0));
        CHECK(r.decision == (r.statistic > r.critical_value ? 1 : 0));
    }
}

TEST_CASE("KS distance at the true model shrinks with n") {
    CounterRng rng(9, 1000000, 0);
    const PaymentSample s = generate_sample(kModel, kPolicy, PaymentKind::PerLoss, 1000000, rng);
    const KsResult r = ks_statistic(s, dist_z(kModel, kPolicy));
    CHECK(r.statistic < 0.005);
    CHECK(r.decision == 0);
}

TEST_CASE("KS rejects a badly wrong model") {
    CounterRng rng(10, 2000, 0);
    const PaymentSample s = generate_sample(kModel, kPolicy, PaymentKind::PerPayment, 2000, rng);
    const KsResult r = ks_statistic(s, dist_y({1.0, 6.0, 2.0}, kPolicy));
    CHECK(r.decision == 1);
}
