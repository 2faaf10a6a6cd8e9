#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "lnsev/errors.hpp"
#include "lnsev/mle.hpp"
#include "lnsev/simulation.hpp"

using namespace lnsev;
using Catch::Approx;

namespace {

const GroundUpLognormal kModel{1.0, 5.0, 3.0};
const PolicySpec kPolicy{1.0, 4.0, 2e5};

PaymentSample draw(PaymentKind kind, std::size_t n, std::uint64_t rep, const PolicySpec& pol = kPolicy) {
    CounterRng rng(31337, n, rep);
    return generate_sample(kModel, pol, kind, n, rng);
}

Vec2 gradient(PaymentKind kind, const MomentSummary& m, const NormalThresholds& th, double c, double g, double s) {
    const double h = 1e-6;
    auto L = [&](double gg, double ss) { return loglik(kind, gg, ss, m, th, c); };
    return {(L(g + h, s) - L(g - h, s)) / (2 * h), (L(g, s + h) - L(g, s - h)) / (2 * h)};
}

// Sum of log masses/densities through the payment distribution.
double direct_loglik(const PaymentSample& s, double theta, double sigma) {
    const PaymentDistribution D(s.kind, {s.w0, theta, sigma}, s.policy);
    double l = 0.0;
    for (double v : s.values) l += std::log(D.pdf(v));
    return l;
}

}  // namespace

TEST_CASE("MLE from the indemnity sufficient statistics") {
    const NormalThresholds th = derive_thresholds({1.0, 500.0, 1e5}, 0.0);
    CHECK(th.t == Approx(6.2146).margin(1e-4));
    CHECK(th.T == Approx(11.5129).margin(1e-4));

    const MomentSummary my{2.9762, 10.3394, 1451, 0, 1299, 152};
    const FitResult y = fit_mle_y(my, th, 1.0);
    CHECK(y.gamma_hat == Approx(-2.01946).margin(1e-4));
    CHECK(y.sigma_hat == Approx(1.591072).margin(1e-4));
    CHECK(y.theta_hat == Approx(9.427707).margin(1e-4));
    CHECK(y.residual_norm < 1e-8);

    const MomentSummary mz{2.9762, 10.3394, 1500, 49, 1299, 152};
    const FitResult z = fit_mle_z(mz, th, 1.0);
    CHECK(z.gamma_hat == Approx(-1.932022).margin(1e-4));
    CHECK(z.sigma_hat == Approx(1.641927).margin(1e-4));
    CHECK(z.theta_hat == Approx(9.386839).margin(1e-4));

    // the moments above are rounded to 4 decimals, which moves the start by ~2e-4
    const Vec2 sy = mle_start_y(my, 1.0);
    CHECK(sy.x == Approx(-2.4453).margin(5e-4));
    CHECK(sy.y == Approx(1.2171).margin(5e-4));
    const Vec2 sz = mle_start_z(mz, th, 1.0);
    CHECK(sz.x == Approx(-1.8430).margin(1e-4));
    CHECK(sz.y == Approx(1.6998).margin(1e-4));
}

TEST_CASE("log-likelihood differences match direct density sums") {
    for (PaymentKind kind : {PaymentKind::PerPayment, PaymentKind::PerLoss}) {
        const PaymentSample s = draw(kind, 300, 1);
        const NormalThresholds& th = s.thresholds;
        auto gam = [&](double theta, double sigma) { return (th.t - theta) / sigma; };
        const double a = loglik(kind, gam(5.0, 3.0), 3.0, summarize(s), th, 1.0);
        const double b = loglik(kind, gam(4.2, 2.5), 2.5, summarize(s), th, 1.0);
        CHECK(a - b == Approx(direct_loglik(s, 5.0, 3.0) - direct_loglik(s, 4.2, 2.5)).epsilon(1e-9));
    }
}

TEST_CASE("fitted points are stationary local maxima") {
    for (PaymentKind kind : {PaymentKind::PerPayment, PaymentKind::PerLoss}) {
        for (std::uint64_t rep = 0; rep < 20; ++rep) {
            const PaymentSample s = draw(kind, 400, rep);
            const FitResult f = fit_mle(s);
            const MomentSummary m = summarize(s);
            const Vec2 g = gradient(kind, m, s.thresholds, 1.0, f.gamma_hat, f.sigma_hat);
            CHECK(std::abs(g.x) < 1e-4);
            CHECK(std::abs(g.y) < 1e-4);
            const double l0 = loglik(kind, f.gamma_hat, f.sigma_hat, m, s.thresholds, 1.0);
            CHECK(loglik(kind, f.gamma_hat + 0.01, f.sigma_hat, m, s.thresholds, 1.0) < l0);
            CHECK(loglik(kind, f.gamma_hat, f.sigma_hat * 1.01, m, s.thresholds, 1.0) < l0);
            CHECK(f.theta_hat == Approx(s.thresholds.t - f.sigma_hat * f.gamma_hat));
        }
    }
}

TEST_CASE("estimating equations vanish at the fit") {
    const PaymentSample s = draw(PaymentKind::PerPayment, 1000, 7);
    const FitResult f = fit_mle(s);
    const Vec2 r = mle_equations(PaymentKind::PerPayment, f.gamma_hat, f.sigma_hat, summarize(s), s.thresholds, 1.0);
    CHECK(std::hypot(r.x, r.y) < 1e-8);
}

TEST_CASE("a huge limit reproduces the left-truncated closed form") {
    const PolicySpec open{1.0, 4.0, kInf};
    const PaymentSample s = draw(PaymentKind::PerPayment, 2000, 3, open);
    REQUIRE(s.n2 == 0);
    const FitResult lt = fit_left_truncated(s);
    CHECK(lt.global_maximum);
    const NormalThresholds far = derive_thresholds({1.0, 4.0, 1e20}, 1.0);
    const FitResult gen = fit_mle_y(summarize(s), far, 1.0);
    CHECK(gen.theta_hat == Approx(lt.theta_hat).margin(1e-6));
    CHECK(gen.sigma_hat == Approx(lt.sigma_hat).margin(1e-6));
    const Matrix2 a = lt.cov, b = cov_mle_y(lt.gamma_hat, lt.sigma_hat, far);
    CHECK(a.a11 == Approx(b.a11).epsilon(1e-6));
    CHECK(a.a22 == Approx(b.a22).epsilon(1e-6));
}

TEST_CASE("G function") {
    CHECK(g_function(0.0) == Approx(std::numbers::pi / 2).epsilon(1e-12));
    double prev = g_function(-8.0);
    for (double g = -7.9; g < 8.0; g += 0.1) {
        const double v = g_function(g);
        CHECK(v > prev);
        CHECK(v > 1.0);
        CHECK(v < 2.0);
        prev = v;
    }
    // G = 1 + 1/g^2 + O(g^-4) on the left, 2 - 2/g^2 + O(g^-4) on the right
    CHECK((g_function(-30.0) - 1.0) * 900.0 == Approx(1.0).margin(0.02));
    CHECK((2.0 - g_function(30.0)) * 450.0 == Approx(1.0).margin(0.02));
    // both branches agree at the switch point
    CHECK(g_function(5.0 - 1e-9) == Approx(g_function(5.0)).epsilon(1e-9));
}

TEST_CASE("no MLE when the moment ratio leaves (1, 2)") {
    const NormalThresholds th = derive_thresholds({1.0, 4.0, kInf}, 1.0);
    const MomentSummary m{1.0, 2.5, 50, 0, 50, 0};
    try {
        fit_left_truncated(PaymentKind::PerPayment, m, th, 1.0);
        FAIL("expected NoMleError");
    } catch (const NoMleError& e) {
        CHECK(e.delta() == Approx(2.5));
    }
    const MomentSummary tiny{1.0, 1.0, 1, 0, 1, 0};
    CHECK_THROWS_AS(fit_mle_y(tiny, th, 1.0), EstimationError);
}

TEST_CASE("MLE covariance is the transformed inverse information") {
    const NormalThresholds th = derive_thresholds(kPolicy, 1.0);
    const double g = -1.3005, s = 3.0;
    for (PaymentKind kind : {PaymentKind::PerPayment, PaymentKind::PerLoss}) {
        const FisherComponents fc = kind == PaymentKind::PerPayment ? fisher_y(g, s, th) : fisher_z(g, s, th);
        CHECK(fc.info.det() > 0.0);
        CHECK(fc.info.a11 > 0.0);
        const Matrix2 D{-s, -g, 0.0, 1.0};  // d(theta, sigma) / d(gamma, sigma)
        const Matrix2 want = fc.info.inverse().sandwich(D);
        const Matrix2 got = cov_mle(kind, g, s, th);
        CHECK(got.a11 == Approx(want.a11).epsilon(1e-10));
        CHECK(got.a12 == Approx(want.a12).epsilon(1e-10));
        CHECK(got.a22 == Approx(want.a22).epsilon(1e-10));
        CHECK(got.a12 == Approx(got.a21));
    }
}

TEST_CASE("confidence intervals") {
    const PaymentSample s = draw(PaymentKind::PerLoss, 900, 11);
    FitResult f = fit_mle(s);
    attach_intervals(f, 0.90);
    const double z = 1.6448536269514722;
    const double se_t = std::sqrt(f.cov.a11 / f.n), se_s = std::sqrt(f.cov.a22 / f.n);
    CHECK(f.ci_theta.lo == Approx(f.theta_hat - z * se_t));
    CHECK(f.ci_theta.hi == Approx(f.theta_hat + z * se_t));
    const double K = std::exp(z * se_s / f.sigma_hat);
    CHECK(f.ci_sigma.lo == Approx(f.sigma_hat / K));
    CHECK(f.ci_sigma.hi == Approx(f.sigma_hat * K));
}
