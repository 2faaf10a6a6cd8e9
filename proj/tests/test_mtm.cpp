#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "lnsev/errors.hpp"
#include "lnsev/mle.hpp"
#include "lnsev/mtm.hpp"
#include "lnsev/simulation.hpp"

using namespace lnsev;
using Catch::Approx;

namespace {

const GroundUpLognormal kModel{1.0, 5.0, 3.0};
const PolicySpec kPolicy{1.0, 4.0, 2e5};

PaymentSample draw(PaymentKind kind, std::size_t n, std::uint64_t rep) {
    CounterRng rng(2718, n, rep);
    return generate_sample(kModel, kPolicy, kind, n, rng);
}

PaymentSample from_values(std::vector<double> v, PaymentKind kind) {
    PaymentSample s;
    s.kind = kind;
    s.policy = {1.0, 4.0, kInf};
    s.w0 = 1.0;
    s.thresholds = derive_thresholds(s.policy, 1.0);
    std::sort(v.begin(), v.end());
    s.values = v;
    s.n1 = v.size();
    return s;
}

double riemann_c(double gamma, double a, double b, int k) {
    const int m = 100000;
    const double pg = std_normal_cdf(gamma);
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        const double s = a + (1.0 - a - b) * (i + 0.5) / m;
        acc += std::pow(std_normal_quantile(pg + s * (1.0 - pg)), k);
    }
    return acc / m;
}

}  // namespace

TEST_CASE("trimmed sample moments average the retained order statistics") {
    std::vector<double> v;
    for (int i = 1; i <= 10; ++i) v.push_back(0.1 * i);
    const PaymentSample s = from_values(v, PaymentKind::PerPayment);
    const TrimSpec trim(0.2, 0.2);
    const double t = s.thresholds.t;
    double m1 = 0.0, m2 = 0.0;
    for (int i = 3; i <= 8; ++i) {
        m1 += (0.1 * i + t) / 6.0;
        m2 += (0.1 * i + t) * (0.1 * i + t) / 6.0;
    }
    CHECK(trimmed_sample_moment(s, trim, 1) == Approx(m1).epsilon(1e-14));
    CHECK(trimmed_sample_moment(s, trim, 2) == Approx(m2).epsilon(1e-14));
    CHECK_THROWS_AS(trimmed_sample_moment(s, trim, 3), DomainError);
}

TEST_CASE("trim windows use exact decimal proportions") {
    const TrimSpec t(Proportion::parse("0.05"), Proportion::parse("0.15"));
    const TrimWindow w = t.window(100);
    CHECK(w.m_n == 5);
    CHECK(w.m_n_star == 15);
    CHECK(w.size() == 80);
    CHECK(Proportion::parse("150/1451").floor_times(1451) == 150);
    CHECK_THROWS(TrimSpec(Proportion::parse("0.6"), Proportion::parse("0.5")));
}

TEST_CASE("per-payment coefficients against a midpoint sum") {
    const double g = -1.3005;
    const TrimSpec trim(0.0, 0.05);
    const CoefficientSet cs = coeff_c_y(g, trim);
    for (int k = 1; k <= 4; ++k) CHECK(cs.c[k - 1] == Approx(riemann_c(g, 0.0, 0.05, k)).margin(1e-6));
}

TEST_CASE("coefficient derivative in gamma matches a finite difference") {
    const TrimSpec trim(0.05, 0.10);
    const double g = -0.7, h = 1e-5;
    const CoefficientSet cs = coeff_c_y(g, trim);
    for (int k = 1; k <= 2; ++k) {
        const double fd = (coeff_c_y(g + h, trim).c[k - 1] - coeff_c_y(g - h, trim).c[k - 1]) / (2 * h);
        CHECK(cs.dc_dgamma[k - 1] == Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("very negative gamma recovers the complete-normal coefficients") {
    for (auto [a, b] : {std::pair{0.1, 0.1}, std::pair{0.05, 0.25}}) {
        const TrimSpec trim(a, b);
        const CoefficientSet y = coeff_c_y(-20.0, trim), c = coeff_c_complete(trim);
        for (int k = 0; k < 4; ++k) CHECK(y.c[k] == Approx(c.c[k]).margin(1e-8));
        const auto ys = coeff_c_star_y(-20.0, trim);
        for (int k = 0; k < 3; ++k) CHECK(ys[k] == Approx(c.c_star[k]).margin(1e-6));
    }
}

TEST_CASE("closed-form c* matches the double integral") {
    for (auto [a, b] : {std::pair{0.1, 0.1}, std::pair{0.05, 0.25}}) {
        const TrimSpec trim(a, b);
        const CoefficientSet c = coeff_c_complete(trim);
        const double tau = trim.tau();
        auto kernel = [](double u, double v) {
            const double qu = std_normal_quantile(u), qv = std_normal_quantile(v);
            return (std::min(u, v) - u * v) / (std_normal_pdf(qu) * std_normal_pdf(qv));
        };
        const double direct = integrate_2d_square(kernel, a, 1.0 - b) / (tau * tau);
        CHECK(c.c_star[0] == Approx(direct).margin(1e-6));
    }
}

TEST_CASE("coefficient integrals reject proportions below the guard") {
    CHECK_THROWS_AS(coeff_c_complete(TrimSpec(0.0, 0.1)), DomainError);
    CHECK_THROWS_AS(coeff_c_y(-1.0, TrimSpec(0.1, 0.0)), DomainError);
}

TEST_CASE("population trimmed mean matches a large sample") {
    const TrimSpec trim(0.05, 0.10);
    const PaymentSample s = draw(PaymentKind::PerPayment, 200000, 0);
    const NormalThresholds th = s.thresholds;
    const double g = (th.t - kModel.theta) / kModel.sigma;
    const CoefficientSet cs = coeff_c_y(g, trim);
    CHECK(trimmed_sample_moment(s, trim, 1) == Approx(kModel.theta + kModel.sigma * cs.c[0]).margin(0.02));
}

TEST_CASE("MTM-Y recovers the parameters and agrees with the plug-in variant") {
    const PaymentSample s = draw(PaymentKind::PerPayment, 5000, 1);
    const TrimSpec trim(0.05, 0.05);
    const FitResult f = fit_mtm_y(s, trim);
    CHECK(f.converged);
    CHECK(f.theta_hat == Approx(5.0).margin(0.3));
    CHECK(f.sigma_hat == Approx(3.0).margin(0.2));
    CHECK(f.cov.det() > 0.0);
    CHECK(f.ci_theta.lo < f.theta_hat);
    // estimating equations: trimmed moments equal their model counterparts
    const CoefficientSet cs = coeff_c_y(f.gamma_hat, trim);
    const double m1 = f.theta_hat + f.sigma_hat * cs.c[0];
    CHECK(trimmed_sample_moment(s, trim, 1) == Approx(m1).margin(1e-6));
    const FitResult p = fit_mtm_y_plugin(s, trim);
    CHECK(std::isfinite(p.theta_hat));
    CHECK(p.theta_hat == Approx(f.theta_hat).margin(0.5));
}

TEST_CASE("MTM-Z closed form solves its equations exactly") {
    const TrimSpec trim(0.10, 0.10);
    const PaymentSample s = draw(PaymentKind::PerLoss, 3000, 2);
    const FitResult f = fit_mtm_z(s, trim);
    CHECK(f.residual_norm <= 1e-12);
    const CoefficientSet cs = coeff_c_complete(trim);
    const double mu1 = trimmed_sample_moment(s, trim, 1), mu2 = trimmed_sample_moment(s, trim, 2);
    const double sigma = std::sqrt((mu2 - mu1 * mu1) / (cs.c[1] - cs.c[0] * cs.c[0]));
    CHECK(f.sigma_hat == Approx(sigma).epsilon(1e-12));
    CHECK(f.theta_hat == Approx(mu1 - sigma * cs.c[0]).epsilon(1e-12));
    const FitResult g = fit_mtm_z(s, trim, cs);
    CHECK(g.theta_hat == f.theta_hat);
}

TEST_CASE("MTM-Z covariance scales with sigma squared") {
    const TrimSpec trim(0.15, 0.25);
    const Matrix2 a = cov_mtm_z(1.0, trim), b = cov_mtm_z(2.5, trim);
    CHECK(b.a11 == Approx(6.25 * a.a11));
    CHECK(b.a12 == Approx(6.25 * a.a12));
    CHECK(b.a22 == Approx(6.25 * a.a22));
    // symmetric trimming decouples location and scale
    const Matrix2 s = cov_mtm_z(1.0, TrimSpec(0.2, 0.2));
    CHECK(s.a12 == Approx(0.0).margin(1e-9));
}

TEST_CASE("MTM-Y covariance is consistent with the sample spread") {
    const TrimSpec trim(0.05, 0.10);
    const NormalThresholds th = derive_thresholds(kPolicy, 1.0);
    const Matrix2 S = cov_mtm_y(5.0, 3.0, th, trim);
    CHECK(S.a11 > 0.0);
    CHECK(S.det() > 0.0);
    const std::size_t n = 500, reps = 300;
    double st = 0.0, ss = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        CounterRng rng(55, n, r);
        const PaymentSample s = generate_sample(kModel, kPolicy, PaymentKind::PerPayment, n, rng);
        const FitResult f = fit_mtm_y(s, trim, {}, {}, {WindowCheck::Skip, false});
        st += (f.theta_hat - 5.0) * (f.theta_hat - 5.0);
        ss += (f.sigma_hat - 3.0) * (f.sigma_hat - 3.0);
    }
    // n * MSE within 30% of the asymptotic variances (300 reps)
    CHECK(n * st / reps == Approx(S.a11).epsilon(0.3));
    CHECK(n * ss / reps == Approx(S.a22).epsilon(0.3));
}

TEST_CASE("window validation") {
    const PaymentSample y = draw(PaymentKind::PerPayment, 1000, 4);
    REQUIRE(y.n2 > 0);
    const TrimValidation bad = validate_trim_y(y, TrimSpec(0.05, 0.0));
    CHECK_FALSE(bad.pass());
    CHECK_FALSE(bad.reasons.empty());
    CHECK_THROWS_AS(fit_mtm_y(y, TrimSpec(Proportion(0, 1), Proportion(1, 10000))), ValidationError);
    CHECK(validate_trim_y(y, TrimSpec(0.05, 0.05)).pass());

    const PaymentSample z = draw(PaymentKind::PerLoss, 1000, 5);
    const TrimValidation low = validate_trim_z(z, TrimSpec(0.02, 0.1));
    CHECK_FALSE(low.empirical_pass);
    const FitResult fz = fit_mtm_z(z, TrimSpec(0.15, 0.10));
    const TrimValidation withfit = validate_trim_z(z, TrimSpec(0.15, 0.10), fz);
    REQUIRE(withfit.parametric_pass.has_value());
    CHECK(withfit.pass());

    CHECK(validate_trim_population(PaymentKind::PerLoss, kModel, kPolicy, TrimSpec(0.10, 0.10)).pass());
    CHECK_FALSE(validate_trim_population(PaymentKind::PerLoss, kModel, kPolicy, TrimSpec(0.05, 0.10)).pass());
    CHECK_FALSE(validate_trim_population(PaymentKind::PerPayment, kModel, {1.0, 4.0, 8.5e3}, TrimSpec(0.0, 0.05)).pass());
}
