#include "lnsev/mle.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lnsev/errors.hpp"

namespace lnsev {

namespace {

constexpr double kLog2Pi = 1.837877066409345483560659472811;

struct Bands {
    double xi;
    double omega1;
    double omega2;
    double sf_gamma;
    double band;
};

Bands bands(double gamma, double sigma, const NormalThresholds& th) {
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    Bands b{};
    b.xi = th.censored() ? gamma + th.R / sigma : kInf;
    b.sf_gamma = std_normal_sf(gamma);
    b.band = b.sf_gamma - (th.censored() ? std_normal_sf(b.xi) : 0.0);
    if (!(b.band > 0.0)) throw DomainError("degenerate band: Phi-bar(gamma) equals Phi-bar(xi)");
    b.omega1 = std_normal_pdf(gamma) / b.band;
    b.omega2 = th.censored() ? std_normal_pdf(b.xi) / b.band : 0.0;
    return b;
}

// (gamma, sigma) -> theta-sigma covariance: S = (1/k) D M D^T.
Matrix2 sandwich(double gamma, double sigma, double r1, double r2, double r3, double k) {
    const double det = r1 * r3 - r2 * r2;
    if (det == 0.0 || !std::isfinite(det)) throw SingularityError("information matrix is singular");
    const Matrix2 M = Matrix2::symmetric(-r3, sigma * r2, -sigma * sigma * r1) * (1.0 / (k * det));
    const Matrix2 D{-sigma, -gamma, 0.0, 1.0};
    return M.sandwich(D);
}

void check_sigma(double sigma) {
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
}

FitResult make_fit(Method method, PaymentKind kind, double gamma, double sigma, const NormalThresholds& th,
                   std::size_t n) {
    FitResult f;
    f.method = method;
    f.kind = kind;
    f.gamma_hat = gamma;
    f.sigma_hat = sigma;
    f.theta_hat = th.t - sigma * gamma;
    f.n = n;
    f.cov = cov_mle(kind, gamma, sigma, th);
    attach_intervals(f, 0.95);
    return f;
}

FitResult solve_system(PaymentKind kind, Method method, const MomentSummary& m, const NormalThresholds& th,
                       double c, Vec2 start, const SolverSpec& solver) {
    auto F = [&](const Vec2& p) { return mle_equations(kind, p.x, std::exp(p.y), m, th, c); };
    const Solve2dResult r = solve_2d(F, {start.x, std::log(start.y)}, solver);
    FitResult f = make_fit(method, kind, r.root.x, std::exp(r.root.y), th, m.n);
    f.iterations = r.iterations;
    f.converged = true;
    f.residual_norm = r.residual_norm;
    return f;
}

void require_interior(const MomentSummary& m) {
    if (m.n1 < 2) throw EstimationError("at least two uncensored observations are required");
}

}  // namespace

MomentSummary summarize(const PaymentSample& sample) {
    MomentSummary m;
    m.n = sample.n();
    m.n0 = sample.n0;
    m.n1 = sample.n1;
    m.n2 = sample.n2;
    const double cR = sample.censoring_point();
    long double s1 = 0.0L, s2 = 0.0L;
    std::size_t k = 0;
    for (double v : sample.values) {
        if (v == 0.0 && sample.kind == PaymentKind::PerLoss) continue;
        if (v == cR) continue;
        s1 += v;
        s2 += static_cast<long double>(v) * v;
        ++k;
    }
    if (k != sample.n1) throw DataError("sample counts do not match value classification");
    if (k > 0) {
        m.mu1 = static_cast<double>(s1 / k);
        m.mu2 = static_cast<double>(s2 / k);
    }
    return m;
}

double loglik(PaymentKind kind, double gamma, double sigma, const MomentSummary& m, const NormalThresholds& th,
              double c) {
    check_sigma(sigma);
    const double n1 = static_cast<double>(m.n1);
    const double s1 = n1 * m.mu1;
    const double s2 = n1 * m.mu2;
    const double cs = c * sigma;
    const double quad = n1 * gamma * gamma + 2.0 * gamma * s1 / cs + s2 / (cs * cs);
    double l = -0.5 * n1 * kLog2Pi - n1 * std::log(sigma) - 0.5 * quad;
    if (m.n2 > 0) {
        if (!th.censored()) return -kInf;
        l += static_cast<double>(m.n2) * std_normal_log_sf(gamma + th.R / sigma);
    }
    if (kind == PaymentKind::PerPayment)
        l -= static_cast<double>(m.n) * std_normal_log_sf(gamma);
    else if (m.n0 > 0)
        l += static_cast<double>(m.n0) * std_normal_log_cdf(gamma);
    return l;
}

double loglik_y(double gamma, double sigma, const PaymentSample& sample) {
    if (sample.kind != PaymentKind::PerPayment) throw DomainError("loglik_y requires a per-payment sample");
    check_sigma(sigma);
    return loglik(PaymentKind::PerPayment, gamma, sigma, summarize(sample), sample.thresholds, sample.policy.c);
}

double loglik_z(double gamma, double sigma, const PaymentSample& sample) {
    if (sample.kind != PaymentKind::PerLoss) throw DomainError("loglik_z requires a per-loss sample");
    check_sigma(sigma);
    return loglik(PaymentKind::PerLoss, gamma, sigma, summarize(sample), sample.thresholds, sample.policy.c);
}

Vec2 mle_equations(PaymentKind kind, double gamma, double sigma, const MomentSummary& m, const NormalThresholds& th,
                   double c) {
    check_sigma(sigma);
    const double n1 = static_cast<double>(m.n1);
    double w1 = 0.0;
    if (kind == PaymentKind::PerPayment)
        w1 = static_cast<double>(m.n) / n1 * inverse_mills(gamma);
    else if (m.n0 > 0)
        w1 = static_cast<double>(m.n0) / n1 * inverse_mills(-gamma);
    double w2 = 0.0;
    double w2_r = 0.0;
    if (m.n2 > 0) {
        const double xi = gamma + th.R / sigma;
        w2 = static_cast<double>(m.n2) / n1 * inverse_mills(xi);
        w2_r = w2 * th.R / sigma;
    }
    const double b = w1 - w2 - gamma;
    const double m1 = m.mu1 / c;
    const double m2 = m.mu2 / (c * c);
    return {sigma * b - m1, sigma * sigma * (1.0 - gamma * b - w2_r) - m2};
}

Vec2 mle_start_y(const MomentSummary& m, double c) {
    const double m1 = m.mu1 / c;
    const double var = m.mu2 / (c * c) - m1 * m1;
    const double sigma = var > 0.0 ? std::sqrt(var) : 0.1 * m1;
    return {-m1 / sigma, sigma};
}

Vec2 mle_start_z(const MomentSummary& m, const NormalThresholds& th, double c) {
    if (m.n0 > 0 && m.n2 > 0 && m.n0 + m.n2 < m.n) {
        const double n = static_cast<double>(m.n);
        const double g = std_normal_quantile(static_cast<double>(m.n0) / n);
        const double x = std_normal_quantile(1.0 - static_cast<double>(m.n2) / n);
        if (x > g) return {g, th.R / (x - g)};
    }
    return mle_start_y(m, c);
}

FitResult fit_mle_y(const MomentSummary& m, const NormalThresholds& th, double c, const SolverSpec& solver) {
    require_interior(m);
    return solve_system(PaymentKind::PerPayment, Method::MleY, m, th, c, mle_start_y(m, c), solver);
}

FitResult fit_mle_z(const MomentSummary& m, const NormalThresholds& th, double c, const SolverSpec& solver) {
    require_interior(m);
    if (m.n0 == 0 && m.n2 == 0) {
        const double m1 = m.mu1 / c;
        const double var = m.mu2 / (c * c) - m1 * m1;
        if (!(var > 0.0)) throw EstimationError("interior values have zero variance");
        const double sigma = std::sqrt(var);
        FitResult f = make_fit(Method::CompleteNormal, PaymentKind::PerLoss, -m1 / sigma, sigma, th, m.n);
        f.converged = true;
        f.residual_norm = 0.0;
        f.notes.push_back("no zero or censored payments: complete-data normal MLE on interior values");
        return f;
    }
    if (m.n2 == 0) {
        std::optional<FitResult> seed;
        try {
            seed = fit_left_truncated(PaymentKind::PerLoss, m, th, c);
        } catch (const NoMleError&) {
        }
        const Vec2 start = seed ? Vec2{seed->gamma_hat, seed->sigma_hat} : mle_start_y(m, c);
        FitResult f = solve_system(PaymentKind::PerLoss, Method::MleZ, m, th, c, start, solver);
        if (seed && (std::abs(seed->theta_hat - f.theta_hat) > 1e-6 || std::abs(seed->sigma_hat - f.sigma_hat) > 1e-6)) {
            f.alternate = Vec2{seed->theta_hat, seed->sigma_hat};
            f.notes.push_back("substituted left-truncation solution differs from the exact MLE");
        }
        return f;
    }
    return solve_system(PaymentKind::PerLoss, Method::MleZ, m, th, c, mle_start_z(m, th, c), solver);
}

FitResult fit_mle_y(const PaymentSample& sample, const SolverSpec& solver) {
    if (sample.kind != PaymentKind::PerPayment) throw DomainError("fit_mle_y requires a per-payment sample");
    return fit_mle_y(summarize(sample), sample.thresholds, sample.policy.c, solver);
}

FitResult fit_mle_z(const PaymentSample& sample, const SolverSpec& solver) {
    if (sample.kind != PaymentKind::PerLoss) throw DomainError("fit_mle_z requires a per-loss sample");
    return fit_mle_z(summarize(sample), sample.thresholds, sample.policy.c, solver);
}

FitResult fit_mle(const PaymentSample& sample, const SolverSpec& solver) {
    return sample.kind == PaymentKind::PerPayment ? fit_mle_y(sample, solver) : fit_mle_z(sample, solver);
}

FisherComponents fisher_y(double gamma, double sigma, const NormalThresholds& th) {
    const Bands b = bands(gamma, sigma, th);
    FisherComponents fc;
    fc.lambda = b.band / b.sf_gamma;
    const double lg = inverse_mills(gamma);
    const double w1 = b.omega1, w2 = b.omega2;
    if (th.censored()) {
        const double lx = inverse_mills(b.xi);
        const double rs = th.R / sigma;
        fc.r1 = -(1.0 + gamma * w1 - b.xi * w2 - lg * w1 + lx * w2);
        fc.r2 = rs * w2 * (lx - b.xi) + (w1 - w2 - gamma);
        fc.r3 = rs * rs * w2 * (b.xi - lx) - (2.0 - gamma * (w1 - w2 - gamma) - w2 * rs);
    } else {
        fc.r1 = -(1.0 + gamma * w1 - lg * w1);
        fc.r2 = w1 - gamma;
        fc.r3 = -(2.0 - gamma * (w1 - gamma));
    }
    const double L = fc.lambda;
    fc.info = Matrix2::symmetric(-L * fc.r1, -L * fc.r2 / sigma, -L * fc.r3 / (sigma * sigma));
    return fc;
}

FisherComponents fisher_z(double gamma, double sigma, const NormalThresholds& th) {
    const Bands b = bands(gamma, sigma, th);
    FisherComponents fc;
    fc.lambda = b.band / b.sf_gamma;
    const double lneg = inverse_mills(-gamma);  // phi / Phi
    const double w1 = b.omega1, w2 = b.omega2;
    if (th.censored()) {
        const double lx = inverse_mills(b.xi);
        const double rs = th.R / sigma;
        fc.r1 = -(1.0 + gamma * w1 - b.xi * w2 + lneg * w1 + lx * w2);
        fc.r2 = rs * w2 * (lx - b.xi) + (w1 - w2 - gamma);
        fc.r3 = rs * rs * w2 * (b.xi - lx) - (2.0 - gamma * (w1 - w2 - gamma) - w2 * rs);
    } else {
        fc.r1 = -(1.0 + gamma * w1 + lneg * w1);
        fc.r2 = w1 - gamma;
        fc.r3 = -(2.0 - gamma * (w1 - gamma));
    }
    const double L = fc.lambda * b.sf_gamma;
    fc.info = Matrix2::symmetric(-L * fc.r1, -L * fc.r2 / sigma, -L * fc.r3 / (sigma * sigma));
    return fc;
}

Matrix2 cov_mle_y(double gamma, double sigma, const NormalThresholds& th) {
    const FisherComponents fc = fisher_y(gamma, sigma, th);
    return sandwich(gamma, sigma, fc.r1, fc.r2, fc.r3, fc.lambda);
}

Matrix2 cov_mle_z(double gamma, double sigma, const NormalThresholds& th) {
    const FisherComponents fc = fisher_z(gamma, sigma, th);
    return sandwich(gamma, sigma, fc.r1, fc.r2, fc.r3, fc.lambda * std_normal_sf(gamma));
}

Matrix2 cov_mle(PaymentKind kind, double gamma, double sigma, const NormalThresholds& th) {
    return kind == PaymentKind::PerPayment ? cov_mle_y(gamma, sigma, th) : cov_mle_z(gamma, sigma, th);
}

double g_function(double gamma) {
    if (gamma < 5.0) {
        const double e = inverse_mills(gamma) - gamma;
        return (1.0 / e) * (1.0 / e - gamma);
    }
    // With Phi-bar / phi = 1/(x + A1), A_j = j/(x + A_{j+1}): G = A2 (x + A2).
    double a = 0.0;
    for (int j = 200; j >= 2; --j) a = j / (gamma + a);
    return a * (gamma + a);
}

FitResult fit_left_truncated(PaymentKind kind, const MomentSummary& m, const NormalThresholds& th, double c) {
    require_interior(m);
    if (m.n2 != 0) throw DomainError("left-truncation closed form requires no censored observations");
    const double delta = m.mu2 / (m.mu1 * m.mu1);
    if (!(delta > 1.0 && delta < 2.0))
        throw NoMleError("moment ratio " + std::to_string(delta) + " outside (1, 2): no maximum likelihood estimate",
                         delta);
    SolverSpec s;
    s.residual_tol = 1e-14;
    s.step_tol = 1e-15;
    const double gamma = solve_monotone_scalar(g_function, delta, {-1.0, 1.0}, s);
    const double sigma = (m.mu1 / c) / (inverse_mills(gamma) - gamma);
    const Method method = kind == PaymentKind::PerPayment ? Method::LeftTruncatedY : Method::LeftTruncatedZ;
    FitResult f;
    f.method = method;
    f.kind = kind;
    f.gamma_hat = gamma;
    f.sigma_hat = sigma;
    f.theta_hat = th.t - sigma * gamma;
    f.n = m.n;
    f.cov = th.censored() ? cov_mle(kind, gamma, sigma, th) : cov_left_truncated(gamma, sigma, kind);
    f.converged = true;
    f.global_maximum = true;
    // Residual of the substituted system (Omega_1 = phi / Phi-bar).
    MomentSummary sub = m;
    sub.n = m.n1;
    sub.n0 = 0;
    const Vec2 r = mle_equations(PaymentKind::PerPayment, gamma, sigma, sub, th, c);
    f.residual_norm = std::hypot(r.x, r.y);
    attach_intervals(f, 0.95);
    return f;
}

FitResult fit_left_truncated(const PaymentSample& sample) {
    return fit_left_truncated(sample.kind, summarize(sample), sample.thresholds, sample.policy.c);
}

Matrix2 cov_left_truncated(double gamma, double sigma, PaymentKind kind) {
    check_sigma(sigma);
    const double w1 = inverse_mills(gamma);
    const double r2 = w1 - gamma;
    const double r3 = -(2.0 - gamma * (w1 - gamma));
    if (kind == PaymentKind::PerPayment) {
        const double r1 = -(1.0 + gamma * w1 - inverse_mills(gamma) * w1);
        return sandwich(gamma, sigma, r1, r2, r3, 1.0);
    }
    const double r1 = -(1.0 + gamma * w1 + inverse_mills(-gamma) * w1);
    return sandwich(gamma, sigma, r1, r2, r3, std_normal_sf(gamma));
}

}  // namespace lnsev
