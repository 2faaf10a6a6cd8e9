#include "lnsev/mtm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lnsev/errors.hpp"

namespace lnsev {

namespace {

// Phi^-1(s + (1 - s) Phi(gamma)), evaluated through the upper tail when close to 1.
struct TransformedQuantile {
    double cdf_gamma;
    double sf_gamma;

    explicit TransformedQuantile(double gamma)
        : cdf_gamma(std_normal_cdf(gamma)), sf_gamma(std_normal_sf(gamma)) {}

    double operator()(double s) const {
        const double upper = (1.0 - s) * sf_gamma;
        return upper < 0.5 ? -std_normal_quantile(upper) : std_normal_quantile(s + (1.0 - s) * cdf_gamma);
    }
};

void require_guard(double x, const char* what) {
    if (x < kEndpointGuard)
        throw DomainError(std::string(what) + " must be at least 1e-6 for the coefficient integrals");
}

// c_1, c_2 only; the inner loop of the Y fixed point.
std::array<double, 2> c12_y(double gamma, double a, double b, const QuadratureSpec& quad) {
    const TransformedQuantile q(gamma);
    const double tau = 1.0 - a - b;
    const double c1 = integrate_1d(q, a, 1.0 - b, quad) / tau;
    const double c2 = integrate_1d([&](double s) { const double x = q(s); return x * x; }, a, 1.0 - b, quad) / tau;
    return {c1, c2};
}

struct Moments {
    double mu1;
    double mu2;
};

Moments trimmed_moments(const PaymentSample& sample, const TrimSpec& trim) {
    return {trimmed_sample_moment(sample, trim, 1), trimmed_sample_moment(sample, trim, 2)};
}

TrimSpec guarded_y_trim(const TrimSpec& trim, std::vector<std::string>& notes) {
    if (trim.upper() >= kEndpointGuard) return trim;
    notes.push_back("b below 1e-6: coefficients evaluated at b = 1e-6");
    return TrimSpec(trim.a, Proportion(1, 1'000'000));
}

void enforce_window(const TrimValidation& v) {
    if (!v.empirical_pass) {
        std::string msg = "trimming proportions fail the windowing conditions";
        for (const auto& r : v.reasons) msg += "; " + r;
        throw ValidationError(msg);
    }
}

FitResult mtm_result(Method method, PaymentKind kind, double theta, double sigma, const PaymentSample& sample,
                     const TrimSpec& trim) {
    FitResult f;
    f.method = method;
    f.kind = kind;
    f.theta_hat = theta;
    f.sigma_hat = sigma;
    f.gamma_hat = (sample.thresholds.t - theta) / sigma;
    f.theta_hat = sample.thresholds.t - f.sigma_hat * f.gamma_hat;
    f.n = sample.n();
    f.trim = trim;
    return f;
}

// (1-b) <= k/n done in integers: n (den - num) <= k den.
bool upper_fraction_le(const Proportion& b, std::size_t k, std::size_t n) {
    const auto lhs = static_cast<__int128>(n) * (b.den() - b.num());
    return lhs <= static_cast<__int128>(k) * b.den();
}

}  // namespace

double trimmed_sample_moment(const PaymentSample& sample, const TrimSpec& trim, int j) {
    if (j != 1 && j != 2) throw DomainError("trimmed moments are defined for j = 1, 2");
    const TrimWindow w = trim.window(sample.n());
    const double c = sample.policy.c;
    const double t = sample.thresholds.t;
    long double s = 0.0L;
    for (std::size_t i = w.m_n; i < w.n - w.m_n_star; ++i) {
        const double h = sample.values[i] / c + t;
        s += j == 1 ? h : static_cast<long double>(h) * h;
    }
    return static_cast<double>(s / static_cast<long double>(w.size()));
}

CoefficientSet coeff_c_y(double gamma, const TrimSpec& trim, const QuadratureSpec& quad) {
    require_guard(trim.upper(), "b");
    const double a = trim.lower(), b = trim.upper(), tau = trim.tau();
    const TransformedQuantile q(gamma);
    CoefficientSet cs;
    cs.gamma_used = gamma;
    for (int k = 1; k <= 4; ++k)
        cs.c[k - 1] = integrate_1d([&](double s) { return std::pow(q(s), k); }, a, 1.0 - b, quad) / tau;
    const double pg = std_normal_pdf(gamma);
    for (int k = 1; k <= 2; ++k) {
        const double J = integrate_1d(
            [&](double s) {
                const double x = q(s);
                return (1.0 - s) * (k == 1 ? 1.0 : x) / std_normal_pdf(x);
            },
            a, 1.0 - b, quad);
        cs.dc_dgamma[k - 1] = k * pg * J / tau;
    }
    return cs;
}

std::array<double, 3> coeff_c_star_y(double gamma, const TrimSpec& trim, const QuadratureSpec& quad) {
    require_guard(trim.upper(), "b");
    const double a = trim.lower(), b = trim.upper(), tau = trim.tau();
    const TransformedQuantile q(gamma);
    const double pre = (q.sf_gamma / tau) * (q.sf_gamma / tau);
    std::array<double, 3> out{};
    for (int k = 0; k < 3; ++k) {
        auto kernel = [&](double u, double v) {
            const double qu = q(u), qv = q(v);
            const double w = k == 0 ? 1.0 : (k == 1 ? qu : qu * qv);
            return (std::min(u, v) - u * v) * w / (std_normal_pdf(qu) * std_normal_pdf(qv));
        };
        out[k] = pre * integrate_2d_square(kernel, a, 1.0 - b, quad);
    }
    return out;
}

CoefficientSet coeff_c_complete(const TrimSpec& trim, const QuadratureSpec& quad) {
    require_guard(trim.lower(), "a");
    require_guard(trim.upper(), "b");
    const double a = trim.lower(), b = trim.upper(), tau = trim.tau();
    CoefficientSet cs;
    for (int k = 1; k <= 4; ++k)
        cs.c[k - 1] = integrate_1d([&](double s) { return std::pow(std_normal_quantile(s), k); }, a, 1.0 - b, quad) / tau;
    const double A = std_normal_quantile(a);
    const double B = std_normal_quantile(1.0 - b);
    const double abar = 1.0 - a, bbar = 1.0 - b;
    const auto [c1, c2, c3, c4] = cs.c;
    const double t2 = tau * tau;
    cs.c_star[0] = (a * abar * A * A + b * bbar * B * B - 2.0 * a * b * A * B - 2.0 * tau * c1 * (a * A + b * B) -
                    t2 * c1 * c1 + tau * c2) / t2;
    cs.c_star[1] = (a * abar * A * A * A + b * bbar * B * B * B - a * b * A * B * (A + B) -
                    tau * c1 * (a * A * A + b * B * B) - tau * c2 * (a * A + b * B) - t2 * c1 * c2 + tau * c3) /
                   (2.0 * t2);
    cs.c_star[2] = (a * abar * A * A * A * A + b * bbar * B * B * B * B - 2.0 * a * b * A * A * B * B -
                    2.0 * tau * c2 * (a * A * A + b * B * B) - t2 * c2 * c2 + tau * c4) /
                   (4.0 * t2);
    return cs;
}

FitResult fit_mtm_y(const PaymentSample& sample, const TrimSpec& trim, const SolverSpec& solver,
                    const QuadratureSpec& quad, const MtmOptions& opts) {
    if (sample.kind != PaymentKind::PerPayment) throw DomainError("fit_mtm_y requires a per-payment sample");
    solver.validate();
    if (opts.check == WindowCheck::Enforce) enforce_window(validate_trim_y(sample, trim));
    std::vector<std::string> notes;
    const TrimSpec ct = guarded_y_trim(trim, notes);
    const auto [mu1, mu2] = trimmed_moments(sample, trim);
    const double s2 = mu2 - mu1 * mu1;
    if (!(s2 > 0.0)) throw EstimationError("trimmed window has zero variance");
    const double t = sample.thresholds.t;

    double theta = mu1;
    double sigma = std::sqrt(s2);
    int it = 0;
    bool converged = false;
    std::array<double, 2> c{};
    for (; it < solver.max_iterations; ++it) {
        c = c12_y((t - theta) / sigma, ct.lower(), ct.upper(), quad);
        const double gap = c[1] - c[0] * c[0];
        if (!(gap > 0.0)) throw EstimationError("degenerate coefficients: c2 <= c1^2");
        double sigma_new = std::sqrt(s2 / gap);
        double theta_new = mu1 - c[0] * sigma_new;
        if (it >= 50) {
            sigma_new = 0.5 * (sigma + sigma_new);
            theta_new = 0.5 * (theta + theta_new);
        }
        const double move = std::max(std::abs(theta_new - theta), std::abs(sigma_new - sigma));
        theta = theta_new;
        sigma = sigma_new;
        if (move <= 1e-10) {
            converged = true;
            ++it;
            break;
        }
    }
    if (!converged) throw ConvergenceError("MTM-Y fixed point did not converge", theta, sigma);

    c = c12_y((t - theta) / sigma, ct.lower(), ct.upper(), quad);
    FitResult f = mtm_result(Method::MtmY, PaymentKind::PerPayment, theta, sigma, sample, trim);
    f.iterations = it;
    f.converged = true;
    f.residual_norm = std::hypot(theta - mu1 + c[0] * sigma, sigma - std::sqrt(s2 / (c[1] - c[0] * c[0])));
    f.notes = notes;
    if (opts.covariance) {
        f.cov = cov_mtm_y(f.theta_hat, f.sigma_hat, sample.thresholds, ct, quad);
        attach_intervals(f, 0.95);
    }
    return f;
}

FitResult fit_mtm_y_plugin(const PaymentSample& sample, const TrimSpec& trim, const QuadratureSpec& quad,
                           const MtmOptions& opts) {
    if (sample.kind != PaymentKind::PerPayment) throw DomainError("fit_mtm_y_plugin requires a per-payment sample");
    if (opts.check == WindowCheck::Enforce) enforce_window(validate_trim_y(sample, trim));
    std::vector<std::string> notes;
    const TrimSpec ct = guarded_y_trim(trim, notes);
    const auto [mu1, mu2] = trimmed_moments(sample, trim);
    const double s2 = mu2 - mu1 * mu1;
    if (!(s2 > 0.0)) throw EstimationError("trimmed window has zero variance");
    const double gamma0 = (sample.thresholds.t - mu1) / std::sqrt(s2);
    const auto c = c12_y(gamma0, ct.lower(), ct.upper(), quad);
    const double gap = c[1] - c[0] * c[0];
    if (!(gap > 0.0)) throw EstimationError("degenerate coefficients: c2 <= c1^2");
    const double sigma = std::sqrt(s2 / gap);
    const double theta = mu1 - c[0] * sigma;
    FitResult f = mtm_result(Method::MtmYPlugin, PaymentKind::PerPayment, theta, sigma, sample, trim);
    f.converged = true;
    f.residual_norm = std::hypot(theta - mu1 + c[0] * sigma, sigma * sigma * gap - s2);
    f.notes = notes;
    f.notes.push_back("coefficients frozen at gamma = " + std::to_string(gamma0));
    if (opts.covariance) {
        f.cov = cov_mtm_y(f.theta_hat, f.sigma_hat, sample.thresholds, ct, quad);
        attach_intervals(f, 0.95);
    }
    return f;
}

MtmCovarianceWork mtm_y_covariance_work(double theta, double sigma, const NormalThresholds& th,
                                        const TrimSpec& trim, const QuadratureSpec& quad) {
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    const double gamma = (th.t - theta) / sigma;
    MtmCovarianceWork w;
    w.coefficients = coeff_c_y(gamma, trim, quad);
    w.coefficients.c_star = coeff_c_star_y(gamma, trim, quad);
    const CoefficientSet& cs = w.coefficients;
    const double c1 = cs.c[0], c2 = cs.c[1];
    const double gap = c2 - c1 * c1;
    if (!(gap > 0.0)) throw SingularityError("degenerate coefficients: c2 <= c1^2");

    const double dc1t = cs.dc_dtheta(1, sigma), dc1s = cs.dc_dsigma(1, sigma);
    const double dc2t = cs.dc_dtheta(2, sigma), dc2s = cs.dc_dsigma(2, sigma);
    w.f11 = 1.0 + sigma * dc1t;
    w.f12 = c1 + sigma * dc1s;
    w.f21 = dc2t - 2.0 * c1 * dc1t;
    w.f22 = dc2s - 2.0 * c1 * dc1s;
    if (w.f11 == 0.0) throw SingularityError("f11 vanishes");

    // Population trimmed moments of h.
    const double mu1 = theta + sigma * c1;
    const double var = sigma * sigma * gap;
    w.K = 0.5 * std::sqrt(gap / var);
    const double den = w.f11 * gap * gap + w.K * var * (w.f11 * w.f22 - w.f12 * w.f21);
    if (den == 0.0) throw SingularityError("singular MTM-Y Jacobian");
    w.d21 = -w.K * (2.0 * w.f11 * mu1 * gap + w.f21 * var) / den;
    w.d22 = w.K * w.f11 * gap / den;
    w.d11 = (1.0 - w.f12 * w.d21) / w.f11;
    w.d12 = -w.f12 * w.d22 / w.f11;

    const auto [s1, s2, s3] = cs.c_star;
    const double sg2 = sigma * sigma;
    w.sigma2_11 = sg2 * s1;
    w.sigma2_12 = 2.0 * theta * sg2 * s1 + 2.0 * sg2 * sigma * s2;
    w.sigma2_22 = 4.0 * theta * theta * sg2 * s1 + 8.0 * theta * sg2 * sigma * s2 + 4.0 * sg2 * sg2 * s3;

    const Matrix2 Sigma = Matrix2::symmetric(w.sigma2_11, w.sigma2_12, w.sigma2_22);
    const Matrix2 D{w.d11, w.d12, w.d21, w.d22};
    w.S = Sigma.sandwich(D);
    return w;
}

Matrix2 cov_mtm_y(double theta, double sigma, const NormalThresholds& th, const TrimSpec& trim,
                  const QuadratureSpec& quad) {
    return mtm_y_covariance_work(theta, sigma, th, trim, quad).S;
}

FitResult fit_mtm_z(const PaymentSample& sample, const TrimSpec& trim, const CoefficientSet& complete,
                    const MtmOptions& opts) {
    if (sample.kind != PaymentKind::PerLoss) throw DomainError("fit_mtm_z requires a per-loss sample");
    if (opts.check == WindowCheck::Enforce) enforce_window(validate_trim_z(sample, trim));
    const auto [mu1, mu2] = trimmed_moments(sample, trim);
    const double c1 = complete.c[0], c2 = complete.c[1];
    const double gap = c2 - c1 * c1;
    if (!(gap > 0.0)) throw SingularityError("degenerate coefficients: c2 <= c1^2");
    const double s2 = mu2 - mu1 * mu1;
    if (!(s2 > 0.0)) throw EstimationError("trimmed window has zero variance");
    const double sigma = std::sqrt(s2 / gap);
    const double theta = mu1 - c1 * sigma;
    FitResult f = mtm_result(Method::MtmZ, PaymentKind::PerLoss, theta, sigma, sample, trim);
    f.converged = true;
    const double r1 = f.theta_hat + c1 * f.sigma_hat - mu1;
    const double r2 = f.sigma_hat * f.sigma_hat * gap - s2;
    f.residual_norm = std::hypot(r1, r2);
    if (opts.covariance) {
        f.cov = cov_mtm_z(f.sigma_hat, complete);
        attach_intervals(f, 0.95);
    }
    return f;
}

FitResult fit_mtm_z(const PaymentSample& sample, const TrimSpec& trim, const QuadratureSpec& quad,
                    const MtmOptions& opts) {
    if (sample.kind != PaymentKind::PerLoss) throw DomainError("fit_mtm_z requires a per-loss sample");
    if (opts.check == WindowCheck::Enforce) enforce_window(validate_trim_z(sample, trim));
    MtmOptions inner = opts;
    inner.check = WindowCheck::Skip;
    return fit_mtm_z(sample, trim, coeff_c_complete(trim, quad), inner);
}

Matrix2 cov_mtm_z(double sigma, const CoefficientSet& cs) {
    const auto [c1, c2, c3, c4] = cs.c;
    (void)c3;
    (void)c4;
    const auto [s1, s2, s3] = cs.c_star;
    const double gap = c2 - c1 * c1;
    if (!(gap > 0.0)) throw SingularityError("degenerate coefficients: c2 = c1^2");
    const double k = sigma * sigma / (gap * gap);
    const double m11 = s1 * c2 * c2 - 2.0 * c1 * c2 * s2 + c1 * c1 * s3;
    const double m12 = -s1 * c1 * c2 + c2 * s2 + c1 * c1 * s2 - c1 * s3;
    const double m22 = s1 * c1 * c1 - 2.0 * c1 * s2 + s3;
    return Matrix2::symmetric(k * m11, k * m12, k * m22);
}

Matrix2 cov_mtm_z(double sigma, const TrimSpec& trim, const QuadratureSpec& quad) {
    return cov_mtm_z(sigma, coeff_c_complete(trim, quad));
}

TrimValidation validate_trim_y(const PaymentSample& sample, const TrimSpec& trim,
                               const std::optional<FitResult>& fitted) {
    if (sample.kind != PaymentKind::PerPayment) throw DomainError("validate_trim_y requires a per-payment sample");
    TrimValidation v;
    const std::size_t n = sample.n();
    v.info.s_star_empirical = n ? static_cast<double>(sample.n1) / static_cast<double>(n) : 0.0;
    v.info.fn_t = 0.0;
    v.info.fn_T = v.info.s_star_empirical;
    v.empirical_pass = true;
    if (trim.b.num() == 0 && (sample.n2 > 0 || sample.thresholds.censored())) {
        v.empirical_pass = false;
        v.reasons.push_back("b = 0 is only allowed without a policy limit");
    }
    const TrimWindow w = trim.window(n);
    if (w.m_n_star < sample.n2) {
        v.empirical_pass = false;
        v.reasons.push_back("m_n* = " + std::to_string(w.m_n_star) + " < n2 = " + std::to_string(sample.n2) +
                            ": censored values remain in the window");
    }
    if (!upper_fraction_le(trim.b, sample.n1, n)) {
        v.empirical_pass = false;
        v.reasons.push_back("1 - b exceeds the empirical s* = " + std::to_string(v.info.s_star_empirical));
    }
    if (fitted) {
        const double sp = dist_y(fitted->model(sample.w0), sample.policy).s_star();
        v.info.s_star_parametric = sp;
        v.parametric_pass = 1.0 - trim.upper() <= sp;
        if (!*v.parametric_pass) v.reasons.push_back("1 - b exceeds the parametric s* = " + std::to_string(sp));
    }
    return v;
}

TrimValidation validate_trim_z(const PaymentSample& sample, const TrimSpec& trim,
                               const std::optional<FitResult>& fitted) {
    if (sample.kind != PaymentKind::PerLoss) throw DomainError("validate_trim_z requires a per-loss sample");
    TrimValidation v;
    const std::size_t n = sample.n();
    const double dn = static_cast<double>(n);
    v.info.fn_t = n ? static_cast<double>(sample.n0) / dn : 0.0;
    v.info.fn_T = n ? static_cast<double>(sample.n0 + sample.n1) / dn : 0.0;
    v.info.s_star_empirical = v.info.fn_T;
    v.empirical_pass = true;
    const TrimWindow w = trim.window(n);
    if (w.m_n < sample.n0) {
        v.empirical_pass = false;
        v.reasons.push_back("m_n = " + std::to_string(w.m_n) + " < n0 = " + std::to_string(sample.n0) +
                            ": zero payments remain in the window");
    }
    if (w.m_n_star < sample.n2) {
        v.empirical_pass = false;
        v.reasons.push_back("m_n* = " + std::to_string(w.m_n_star) + " < n2 = " + std::to_string(sample.n2) +
                            ": censored values remain in the window");
    }
    if (fitted) {
        const PaymentDistribution dz = dist_z(fitted->model(sample.w0), sample.policy);
        v.info.fx_t_hat = dz.fx_t();
        v.info.fx_T_hat = dz.fx_T();
        bool ok = true;
        if (!(*v.info.fx_t_hat <= trim.lower())) {
            ok = false;
            v.reasons.push_back("parametric F(t) = " + std::to_string(*v.info.fx_t_hat) + " exceeds a");
        }
        if (!(1.0 - trim.upper() <= *v.info.fx_T_hat)) {
            ok = false;
            v.reasons.push_back("1 - b exceeds parametric F(T) = " + std::to_string(*v.info.fx_T_hat));
        }
        v.parametric_pass = ok;
    }
    return v;
}

TrimValidation validate_trim_population(PaymentKind kind, const GroundUpLognormal& model, const PolicySpec& policy,
                                        const TrimSpec& trim) {
    TrimValidation v;
    const PaymentDistribution d(kind, model, policy);
    v.empirical_pass = true;
    if (kind == PaymentKind::PerPayment) {
        v.info.s_star_parametric = d.s_star();
        if (!(1.0 - trim.upper() <= d.s_star())) {
            v.empirical_pass = false;
            v.reasons.push_back("1 - b exceeds s*");
        }
        if (trim.b.num() == 0 && policy.u < kInf) {
            v.empirical_pass = false;
            v.reasons.push_back("b = 0 is only allowed without a policy limit");
        }
    } else {
        v.info.fx_t_hat = d.fx_t();
        v.info.fx_T_hat = d.fx_T();
        if (!(d.fx_t() <= trim.lower())) {
            v.empirical_pass = false;
            v.reasons.push_back("F(t) exceeds a");
        }
        if (!(1.0 - trim.upper() <= d.fx_T())) {
            v.empirical_pass = false;
            v.reasons.push_back("1 - b exceeds F(T)");
        }
    }
    return v;
}

}  // namespace lnsev
