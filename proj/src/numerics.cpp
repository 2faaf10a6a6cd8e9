#include "lnsev/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "lnsev/errors.hpp"

namespace lnsev {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;

// Continued fraction 1 - Phi(x) = phi(x) / (x + A1), A_j = j / (x + A_{j+1}).
// Returns (A1, A2); used for x >= 5 where it converges quickly.
std::pair<double, double> mills_fraction(double x) {
    double a = 0.0;
    double a2 = 0.0;
    for (int j = 200; j >= 1; --j) {
        a = j / (x + a);
        if (j == 2) a2 = a;
    }
    return {a, a2};
}

}  // namespace

Matrix2 Matrix2::inverse() const {
    const double d = det();
    if (d == 0.0 || !std::isfinite(d)) throw SingularityError("2x2 matrix is singular");
    return {a22 / d, -a12 / d, -a21 / d, a11 / d};
}

void QuadratureSpec::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw DomainError("quadrature tolerances must be positive");
    if (max_subdivisions < 1) throw DomainError("max_subdivisions must be at least 1");
}

void SolverSpec::validate() const {
    if (!(residual_tol > 0.0) || !(step_tol > 0.0)) throw DomainError("solver tolerances must be positive");
    if (max_iterations < 1) throw DomainError("max_iterations must be at least 1");
    if (!(damping > 0.0 && damping <= 1.0)) throw DomainError("damping must lie in (0, 1]");
}

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double std_normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double std_normal_log_sf(double x) {
    if (x < 30.0) return std::log(std_normal_sf(x));
    return -0.5 * x * x - kLogSqrt2Pi - std::log(inverse_mills(x));
}

double std_normal_log_cdf(double x) { return std_normal_log_sf(-x); }

double inverse_mills(double x) {
    if (x == std::numeric_limits<double>::infinity()) return x;
    if (x < 5.0) return std_normal_pdf(x) / std_normal_sf(x);
    return x + mills_fraction(x).first;
}

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile requires 0 < p < 1, got " + std::to_string(p));
    using namespace boost::math::policies;
    using Pol = policy<promote_double<false>>;
    double x = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p, Pol());
    const double d = std_normal_pdf(x);
    if (d > 0.0) {
        if (p <= 0.5)
            x -= (std_normal_cdf(x) - p) / d;
        else
            x += (std_normal_sf(x) - (1.0 - p)) / d;
    }
    return x;
}

double integrate_1d(const std::function<double(double)>& f, double lo, double hi,
                    const QuadratureSpec& spec) {
    spec.validate();
    if (!(lo < hi)) throw DomainError("integrate_1d requires lo < hi");

    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    using G = boost::math::quadrature::gauss<double, 10>;
    const auto& xk = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = G::weights();

    struct Piece {
        double lo, hi, value, error;
        bool operator<(const Piece& o) const { return error < o.error; }
    };
    auto rule = [&](double a, double b) {
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        const double f0 = f(mid);
        double k = f0 * wk[0];
        double g = 0.0;
        for (std::size_t i = 1; i < xk.size(); ++i) {
            const double s = f(mid + half * xk[i]) + f(mid - half * xk[i]);
            k += s * wk[i];
            if (i % 2 == 1) g += s * wg[i / 2];
        }
        k *= half;
        g *= half;
        if (!std::isfinite(k)) throw DomainError("integrand is not finite on the integration interval");
        const double err = std::max(std::abs(k - g), 4.0 * std::numeric_limits<double>::epsilon() * std::abs(k));
        return Piece{a, b, k, err};
    };

    std::priority_queue<Piece> heap;
    Piece first = rule(lo, hi);
    double total = first.value;
    double error = first.error;
    heap.push(first);
    int pieces = 1;
    while (error > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
        if (pieces >= spec.max_subdivisions)
            throw ConvergenceError("integrate_1d: subdivision limit reached", total, error);
        Piece worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi))
            throw ConvergenceError("integrate_1d: interval cannot be bisected further", total, error);
        Piece left = rule(worst.lo, mid);
        Piece right = rule(mid, worst.hi);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++pieces;
    }
    // Re-sum to shed accumulated rounding from the running updates.
    double sum = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        heap.pop();
    }
    return sum;
}

double integrate_2d_square(const std::function<double(double, double)>& k, double lo, double hi,
                           const QuadratureSpec& spec) {
    spec.validate();
    if (!(lo < hi)) throw DomainError("integrate_2d_square requires lo < hi");
    QuadratureSpec inner = spec;
    inner.abs_tol = spec.abs_tol * 0.1;
    inner.rel_tol = spec.rel_tol * 0.1;
    auto outer = [&](double u) {
        double s = 0.0;
        if (u > lo) s += integrate_1d([&](double v) { return k(u, v); }, lo, u, inner);
        if (u < hi) s += integrate_1d([&](double v) { return k(u, v); }, u, hi, inner);
        return s;
    };
    return integrate_1d(outer, lo, hi, spec);
}

double solve_monotone_scalar(const std::function<double(double)>& f, double target,
                             std::pair<double, double> bracket, const SolverSpec& spec) {
    spec.validate();
    auto [lo, hi] = bracket;
    if (lo > hi) std::swap(lo, hi);
    double flo = f(lo) - target;
    double fhi = f(hi) - target;
    const bool increasing = f(hi) >= f(lo);
    // Expand toward the side that must move.
    for (int expand = 0; flo * fhi > 0.0; ++expand) {
        if (expand >= 60) throw NoSolutionError("target lies outside the range of the function");
        const double width = hi - lo;
        const bool target_above = increasing ? (fhi < 0.0) : (fhi > 0.0);
        if (target_above) {
            lo = hi;
            flo = fhi;
            hi = hi + 2.0 * width;
            fhi = f(hi) - target;
        } else {
            hi = lo;
            fhi = flo;
            lo = lo - 2.0 * width;
            flo = f(lo) - target;
        }
        if (!std::isfinite(flo) || !std::isfinite(fhi))
            throw NoSolutionError("function not finite while expanding bracket");
    }
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;

    // Illinois-style regula falsi, with bisection when it stalls.
    double x = lo;
    int side = 0;
    for (int it = 0; it < spec.max_iterations * 4; ++it) {
        x = (lo * fhi - hi * flo) / (fhi - flo);
        if (!(x > lo && x < hi) || it % 3 == 2) x = 0.5 * (lo + hi);
        const double fx = f(x) - target;
        if (std::abs(fx) <= spec.residual_tol || (hi - lo) <= spec.step_tol * std::max(1.0, std::abs(x)))
            return x;
        if ((fx < 0.0) == (flo < 0.0)) {
            lo = x;
            flo = fx;
            if (side == -1) fhi *= 0.5;
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if (side == 1) flo *= 0.5;
            side = 1;
        }
    }
    throw ConvergenceError("solve_monotone_scalar did not converge", x, hi - lo);
}

Matrix2 numerical_jacobian(const Map2& F, const Vec2& x) {
    const double hx = std::max(1e-6, 1e-6 * std::abs(x.x));
    const double hy = std::max(1e-6, 1e-6 * std::abs(x.y));
    const Vec2 fxp = F({x.x + hx, x.y});
    const Vec2 fxm = F({x.x - hx, x.y});
    const Vec2 fyp = F({x.x, x.y + hy});
    const Vec2 fym = F({x.x, x.y - hy});
    return {(fxp.x - fxm.x) / (2 * hx), (fyp.x - fym.x) / (2 * hy),
            (fxp.y - fxm.y) / (2 * hx), (fyp.y - fym.y) / (2 * hy)};
}

Solve2dResult solve_2d(const Map2& F, Vec2 start, const SolverSpec& spec) {
    spec.validate();
    auto norm = [](const Vec2& v) { return std::hypot(v.x, v.y); };
    Vec2 x = start;
    Vec2 fx = F(x);
    double r = norm(fx);
    if (!std::isfinite(r)) throw ConvergenceError("solve_2d: residual not finite at start", r, r);
    for (int it = 0; it <= spec.max_iterations; ++it) {
        if (r <= spec.residual_tol) return {x, fx, r, it};
        if (it == spec.max_iterations) break;
        const Matrix2 J = numerical_jacobian(F, x);
        if (std::abs(J.det()) < 1e-300 || !std::isfinite(J.det()))
            throw SingularityError("solve_2d: singular Jacobian");
        const Vec2 step = J.inverse() * fx;
        double lambda = spec.damping;
        Vec2 trial{};
        Vec2 ftrial{};
        double rtrial = r;
        bool accepted = false;
        for (int half = 0; half < 40; ++half) {
            trial = {x.x - lambda * step.x, x.y - lambda * step.y};
            ftrial = F(trial);
            rtrial = norm(ftrial);
            if (std::isfinite(rtrial) && rtrial < r) {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            if (r <= 1e3 * spec.residual_tol) return {x, fx, r, it};
            throw ConvergenceError("solve_2d: no residual decrease along the Newton direction", x.x, r);
        }
        const double moved = std::hypot(trial.x - x.x, trial.y - x.y);
        x = trial;
        fx = ftrial;
        r = rtrial;
        if (moved <= spec.step_tol * std::max(1.0, norm(x)) && r <= 1e3 * spec.residual_tol)
            return {x, fx, r, it + 1};
    }
    throw ConvergenceError("solve_2d: iteration limit reached", x.x, r);
}

}  // namespace lnsev
