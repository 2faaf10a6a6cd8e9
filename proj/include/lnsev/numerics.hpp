#pragma once

#include <functional>
#include <utility>

#include "lnsev/matrix2.hpp"

namespace lnsev {

struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_subdivisions = 2000;

    void validate() const;
};

struct SolverSpec {
    double residual_tol = 1e-10;
    double step_tol = 1e-12;
    int max_iterations = 200;
    double damping = 1.0;  // initial step fraction; halved while the residual fails to decrease

    void validate() const;
};

// Standard normal kernels.
double std_normal_pdf(double x);
double std_normal_cdf(double x);
double std_normal_sf(double x);       // 1 - Phi(x), accurate in the upper tail
double std_normal_log_sf(double x);   // log(1 - Phi(x)) without underflow
double std_normal_log_cdf(double x);
double std_normal_quantile(double p);

// phi(x) / (1 - Phi(x)); finite for all finite x, tends to x as x -> inf.
double inverse_mills(double x);

// Adaptive Gauss-Kronrod (21-point) with global subdivision of the worst interval.
double integrate_1d(const std::function<double(double)>& f, double lo, double hi,
                    const QuadratureSpec& spec = {});

// Integral over [lo,hi]^2, split along u = v so each triangle is smooth.
double integrate_2d_square(const std::function<double(double, double)>& k, double lo, double hi,
                           const QuadratureSpec& spec = {});

// Root of f(x) = target for a strictly monotone f. The bracket is expanded
// geometrically until it straddles the target.
double solve_monotone_scalar(const std::function<double(double)>& f, double target,
                             std::pair<double, double> bracket, const SolverSpec& spec = {});

struct Solve2dResult {
    Vec2 root;
    Vec2 residual;
    double residual_norm = 0.0;
    int iterations = 0;
};

using Map2 = std::function<Vec2(const Vec2&)>;

// Damped Newton with a central-difference Jacobian.
Solve2dResult solve_2d(const Map2& F, Vec2 start, const SolverSpec& spec = {});

Matrix2 numerical_jacobian(const Map2& F, const Vec2& x);

}  // namespace lnsev
