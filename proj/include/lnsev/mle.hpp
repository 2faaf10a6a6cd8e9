#pragma once

#include <cstddef>

#include "lnsev/fit.hpp"
#include "lnsev/matrix2.hpp"
#include "lnsev/numerics.hpp"
#include "lnsev/payment_model.hpp"

namespace lnsev {

// First two raw moments of the interior (uncensored, nonzero) normal-scale values.
struct MomentSummary {
    double mu1 = 0.0;
    double mu2 = 0.0;
    std::size_t n = 0;
    std::size_t n0 = 0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

MomentSummary summarize(const PaymentSample& sample);

// Expected information per observation for (gamma, sigma), with its building blocks.
struct FisherComponents {
    double lambda = 1.0;
    double r1 = 0.0, r2 = 0.0, r3 = 0.0;  // psi_1..psi_3 for per-loss
    Matrix2 info;
};

double loglik_y(double gamma, double sigma, const PaymentSample& sample);
double loglik_z(double gamma, double sigma, const PaymentSample& sample);
double loglik(PaymentKind kind, double gamma, double sigma, const MomentSummary& m, const NormalThresholds& th,
              double c);

// Estimating equations in residual form:
//   sigma (W1 - W2 - gamma) - mu1 / c
//   sigma^2 (1 - gamma (W1 - W2 - gamma) - W2 R / sigma) - mu2 / c^2
// with W1, W2 the count-weighted tail ratios of each payment type.
Vec2 mle_equations(PaymentKind kind, double gamma, double sigma, const MomentSummary& m, const NormalThresholds& th,
                   double c);

// Starting points as (gamma, sigma).
Vec2 mle_start_y(const MomentSummary& m, double c);
Vec2 mle_start_z(const MomentSummary& m, const NormalThresholds& th, double c);

FitResult fit_mle_y(const PaymentSample& sample, const SolverSpec& solver = {});
FitResult fit_mle_z(const PaymentSample& sample, const SolverSpec& solver = {});

// Variants working from sufficient statistics only.
FitResult fit_mle_y(const MomentSummary& m, const NormalThresholds& th, double c, const SolverSpec& solver = {});
FitResult fit_mle_z(const MomentSummary& m, const NormalThresholds& th, double c, const SolverSpec& solver = {});
FitResult fit_mle(const PaymentSample& sample, const SolverSpec& solver = {});

FisherComponents fisher_y(double gamma, double sigma, const NormalThresholds& th);
FisherComponents fisher_z(double gamma, double sigma, const NormalThresholds& th);
Matrix2 cov_mle_y(double gamma, double sigma, const NormalThresholds& th);
Matrix2 cov_mle_z(double gamma, double sigma, const NormalThresholds& th);
Matrix2 cov_mle(PaymentKind kind, double gamma, double sigma, const NormalThresholds& th);

// G(gamma) = (1 / (W - gamma)) (1 / (W - gamma) - gamma), W = phi / Phi-bar.
// Increasing from 1 to 2.
double g_function(double gamma);

// Closed-form maximum when no observation is censored (n2 = 0).
FitResult fit_left_truncated(const PaymentSample& sample);
FitResult fit_left_truncated(PaymentKind kind, const MomentSummary& m, const NormalThresholds& th, double c);

// Covariance when T is infinite, from the simplified components.
Matrix2 cov_left_truncated(double gamma, double sigma, PaymentKind kind);

}  // namespace lnsev
