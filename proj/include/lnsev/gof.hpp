#pragma once

#include "lnsev/fit.hpp"
#include "lnsev/payment_model.hpp"

namespace lnsev {

struct KsResult {
    double statistic = 0.0;
    double critical_value = 0.0;
    int decision = 0;  // 1 rejects the fitted model
    double level = 0.05;
};

// Limiting Kolmogorov quantile: P(sup |B| <= x) = 1 - level.
double kolmogorov_quantile(double level);

// Sup-distance between the empirical cdf and the fitted payment cdf, taken
// on both sides of every jump of either function. The critical value ignores
// parameter estimation and censoring.
KsResult ks_statistic(const PaymentSample& sample, const FitResult& fitted, double level = 0.05);
KsResult ks_statistic(const PaymentSample& sample, const PaymentDistribution& fitted, double level = 0.05);

}  // namespace lnsev
