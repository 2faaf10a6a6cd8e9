#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lnsev/matrix2.hpp"
#include "lnsev/numerics.hpp"
#include "lnsev/payment_model.hpp"
#include "lnsev/trim.hpp"

namespace lnsev {

struct AreRequest {
    GroundUpLognormal model;
    PolicySpec policy;
    PaymentKind variant = PaymentKind::PerPayment;
    std::vector<TrimSpec> grid;
    QuadratureSpec quad;
};

struct AreCell {
    TrimSpec trim;
    std::optional<double> value;
    std::string error;  // set when value is empty
};

struct AreTable {
    PaymentKind variant = PaymentKind::PerPayment;
    std::vector<AreCell> cells;

    // Rows keyed by a, columns by b, in first-appearance order. Failed cells print NA,
    // cells not in the grid stay empty.
    void write_csv(std::ostream& os, int decimals = 3) const;
    std::optional<double> at(double a, double b) const;
};

// sqrt(det S_mle / det S_alt)
double are_pair(const Matrix2& s_mle, const Matrix2& s_alt);

// MTM covariance for a variant at given parameters.
Matrix2 cov_mtm(PaymentKind variant, const GroundUpLognormal& model, const PolicySpec& policy, const TrimSpec& trim,
                const QuadratureSpec& quad = {});
Matrix2 cov_mle_at(PaymentKind variant, const GroundUpLognormal& model, const PolicySpec& policy);

AreTable are_table(const AreRequest& req);

struct Estimate {
    double theta;
    double sigma;
};

// sqrt(det S_mle) / sqrt(det(n * MSE)), MSE centred at the truth. Returns +inf
// when every estimate equals the truth.
double finite_re(const std::vector<Estimate>& estimates, const Estimate& truth, const Matrix2& s_mle, std::size_t n);
double finite_re_from_mse(const Matrix2& mse, const Matrix2& s_mle, std::size_t n);

}  // namespace lnsev
