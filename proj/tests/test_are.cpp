#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "lnsev/are.hpp"
#include "lnsev/errors.hpp"
#include "lnsev/mle.hpp"
#include "lnsev/mtm.hpp"

using namespace lnsev;
using Catch::Approx;

namespace {
const GroundUpLognormal kModel{1.0, 5.0, 3.0};
const PolicySpec kPolicy{1.0, 4.0, 2e5};
}  // namespace

TEST_CASE("ARE of a scaled covariance") {
    const Matrix2 S = Matrix2::symmetric(2.0, 0.3, 1.5);
    CHECK(are_pair(S, S * 4.0) == Approx(0.25));
    CHECK(are_pair(S, S) == Approx(1.0));
    CHECK_THROWS(are_pair(S, Matrix2::symmetric(1.0, 1.0, 1.0)));
}

TEST_CASE("benchmark per-payment ARE cells") {
    AreRequest req;
    req.model = kModel;
    req.policy = kPolicy;
    req.grid = {TrimSpec(0.0, 0.05), TrimSpec(0.05, 0.05), TrimSpec(0.25, 0.25)};
    const AreTable t = are_table(req);
    CHECK(*t.at(0.0, 0.05) == Approx(0.904).margin(0.002));
    CHECK(*t.at(0.05, 0.05) == Approx(0.904).margin(0.002));
    CHECK(*t.at(0.25, 0.25) == Approx(0.556).margin(0.002));
}

TEST_CASE("per-payment ARE decreases in b and with heavy left trimming") {
    AreRequest req;
    req.model = kModel;
    req.policy = kPolicy;
    const std::vector<double> bs{0.01, 0.05, 0.10, 0.15, 0.25};
    for (double a : {0.05, 0.25})
        for (double b : bs) req.grid.emplace_back(a, b);
    const AreTable t = are_table(req);
    for (double a : {0.05, 0.25}) {
        for (std::size_t j = 1; j < bs.size(); ++j) CHECK(*t.at(a, bs[j]) < *t.at(a, bs[j - 1]));
    }
    for (double b : bs) {
        CHECK(*t.at(0.05, b) >= *t.at(0.25, b));
        CHECK(*t.at(0.05, b) > 0.0);
        CHECK(*t.at(0.05, b) <= 1.001);
    }
}

TEST_CASE("per-loss ARE depends on the limit only through the MLE") {
    const TrimSpec trim(0.10, 0.10);
    const Matrix2 m1 = cov_mtm(PaymentKind::PerLoss, kModel, kPolicy, trim);
    const Matrix2 m2 = cov_mtm(PaymentKind::PerLoss, kModel, {1.0, 4.0, 2.4e4}, trim);
    CHECK(m1.a11 == Approx(m2.a11));
    CHECK(m1.a22 == Approx(m2.a22));
    const double are = are_pair(cov_mle_at(PaymentKind::PerLoss, kModel, kPolicy), m1);
    CHECK(are == Approx(0.844).margin(0.002));
}

TEST_CASE("infeasible cells come back as NA with a reason") {
    AreRequest req;
    req.model = kModel;
    req.policy = kPolicy;
    req.variant = PaymentKind::PerLoss;
    req.grid = {TrimSpec(0.0, 0.10), TrimSpec(0.10, 0.10)};
    const AreTable t = are_table(req);
    CHECK_FALSE(t.at(0.0, 0.10).has_value());
    CHECK(t.at(0.10, 0.10).has_value());
    std::ostringstream os;
    t.write_csv(os);
    CHECK(os.str().find("NA") != std::string::npos);
}

TEST_CASE("finite-sample relative efficiency") {
    const Matrix2 s_mle = Matrix2::symmetric(4.0, 0.0, 1.0);
    // MSE equal to S_mle / n gives RE 1
    CHECK(finite_re_from_mse(s_mle * (1.0 / 100.0), s_mle, 100) == Approx(1.0));
    const std::vector<Estimate> est{{1.1, 2.0}, {0.9, 2.0}, {1.0, 2.1}, {1.0, 1.9}};
    // MSE = diag(0.005, 0.005); n MSE = diag(0.5, 0.5); sqrt(4 / 0.25) = 4
    CHECK(finite_re(est, {1.0, 2.0}, s_mle, 100) == Approx(4.0));
    CHECK(std::isinf(finite_re({{1.0, 2.0}, {1.0, 2.0}}, {1.0, 2.0}, s_mle, 10)));
    CHECK_THROWS(finite_re({{1.0, 2.0}}, {1.0, 2.0}, s_mle, 10));
}
