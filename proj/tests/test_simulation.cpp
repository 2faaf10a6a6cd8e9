#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>

#include "lnsev/errors.hpp"
#include "lnsev/simulation.hpp"

using namespace lnsev;
using Catch::Approx;

namespace {
const GroundUpLognormal kModel{1.0, 5.0, 3.0};
const PolicySpec kPolicy{1.0, 4.0, 2e5};
}  // namespace

TEST_CASE("counter-based generator is reproducible and uniform") {
    CounterRng a(1, 100, 5), b(1, 100, 5), c(1, 100, 6);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        seen.insert(x);
        seen.insert(c.next());
    }
    CHECK(seen.size() == 2000);
    CounterRng u(2, 1, 0);
    double sum = 0.0, lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double x = u.uniform();
        sum += x;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    CHECK(sum / 100000 == Approx(0.5).margin(0.005));
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
}

TEST_CASE("per-loss samples have the zero atom and censoring masses") {
    const std::size_t n = 1000000;
    CounterRng rng(3, n, 0);
    const PaymentSample s = generate_sample(kModel, kPolicy, PaymentKind::PerLoss, n, rng);
    const PaymentDistribution Z = dist_z(kModel, kPolicy);
    CHECK(static_cast<double>(s.n0) / n == Approx(0.097).margin(0.001));
    CHECK(static_cast<double>(s.n0) / n == Approx(Z.fx_t()).margin(0.0015));
    CHECK(static_cast<double>(s.n2) / n == Approx(1.0 - Z.fx_T()).margin(0.0015));
    CHECK(s.n0 + s.n1 + s.n2 == n);
    CHECK(std::is_sorted(s.values.begin(), s.values.end()));
}

TEST_CASE("per-payment samples have no zeros") {
    CounterRng rng(4, 5000, 0);
    const PaymentSample s = generate_sample(kModel, kPolicy, PaymentKind::PerPayment, 5000, rng);
    CHECK(s.n0 == 0);
    CHECK(s.values.front() > 0.0);
    const double share = static_cast<double>(s.n2) / 5000;
    CHECK(share == Approx(1.0 - dist_y(kModel, kPolicy).s_star()).margin(0.01));
}

TEST_CASE("study configuration parsing") {
    std::istringstream in(R"(# comment
variant = z
w0 = 1
theta = 5
sigma = 3
deductible = 4
limit = 24000
coinsurance = 1
sample_sizes = 100, 250 500
replications = 50
seed = 99
estimator = mle
estimator = mtm 0.10 0.15
)");
    const StudyConfig c = parse_study_config(in);
    CHECK(c.variant == PaymentKind::PerLoss);
    CHECK(c.policy.u == 24000.0);
    CHECK(c.sample_sizes == std::vector<std::size_t>{100, 250, 500});
    CHECK(c.replications == 50);
    CHECK(c.seed == 99);
    REQUIRE(c.estimators.size() == 2);
    CHECK(c.estimators[0].is_mle());
    CHECK(c.estimators[1].label() == "MTM(0.1,0.15)");

    std::istringstream bad("variant = y\nsigma = -1\nestimator = mle\n");
    CHECK_THROWS_AS(parse_study_config(bad), ConfigError);
    std::istringstream typo("variant = y\nbogus = 3\n");
    try {
        parse_study_config(typo);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("small study: shape, determinism and sane summaries") {
    StudyConfig cfg;
    cfg.model = kModel;
    cfg.policy = kPolicy;
    cfg.variant = PaymentKind::PerLoss;
    cfg.sample_sizes = {200, 400};
    cfg.replications = 60;
    cfg.estimators = {{}, {TrimSpec(0.10, 0.10)}, {TrimSpec(0.02, 0.10)}};
    cfg.threads = 1;
    const StudyResult r = run_study(cfg);
    REQUIRE(r.rows.size() == 3);
    const EstimatorRow& mle = r.rows[0];
    CHECK(mle.are_limit.has_value());
    CHECK(*mle.are_limit == Approx(1.0));
    for (const CellStats& c : mle.cells) {
        CHECK(c.used == 60);
        CHECK(c.mean_theta_ratio == Approx(1.0).margin(0.05));
        CHECK(c.mean_sigma_ratio == Approx(1.0).margin(0.05));
        REQUIRE(c.finite_re.has_value());
        CHECK(*c.finite_re > 0.5);
    }
    CHECK(*r.rows[1].are_limit == Approx(0.844).margin(0.002));
    // trimming below F(t) is infeasible for the design
    CHECK_FALSE(r.rows[2].are_limit.has_value());
    CHECK_FALSE(r.warnings.empty());

    std::ostringstream a, b;
    r.write_csv(a);
    cfg.threads = 2;
    run_study(cfg).write_csv(b);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("quantity,estimator,a,b,n=200,n=400,n=inf", 0) == 0);
}
