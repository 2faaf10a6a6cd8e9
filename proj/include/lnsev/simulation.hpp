#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lnsev/matrix2.hpp"
#include "lnsev/payment_model.hpp"
#include "lnsev/trim.hpp"

namespace lnsev {

// MLE when trim is empty, otherwise MTM with the given proportions.
struct EstimatorSpec {
    std::optional<TrimSpec> trim;

    bool is_mle() const { return !trim.has_value(); }
    std::string label() const;
};

struct StudyConfig {
    GroundUpLognormal model{1.0, 5.0, 3.0};
    PolicySpec policy{1.0, 4.0, kInf};
    PaymentKind variant = PaymentKind::PerPayment;
    std::vector<std::size_t> sample_sizes{100, 250, 500, 1000};
    std::size_t replications = 1000;
    std::vector<EstimatorSpec> estimators;
    std::uint64_t seed = 20240101;
    unsigned threads = 1;

    void validate() const;
};

// key = value lines; '#' starts a comment. Keys: variant, w0, theta, sigma,
// deductible, limit, coinsurance, sample_sizes, replications, seed, threads,
// and repeated "estimator = mle" / "estimator = mtm <a> <b>".
StudyConfig parse_study_config(std::istream& in);
StudyConfig load_study_config(const std::string& path);

// LNSEV_THREADS when set to a positive integer, otherwise 1.
unsigned default_thread_count();

// Counter-based stream: output k is a SplitMix64 finalizer applied to
// key + k * golden, where the key mixes seed, sample size and replication.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t n, std::uint64_t replication);

    std::uint64_t next();
    double uniform();  // in (0, 1)

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

PaymentSample generate_sample(const GroundUpLognormal& model, const PolicySpec& policy, PaymentKind variant,
                              std::size_t n, CounterRng& rng);

struct CellStats {
    std::size_t attempted = 0;
    std::size_t used = 0;
    double mean_theta_ratio = 0.0;
    double mean_sigma_ratio = 0.0;
    double se_theta_ratio = 0.0;
    double se_sigma_ratio = 0.0;
    Matrix2 mse;
    std::optional<double> finite_re;
    double exclusion_rate = 0.0;
    bool warning = false;  // exclusion rate above 5%
};

struct EstimatorRow {
    EstimatorSpec estimator;
    std::vector<CellStats> cells;  // parallel to sample_sizes
    std::optional<double> are_limit;
    std::string are_error;
};

struct StudyResult {
    StudyConfig config;
    std::vector<EstimatorRow> rows;
    std::vector<std::string> warnings;

    // One line per (quantity, estimator), one column per n plus n=inf.
    void write_csv(std::ostream& os, int decimals = 4) const;
    const EstimatorRow* find(const EstimatorSpec& e) const;
};

StudyResult run_study(const StudyConfig& config);

}  // namespace lnsev
