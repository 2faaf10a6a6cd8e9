#include "lnsev/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "lnsev/are.hpp"
#include "lnsev/errors.hpp"
#include "lnsev/fit.hpp"
#include "lnsev/mle.hpp"
#include "lnsev/mtm.hpp"

namespace lnsev {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::string trim_ws(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& v, std::size_t line) {
    const std::string s = trim_ws(v);
    if (s == "inf" || s == "infinity" || s == "none") return kInf;
    try {
        std::size_t pos = 0;
        const double x = std::stod(s, &pos);
        if (pos == s.size()) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError("expected a number, got '" + s + "'", line);
}

std::uint64_t parse_uint(const std::string& v, std::size_t line) {
    const std::string s = trim_ws(v);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("expected a non-negative integer, got '" + s + "'", line);
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw ConfigError("integer out of range: '" + s + "'", line);
    }
}

std::vector<std::string> split_words(const std::string& s, char extra = ' ') {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ' ' || ch == '\t' || ch == extra) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string fmt(double x, int decimals) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    return buf;
}

struct Slot {
    double theta = 0.0;
    double sigma = 0.0;
    bool ok = false;
};

// Population trims are checked once; per-sample window checks are skipped.
class EstimatorRunner {
public:
    EstimatorRunner(const StudyConfig& cfg, const EstimatorSpec& e) : kind_(cfg.variant), spec_(e) {
        if (!e.is_mle() && kind_ == PaymentKind::PerLoss) complete_ = coeff_c_complete(*e.trim);
    }

    Slot operator()(const PaymentSample& s) const {
        Slot out;
        try {
            FitResult f;
            if (spec_.is_mle()) {
                f = fit_mle(s);
            } else if (kind_ == PaymentKind::PerPayment) {
                f = fit_mtm_y(s, *spec_.trim, {}, {}, MtmOptions{WindowCheck::Skip, false});
            } else {
                f = fit_mtm_z(s, *spec_.trim, *complete_, MtmOptions{WindowCheck::Skip, false});
            }
            if (f.converged && std::isfinite(f.theta_hat) && std::isfinite(f.sigma_hat) && f.sigma_hat > 0.0) {
                out.theta = f.theta_hat;
                out.sigma = f.sigma_hat;
                out.ok = true;
            }
        } catch (const Error&) {
        }
        return out;
    }

private:
    PaymentKind kind_;
    EstimatorSpec spec_;
    std::optional<CoefficientSet> complete_;
};

}  // namespace

std::string EstimatorSpec::label() const {
    if (is_mle()) return "MLE";
    return "MTM(" + trim->a.str() + "," + trim->b.str() + ")";
}

void StudyConfig::validate() const {
    model.validate();
    policy.validate(model.w0);
    if (replications < 1) throw ConfigError("replications must be at least 1");
    if (sample_sizes.empty()) throw ConfigError("at least one sample size is required");
    for (auto n : sample_sizes)
        if (n < 10) throw ConfigError("sample sizes must be at least 10");
    if (estimators.empty()) throw ConfigError("at least one estimator is required");
    if (threads < 1) throw ConfigError("threads must be at least 1");
}

unsigned default_thread_count() {
    if (const char* env = std::getenv("LNSEV_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return 1;
}

StudyConfig parse_study_config(std::istream& in) {
    StudyConfig cfg;
    cfg.threads = default_thread_count();
    cfg.estimators.clear();
    bool sizes_set = false;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string text = trim_ws(raw);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
        const std::string key = trim_ws(text.substr(0, eq));
        const std::string val = trim_ws(text.substr(eq + 1));
        if (val.empty()) throw ConfigError("missing value for '" + key + "'", line);
        try {
            if (key == "variant") {
                if (val == "y" || val == "Y") cfg.variant = PaymentKind::PerPayment;
                else if (val == "z" || val == "Z") cfg.variant = PaymentKind::PerLoss;
                else throw ConfigError("variant must be y or z", line);
            } else if (key == "w0") {
                cfg.model.w0 = parse_real(val, line);
            } else if (key == "theta") {
                cfg.model.theta = parse_real(val, line);
            } else if (key == "sigma") {
                cfg.model.sigma = parse_real(val, line);
            } else if (key == "deductible") {
                cfg.policy.d = parse_real(val, line);
            } else if (key == "limit") {
                cfg.policy.u = parse_real(val, line);
            } else if (key == "coinsurance") {
                cfg.policy.c = parse_real(val, line);
            } else if (key == "sample_sizes") {
                if (!sizes_set) cfg.sample_sizes.clear();
                sizes_set = true;
                for (const auto& w : split_words(val, ',')) cfg.sample_sizes.push_back(parse_uint(w, line));
            } else if (key == "replications") {
                cfg.replications = parse_uint(val, line);
            } else if (key == "seed") {
                cfg.seed = parse_uint(val, line);
            } else if (key == "threads") {
                cfg.threads = static_cast<unsigned>(parse_uint(val, line));
            } else if (key == "estimator") {
                const auto words = split_words(val);
                if (words.size() == 1 && (words[0] == "mle" || words[0] == "MLE")) {
                    cfg.estimators.push_back({});
                } else if (words.size() == 3 && (words[0] == "mtm" || words[0] == "MTM")) {
                    cfg.estimators.push_back({TrimSpec(Proportion::parse(words[1]), Proportion::parse(words[2]))});
                } else {
                    throw ConfigError("estimator must be 'mle' or 'mtm <a> <b>'", line);
                }
            } else {
                throw ConfigError("unknown key '" + key + "'", line);
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(e.what(), line);
        }
    }
    try {
        cfg.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

StudyConfig load_study_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_study_config(in);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t n, std::uint64_t replication)
    : key_(mix64(mix64(seed) ^ mix64(n * kGolden + 1) ^ mix64(replication + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t CounterRng::next() { return mix64(key_ + (++counter_) * kGolden); }

double CounterRng::uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

PaymentSample generate_sample(const GroundUpLognormal& model, const PolicySpec& policy, PaymentKind variant,
                              std::size_t n, CounterRng& rng) {
    const PaymentDistribution dist(variant, model, policy);
    PaymentSample s;
    s.kind = variant;
    s.policy = policy;
    s.w0 = model.w0;
    s.thresholds = dist.thresholds();
    const double cR = dist.censoring_point();
    s.values.reserve(n);
    // Classify by the uniform so the counts agree with the atoms of the quantile function.
    const double hi = variant == PaymentKind::PerPayment ? dist.s_star() : dist.fx_T();
    const double lo = variant == PaymentKind::PerPayment ? 0.0 : dist.fx_t();
    for (std::size_t i = 0; i < n; ++i) {
        const double p = rng.uniform();
        if (s.thresholds.censored() && p >= hi) {
            ++s.n2;
            s.values.push_back(cR);
        } else if (p <= lo) {
            ++s.n0;
            s.values.push_back(0.0);
        } else {
            ++s.n1;
            s.values.push_back(dist.qf(p));
        }
    }
    std::sort(s.values.begin(), s.values.end());
    return s;
}

const EstimatorRow* StudyResult::find(const EstimatorSpec& e) const {
    for (const auto& r : rows) {
        if (r.estimator.is_mle() != e.is_mle()) continue;
        if (e.is_mle()) return &r;
        if (r.estimator.trim->a == e.trim->a && r.estimator.trim->b == e.trim->b) return &r;
    }
    return nullptr;
}

StudyResult run_study(const StudyConfig& config) {
    config.validate();
    const std::size_t reps = config.replications;
    const std::size_t ne = config.estimators.size();
    const std::size_t nn = config.sample_sizes.size();

    StudyResult result;
    result.config = config;
    result.rows.resize(ne);

    std::vector<EstimatorRunner> runners;
    std::vector<bool> valid(ne, true);
    const Matrix2 s_mle = cov_mle_at(config.variant, config.model, config.policy);
    for (std::size_t e = 0; e < ne; ++e) {
        EstimatorRow& row = result.rows[e];
        row.estimator = config.estimators[e];
        row.cells.resize(nn);
        if (row.estimator.is_mle()) {
            row.are_limit = 1.0;
        } else {
            const TrimSpec& trim = *row.estimator.trim;
            const TrimValidation v = validate_trim_population(config.variant, config.model, config.policy, trim);
            if (!v.pass()) {
                valid[e] = false;
                row.are_error = "invalid trimming";
                for (const auto& r : v.reasons) row.are_error += "; " + r;
                result.warnings.push_back(row.estimator.label() + ": " + row.are_error);
            } else {
                try {
                    row.are_limit = are_pair(s_mle, cov_mtm(config.variant, config.model, config.policy, trim));
                } catch (const Error& ex) {
                    row.are_error = ex.what();
                }
            }
        }
        runners.emplace_back(config, row.estimator);
    }

    // slots[(ni * reps + r) * ne + e]; filled in any order, reduced serially.
    std::vector<Slot> slots(nn * reps * ne);
    const unsigned nthreads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(reps)));
    auto work = [&](unsigned tid) {
        for (std::size_t ni = 0; ni < nn; ++ni) {
            const std::size_t n = config.sample_sizes[ni];
            for (std::size_t r = tid; r < reps; r += nthreads) {
                CounterRng rng(config.seed, n, r);
                const PaymentSample s = generate_sample(config.model, config.policy, config.variant, n, rng);
                for (std::size_t e = 0; e < ne; ++e)
                    if (valid[e]) slots[(ni * reps + r) * ne + e] = runners[e](s);
            }
        }
    };
    if (nthreads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < nthreads; ++k) pool.emplace_back(work, k);
        for (auto& th : pool) th.join();
    }

    const double theta0 = config.model.theta, sigma0 = config.model.sigma;
    for (std::size_t e = 0; e < ne; ++e) {
        EstimatorRow& row = result.rows[e];
        for (std::size_t ni = 0; ni < nn; ++ni) {
            CellStats& cell = row.cells[ni];
            cell.attempted = valid[e] ? reps : 0;
            if (!valid[e]) continue;
            long double st = 0, ss = 0, st2 = 0, ss2 = 0, m11 = 0, m12 = 0, m22 = 0;
            std::size_t used = 0;
            for (std::size_t r = 0; r < reps; ++r) {
                const Slot& sl = slots[(ni * reps + r) * ne + e];
                if (!sl.ok) continue;
                ++used;
                const long double rt = sl.theta / theta0, rs = sl.sigma / sigma0;
                st += rt;
                ss += rs;
                st2 += rt * rt;
                ss2 += rs * rs;
                const long double dt = sl.theta - theta0, ds = sl.sigma - sigma0;
                m11 += dt * dt;
                m12 += dt * ds;
                m22 += ds * ds;
            }
            cell.used = used;
            cell.exclusion_rate = 1.0 - static_cast<double>(used) / static_cast<double>(reps);
            cell.warning = cell.exclusion_rate > 0.05;
            if (cell.warning) {
                result.warnings.push_back(row.estimator.label() + " at n=" + std::to_string(config.sample_sizes[ni]) +
                                          ": exclusion rate " + fmt(cell.exclusion_rate, 4) + " exceeds 0.05");
            }
            if (used == 0) continue;
            const long double m = static_cast<long double>(used);
            cell.mean_theta_ratio = static_cast<double>(st / m);
            cell.mean_sigma_ratio = static_cast<double>(ss / m);
            if (used >= 2) {
                const long double vt = std::max<long double>(0, (st2 - st * st / m) / (m - 1));
                const long double vs = std::max<long double>(0, (ss2 - ss * ss / m) / (m - 1));
                cell.se_theta_ratio = static_cast<double>(std::sqrt(vt / m));
                cell.se_sigma_ratio = static_cast<double>(std::sqrt(vs / m));
            }
            cell.mse = Matrix2::symmetric(static_cast<double>(m11 / m), static_cast<double>(m12 / m),
                                          static_cast<double>(m22 / m));
            if (used >= 2) {
                try {
                    cell.finite_re = finite_re_from_mse(cell.mse, s_mle, config.sample_sizes[ni]);
                } catch (const Error&) {
                }
            }
        }
    }
    return result;
}

void StudyResult::write_csv(std::ostream& os, int decimals) const {
    os << "quantity,estimator,a,b";
    for (auto n : config.sample_sizes) os << ",n=" << n;
    os << ",n=inf\n";
    auto line = [&](const char* q, const EstimatorRow& row, auto value, const std::string& limit) {
        os << q << ',' << (row.estimator.is_mle() ? "MLE" : "MTM") << ',';
        if (!row.estimator.is_mle()) os << row.estimator.trim->a.str() << ',' << row.estimator.trim->b.str();
        else os << ',';
        for (const CellStats& c : row.cells) {
            os << ',';
            const std::optional<double> v = value(c);
            os << (v ? fmt(*v, decimals) : "NA");
        }
        os << ',' << limit << '\n';
    };
    auto ok = [](const CellStats& c) { return c.used > 0; };
    for (const auto& row : rows) {
        const bool usable = row.are_error.empty() || row.are_limit;
        const std::string one = usable ? fmt(1.0, decimals) : "NA";
        const std::string zero = usable ? fmt(0.0, decimals) : "NA";
        line("theta_ratio", row, [&](const CellStats& c) { return ok(c) ? std::optional(c.mean_theta_ratio) : std::nullopt; }, one);
        line("theta_ratio_se", row, [&](const CellStats& c) { return ok(c) ? std::optional(c.se_theta_ratio) : std::nullopt; }, zero);
        line("sigma_ratio", row, [&](const CellStats& c) { return ok(c) ? std::optional(c.mean_sigma_ratio) : std::nullopt; }, one);
        line("sigma_ratio_se", row, [&](const CellStats& c) { return ok(c) ? std::optional(c.se_sigma_ratio) : std::nullopt; }, zero);
    }
    for (const auto& row : rows) {
        const std::string limit = row.are_limit ? fmt(*row.are_limit, decimals) : "NA";
        line("re", row, [](const CellStats& c) { return c.finite_re; }, limit);
    }
    for (const auto& row : rows) {
        line("exclusion_rate", row,
             [](const CellStats& c) { return c.attempted ? std::optional(c.exclusion_rate) : std::nullopt; }, "");
    }
}

}  // namespace lnsev
