#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lnsev/are.hpp"
#include "lnsev/errors.hpp"
#include "lnsev/mle.hpp"
#include "lnsev/mtm.hpp"
#include "lnsev/simulation.hpp"
#include "lnsev/trim.hpp"

namespace lnsev::cli {

namespace {

std::string f4(double x) { return format_fixed(x, 4); }

std::string opt4(const std::optional<double>& x) { return x ? f4(*x) : ""; }

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string limit_str(double u) { return std::isinf(u) ? "inf" : format_fixed(u, 6); }

// Coefficient integrals need b >= 1e-6; a zero b is evaluated at the guard.
TrimSpec coefficient_trim(const TrimSpec& trim) {
    if (trim.upper() >= kEndpointGuard) return trim;
    return TrimSpec(trim.a, Proportion(1, 1'000'000));
}

void fill_parametric(ReportRow& row, const PaymentSample& s) {
    const PaymentDistribution d(s.kind, row.fit.model(s.w0), s.policy);
    if (s.kind == PaymentKind::PerPayment) {
        row.s_star = d.s_star();
    } else {
        row.fx_t = d.fx_t();
        row.fx_T = d.fx_T();
    }
}

FitResult run_mtm(const std::string& method, const PaymentSample& s, const TrimSpec& trim) {
    const MtmOptions opts{WindowCheck::Skip, true};
    if (s.kind == PaymentKind::PerLoss) {
        if (method == "mtm-plugin") throw DomainError("the plug-in MTM is defined for per-payment data only");
        return fit_mtm_z(s, trim, QuadratureSpec{}, opts);
    }
    if (method == "mtm-plugin") return fit_mtm_y_plugin(s, trim, {}, opts);
    return fit_mtm_y(s, trim, {}, {}, opts);
}

std::optional<double> are_at_mle(const FitResult& mle, const PaymentSample& s, const TrimSpec& trim) {
    try {
        const Matrix2 alt = s.kind == PaymentKind::PerPayment
                                ? cov_mtm_y(mle.theta_hat, mle.sigma_hat, s.thresholds, coefficient_trim(trim))
                                : cov_mtm_z(mle.sigma_hat, trim);
        return are_pair(mle.cov, alt);
    } catch (const Error&) {
        return std::nullopt;
    }
}

void write_out(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& fn) {
    if (path.empty()) {
        fn(fallback);
        return;
    }
    std::ofstream f(path);
    if (!f) throw DataError("cannot open output file '" + path + "'");
    fn(f);
}

nlohmann::json interval_json(const Interval& i) { return nlohmann::json::array({i.lo, i.hi}); }

std::pair<double, double> parse_range(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw DomainError("range must look like lo:hi");
    const double lo = std::stod(s.substr(0, colon));
    const double hi = std::stod(s.substr(colon + 1));
    if (!(hi >= lo)) throw DomainError("range must satisfy lo <= hi");
    return {lo, hi};
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

void add_source_options(CLI::App* cmd, SampleSource& src, std::string& variant, std::string& limit) {
    cmd->add_option("--input", src.input, "CSV file, one amount per record")->required();
    cmd->add_option("--column", src.column, "named column (requires a header row)");
    cmd->add_option("--deductible", src.deductible, "deductible d")->required();
    cmd->add_option("--limit", limit, "policy limit u, or inf");
    cmd->add_option("--coinsurance", src.coinsurance, "coinsurance rate c");
    cmd->add_option("--w0", src.w0, "ground-up location w0");
    cmd->add_option("--variant", variant, "y (per payment) or z (per loss)")->check(CLI::IsMember({"y", "z", "Y", "Z"}));
    cmd->add_flag("--ground-up", src.ground_up, "input holds ground-up losses; apply the policy first");
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const ConfigError*>(&e)) return kDataFailure;
    if (dynamic_cast<const ValidationError*>(&e)) return kValidationFailure;
    if (dynamic_cast<const ConvergenceError*>(&e) || dynamic_cast<const NoSolutionError*>(&e) ||
        dynamic_cast<const EstimationError*>(&e) || dynamic_cast<const SingularityError*>(&e))
        return kConvergenceFailure;
    return kOther;
}

InputSummary summarize_input(const PaymentSample& s) {
    InputSummary out;
    out.variant = s.kind;
    out.t = s.thresholds.t;
    out.T = s.thresholds.T;
    out.R = s.thresholds.R;
    out.n0 = s.n0;
    out.n1 = s.n1;
    out.n2 = s.n2;
    out.n = s.n();
    return out;
}

RunReport build_fit_report(const FitRequest& req) {
    if (!(req.level > 0.0 && req.level < 1.0)) throw DomainError("--level must lie in (0, 1)");
    if (req.method != "mle" && req.method != "mtm" && req.method != "mtm-plugin")
        throw DomainError("--method must be mle, mtm or mtm-plugin");
    const SampleSource& src = req.source;
    RunReport report;
    report.config = {
        {"input", src.input},
        {"column", src.column},
        {"variant", std::string(to_string(src.variant))},
        {"ground_up", src.ground_up ? "true" : "false"},
        {"deductible", format_fixed(src.deductible, 6)},
        {"limit", limit_str(src.limit)},
        {"coinsurance", format_fixed(src.coinsurance, 6)},
        {"w0", format_fixed(src.w0, 6)},
        {"method", req.method},
        {"a", req.a},
        {"b", req.b},
        {"level", format_fixed(req.level, 4)},
        {"force", req.force ? "true" : "false"},
    };

    const PaymentSample sample = load_sample(src);
    report.input = summarize_input(sample);

    FitResult mle = fit_mle(sample);
    attach_intervals(mle, req.level);
    ReportRow mrow;
    mrow.estimator = "MLE";
    mrow.estimated = true;
    mrow.fit = mle;
    mrow.validation = "n/a";
    mrow.are = 1.0;
    mrow.ks = ks_statistic(sample, mle);
    fill_parametric(mrow, sample);
    report.rows.push_back(mrow);
    if (req.method == "mle") return report;

    const TrimSpec trim(Proportion::parse(req.a), Proportion::parse(req.b));
    ReportRow row;
    row.estimator = req.method == "mtm" ? "MTM" : "MTM-plugin";
    row.a = trim.a.str();
    row.b = trim.b.str();
    const auto validate = [&](const std::optional<FitResult>& f) {
        return sample.kind == PaymentKind::PerPayment ? validate_trim_y(sample, trim, f) : validate_trim_z(sample, trim, f);
    };
    TrimValidation v = validate(std::nullopt);
    if (v.empirical_pass || req.force) {
        row.fit = run_mtm(req.method, sample, trim);
        attach_intervals(row.fit, req.level);
        v = validate(row.fit);
        row.estimated = true;
    }
    row.validation = v.pass() ? "pass" : "fail";
    row.validation_reasons = v.reasons;
    if (!v.pass()) {
        report.validation_failed = true;
        if (req.force) {
            row.forced = true;
        } else {
            row.estimated = false;
        }
    }
    if (row.estimated) {
        fill_parametric(row, sample);
        row.are = are_at_mle(mle, sample, trim);
        row.ks = ks_statistic(sample, row.fit);
    }
    report.rows.push_back(row);
    return report;
}

void write_summary(std::ostream& os, const InputSummary& s, const std::string& format) {
    if (format == "json") {
        nlohmann::json j = {{"variant", to_string(s.variant)},
                            {"t", s.t},
                            {"T", std::isinf(s.T) ? nlohmann::json("inf") : nlohmann::json(s.T)},
                            {"R", std::isinf(s.R) ? nlohmann::json("inf") : nlohmann::json(s.R)},
                            {"n0", s.n0},
                            {"n1", s.n1},
                            {"n2", s.n2},
                            {"n", s.n}};
        os << j.dump(2) << '\n';
        return;
    }
    if (format == "csv") {
        os << "variant,t,T,R,n0,n1,n2,n\n"
           << to_string(s.variant) << ',' << f4(s.t) << ',' << f4(s.T) << ',' << f4(s.R) << ',' << s.n0 << ','
           << s.n1 << ',' << s.n2 << ',' << s.n << '\n';
        return;
    }
    os << "variant " << to_string(s.variant) << "\n"
       << "t  " << f4(s.t) << "\nT  " << f4(s.T) << "\nR  " << f4(s.R) << "\n"
       << "n0 " << s.n0 << "\nn1 " << s.n1 << "\nn2 " << s.n2 << "\nn  " << s.n << '\n';
}

void write_report_text(std::ostream& os, const RunReport& r) {
    os << r.version;
    if (!r.timestamp.empty()) os << "  " << r.timestamp;
    os << "\n\nconfiguration\n";
    for (const auto& [k, v] : r.config) os << "  " << k << " = " << v << '\n';
    os << "\ninput\n";
    std::ostringstream summary;
    write_summary(summary, r.input, "text");
    std::istringstream lines(summary.str());
    for (std::string l; std::getline(lines, l);) os << "  " << l << '\n';
    const bool y = r.input.variant == PaymentKind::PerPayment;
    os << '\n'
       << std::left << std::setw(11) << "estimator" << std::setw(10) << "a" << std::setw(10) << "b" << std::setw(9)
       << "theta" << std::setw(9) << "sigma" << std::setw(19) << "CI theta" << std::setw(19) << "CI sigma"
       << std::setw(y ? 9 : 18) << (y ? "s*" : "F(t),F(T)") << std::setw(11) << "validation" << std::setw(7)
       << "ARE" << std::setw(8) << "D" << "h\n";
    for (const auto& row : r.rows) {
        os << std::setw(11) << row.estimator << std::setw(10) << (row.a.empty() ? "-" : row.a) << std::setw(10)
           << (row.b.empty() ? "-" : row.b);
        if (!row.estimated) {
            os << "not estimated" << std::string(64, ' ') << std::setw(11) << row.validation << '\n';
            continue;
        }
        const FitResult& f = row.fit;
        const std::string cit = "(" + f4(f.ci_theta.lo) + "," + f4(f.ci_theta.hi) + ")";
        const std::string cis = "(" + f4(f.ci_sigma.lo) + "," + f4(f.ci_sigma.hi) + ")";
        const std::string cov = y ? opt4(row.s_star) : opt4(row.fx_t) + "," + opt4(row.fx_T);
        os << std::setw(9) << f4(f.theta_hat) << std::setw(9) << f4(f.sigma_hat) << std::setw(19) << cit
           << std::setw(19) << cis << std::setw(y ? 9 : 18) << cov
           << std::setw(11) << (row.forced ? row.validation + "*" : row.validation) << std::setw(7)
           << (row.are ? format_fixed(*row.are, 3) : "NA") << std::setw(8)
           << (row.ks ? f4(row.ks->statistic) : "NA") << (row.ks ? std::to_string(row.ks->decision) : "NA") << '\n';
    }
    for (const auto& row : r.rows) {
        for (const auto& reason : row.validation_reasons) os << "  " << row.estimator << ": " << reason << '\n';
        for (const auto& note : row.fit.notes)
            if (row.estimated) os << "  " << row.estimator << " note: " << note << '\n';
        if (row.forced) os << "  * printed under --force despite failed validation\n";
    }
    if (!r.rows.empty() && r.rows.front().ks)
        os << "\nKS critical value " << f4(r.rows.front().ks->critical_value)
           << " (asymptotic Kolmogorov, ignores estimation and censoring)\n";
}

void write_report_csv(std::ostream& os, const RunReport& r) {
    os << "# " << r.version << '\n';
    if (!r.timestamp.empty()) os << "# timestamp " << r.timestamp << '\n';
    for (const auto& [k, v] : r.config) os << "# " << k << " = " << v << '\n';
    const InputSummary& s = r.input;
    os << "# t=" << f4(s.t) << " T=" << f4(s.T) << " R=" << f4(s.R) << " n0=" << s.n0 << " n1=" << s.n1
       << " n2=" << s.n2 << " n=" << s.n << '\n';
    os << "estimator,a,b,theta,sigma,theta_lo,theta_hi,sigma_lo,sigma_hi,s_star,fx_t,fx_T,validation,are,ks_d,"
          "ks_critical,ks_h,forced\n";
    for (const auto& row : r.rows) {
        os << row.estimator << ',' << row.a << ',' << row.b << ',';
        if (row.estimated) {
            const FitResult& f = row.fit;
            os << f4(f.theta_hat) << ',' << f4(f.sigma_hat) << ',' << f4(f.ci_theta.lo) << ',' << f4(f.ci_theta.hi)
               << ',' << f4(f.ci_sigma.lo) << ',' << f4(f.ci_sigma.hi) << ',';
        } else {
            os << ",,,,,,";
        }
        os << opt4(row.s_star) << ',' << opt4(row.fx_t) << ',' << opt4(row.fx_T) << ',' << row.validation << ','
           << (row.are ? format_fixed(*row.are, 3) : "") << ',';
        if (row.ks)
            os << f4(row.ks->statistic) << ',' << f4(row.ks->critical_value) << ',' << row.ks->decision;
        else
            os << ",,";
        os << ',' << (row.forced ? "true" : "false") << '\n';
    }
}

void write_report_json(std::ostream& os, const RunReport& r) {
    using nlohmann::json;
    json j;
    j["version"] = r.version;
    if (!r.timestamp.empty()) j["timestamp"] = r.timestamp;
    json cfg = json::object();
    for (const auto& [k, v] : r.config) cfg[k] = v;
    j["configuration"] = cfg;
    std::ostringstream summary;
    write_summary(summary, r.input, "json");
    j["input"] = json::parse(summary.str());
    j["rows"] = json::array();
    for (const auto& row : r.rows) {
        json e = {{"estimator", row.estimator}, {"validation", row.validation}, {"forced", row.forced},
                  {"estimated", row.estimated}};
        if (!row.a.empty()) {
            e["a"] = row.a;
            e["b"] = row.b;
        }
        if (!row.validation_reasons.empty()) e["validation_reasons"] = row.validation_reasons;
        if (row.estimated) {
            const FitResult& f = row.fit;
            e["theta"] = f.theta_hat;
            e["sigma"] = f.sigma_hat;
            e["gamma"] = f.gamma_hat;
            e["level"] = f.level;
            e["ci_theta"] = interval_json(f.ci_theta);
            e["ci_sigma"] = interval_json(f.ci_sigma);
            e["method"] = to_string(f.method);
            e["residual_norm"] = f.residual_norm;
            e["iterations"] = f.iterations;
            if (!f.notes.empty()) e["notes"] = f.notes;
        }
        if (row.s_star) e["s_star"] = *row.s_star;
        if (row.fx_t) e["fx_t"] = *row.fx_t;
        if (row.fx_T) e["fx_T"] = *row.fx_T;
        if (row.are) e["are"] = *row.are;
        if (row.ks)
            e["ks"] = {{"statistic", row.ks->statistic},
                       {"critical_value", row.ks->critical_value},
                       {"decision", row.ks->decision},
                       {"level", row.ks->level}};
        j["rows"].push_back(e);
    }
    os << j.dump(2) << '\n';
}

void write_diagnostics(std::ostream& os, const PaymentSample& sample, const FitResult& fitted,
                       const SurfaceRequest& surface) {
    if (sample.n() == 0) throw DataError("diagnostics need a non-empty sample");
    if (surface.grid_size < 1) throw DomainError("--grid-size must be at least 1");
    const PaymentDistribution dist(sample.kind, fitted.model(sample.w0), sample.policy);
    os << "section,x,y,value,marker\n";
    const double n = static_cast<double>(sample.n());
    for (std::size_t i = 0; i < sample.n(); ++i) {
        const double p = (static_cast<double>(i) + 0.5) / n;
        os << "qq," << format_fixed(sample.values[i], 6) << ',' << format_fixed(dist.qf(p), 6) << ','
           << format_fixed(p, 6) << ",\n";
    }

    auto ll = [&](double g, double s) {
        return sample.kind == PaymentKind::PerPayment ? loglik_y(g, s, sample) : loglik_z(g, s, sample);
    };
    std::pair<double, double> gr = surface.gamma_range, sr = surface.sigma_range;
    if (!surface.ranges_given) {
        gr = {fitted.gamma_hat - 1.5, fitted.gamma_hat + 1.5};
        sr = {0.5 * fitted.sigma_hat, 1.5 * fitted.sigma_hat};
    }
    if (!(sr.first > 0.0)) throw DomainError("sigma range must be positive");
    const std::size_t k = surface.grid_size;
    auto node = [k](const std::pair<double, double>& r, std::size_t i) {
        if (k == 1) return 0.5 * (r.first + r.second);
        return r.first + (r.second - r.first) * static_cast<double>(i) / static_cast<double>(k - 1);
    };
    std::vector<double> vals(k * k);
    std::size_t best = 0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const double v = ll(node(gr, i), node(sr, j));
            vals[i * k + j] = v;
            if (std::isfinite(v) && (!std::isfinite(vals[best]) || v > vals[best])) best = i * k + j;
        }
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            os << "surface," << format_fixed(node(gr, i), 6) << ',' << format_fixed(node(sr, j), 6) << ','
               << format_fixed(vals[i * k + j], 6) << ',' << (i * k + j == best ? "max" : "") << '\n';

    const MomentSummary m = summarize(sample);
    Vec2 start{};
    try {
        start = sample.kind == PaymentKind::PerPayment ? mle_start_y(m, sample.policy.c)
                                                       : mle_start_z(m, sample.thresholds, sample.policy.c);
        os << "surface," << format_fixed(start.x, 6) << ',' << format_fixed(start.y, 6) << ','
           << format_fixed(ll(start.x, start.y), 6) << ",start\n";
    } catch (const Error&) {
    }
    os << "surface," << format_fixed(fitted.gamma_hat, 6) << ',' << format_fixed(fitted.sigma_hat, 6) << ','
       << format_fixed(ll(fitted.gamma_hat, fitted.sigma_hat), 6) << ",fit\n";
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lognormal severity fitting for payments under deductibles, limits and coinsurance", "lnsev-cli"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    SampleSource src;
    std::string variant = "y", limit = "inf", format = "text", out_path;
    bool deterministic = false;

    auto* ingest = app.add_subcommand("ingest", "summarize a payment file after the policy transform");
    add_source_options(ingest, src, variant, limit);
    ingest->add_option("--format", format)->check(CLI::IsMember({"text", "csv", "json"}));
    ingest->add_option("--out", out_path);

    FitRequest freq;
    auto* fit = app.add_subcommand("fit", "fit MLE and optionally an MTM estimator");
    add_source_options(fit, src, variant, limit);
    fit->add_option("--method", freq.method)->check(CLI::IsMember({"mle", "mtm", "mtm-plugin"}));
    fit->add_option("--a", freq.a, "lower trim proportion, decimal or n/m");
    fit->add_option("--b", freq.b, "upper trim proportion, decimal or n/m");
    fit->add_option("--level", freq.level, "confidence level");
    fit->add_flag("--force", freq.force, "print estimates even when validation fails");
    fit->add_option("--format", format)->check(CLI::IsMember({"text", "csv", "json"}));
    fit->add_option("--out", out_path);
    fit->add_flag("--deterministic", deterministic, "omit the timestamp");

    AreRequest areq;
    areq.model = {1.0, 5.0, 3.0};
    areq.policy = {1.0, 4.0, kInf};
    std::string grid, a_values, b_values;
    int decimals = 3;
    auto* are = app.add_subcommand("are", "asymptotic relative efficiency grid");
    are->add_option("--variant", variant)->check(CLI::IsMember({"y", "z", "Y", "Z"}));
    are->add_option("--theta", areq.model.theta);
    are->add_option("--sigma", areq.model.sigma);
    are->add_option("--w0", areq.model.w0);
    are->add_option("--deductible", areq.policy.d);
    are->add_option("--limit", limit);
    are->add_option("--coinsurance", areq.policy.c);
    are->add_option("--grid", grid, "a:b pairs separated by commas");
    are->add_option("--a-values", a_values, "comma-separated a values (with --b-values)");
    are->add_option("--b-values", b_values, "comma-separated b values (with --a-values)");
    are->add_option("--decimals", decimals);
    are->add_option("--out", out_path);

    std::string config_path;
    std::optional<std::size_t> reps;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo study from a key = value config");
    sim->add_option("config", config_path)->required();
    sim->add_option("--reps", reps, "override replications");
    sim->add_option("--seed", seed, "override seed");
    sim->add_option("--threads", threads, "worker threads (default LNSEV_THREADS or 1)");
    sim->add_option("--out", out_path);

    std::optional<double> diag_theta, diag_sigma;
    std::string gamma_range, sigma_range;
    std::size_t grid_size = 41;
    auto* diag = app.add_subcommand("diagnostics", "QQ pairs and log-likelihood surface as CSV");
    add_source_options(diag, src, variant, limit);
    diag->add_option("--theta", diag_theta, "fitted theta (default: MLE)");
    diag->add_option("--sigma", diag_sigma, "fitted sigma (default: MLE)");
    diag->add_option("--gamma-range", gamma_range, "lo:hi");
    diag->add_option("--sigma-range", sigma_range, "lo:hi");
    diag->add_option("--grid-size", grid_size);
    diag->add_option("--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kOther;
    }

    try {
        src.variant = parse_variant(variant);
        src.limit = parse_limit(limit);
        if (ingest->parsed()) {
            const PaymentSample s = load_sample(src);
            write_out(out_path, out, [&](std::ostream& os) { write_summary(os, summarize_input(s), format); });
            return kOk;
        }
        if (fit->parsed()) {
            freq.source = src;
            RunReport report = build_fit_report(freq);
            if (!deterministic) report.timestamp = utc_timestamp();
            write_out(out_path, out, [&](std::ostream& os) {
                if (format == "json") write_report_json(os, report);
                else if (format == "csv") write_report_csv(os, report);
                else write_report_text(os, report);
            });
            if (report.validation_failed) {
                err << (freq.force ? "warning" : "error") << ": trimming proportions failed validation";
                for (const auto& row : report.rows)
                    for (const auto& reason : row.validation_reasons) err << "; " << reason;
                err << '\n';
                return kValidationFailure;
            }
            return kOk;
        }
        if (are->parsed()) {
            areq.variant = parse_variant(variant);
            areq.policy.u = parse_limit(limit);
            if (!grid.empty() && (!a_values.empty() || !b_values.empty()))
                throw DomainError("use either --grid or --a-values/--b-values");
            if (!grid.empty()) {
                for (const auto& cell : split(grid, ',')) {
                    const auto parts = split(cell, ':');
                    if (parts.size() != 2) throw DomainError("grid cells must look like a:b");
                    areq.grid.emplace_back(Proportion::parse(parts[0]), Proportion::parse(parts[1]));
                }
            } else {
                if (a_values.empty() || b_values.empty()) throw DomainError("give --grid or both --a-values and --b-values");
                for (const auto& a : split(a_values, ','))
                    for (const auto& b : split(b_values, ','))
                        areq.grid.emplace_back(Proportion::parse(a), Proportion::parse(b));
            }
            if (areq.grid.empty()) throw DomainError("empty ARE grid");
            areq.model.validate();
            areq.policy.validate(areq.model.w0);
            const AreTable table = are_table(areq);
            write_out(out_path, out, [&](std::ostream& os) { table.write_csv(os, decimals); });
            for (const auto& c : table.cells)
                if (!c.value) err << "cell (" << c.trim.a.str() << ", " << c.trim.b.str() << "): " << c.error << '\n';
            return kOk;
        }
        if (sim->parsed()) {
            StudyConfig cfg = load_study_config(config_path);
            if (reps) cfg.replications = *reps;
            if (seed) cfg.seed = *seed;
            if (threads) cfg.threads = *threads;
            const StudyResult res = run_study(cfg);
            write_out(out_path, out, [&](std::ostream& os) { res.write_csv(os); });
            for (const auto& w : res.warnings) err << "warning: " << w << '\n';
            return kOk;
        }
        if (diag->parsed()) {
            const PaymentSample s = load_sample(src);
            FitResult fitted;
            if (diag_theta || diag_sigma) {
                if (!diag_theta || !diag_sigma) throw DomainError("give both --theta and --sigma");
                if (!(*diag_sigma > 0.0)) throw DomainError("--sigma must be positive");
                fitted.kind = s.kind;
                fitted.theta_hat = *diag_theta;
                fitted.sigma_hat = *diag_sigma;
                fitted.gamma_hat = (s.thresholds.t - *diag_theta) / *diag_sigma;
            } else {
                fitted = fit_mle(s);
            }
            SurfaceRequest sr;
            sr.grid_size = grid_size;
            if (!gamma_range.empty() || !sigma_range.empty()) {
                if (gamma_range.empty() || sigma_range.empty()) throw DomainError("give both --gamma-range and --sigma-range");
                sr.gamma_range = parse_range(gamma_range);
                sr.sigma_range = parse_range(sigma_range);
                sr.ranges_given = true;
            }
            write_out(out_path, out, [&](std::ostream& os) { write_diagnostics(os, s, fitted, sr); });
            return kOk;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return kOther;
}

}  // namespace lnsev::cli
