#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "io.hpp"
#include "lnsev/fit.hpp"
#include "lnsev/gof.hpp"
#include "lnsev/payment_model.hpp"

namespace lnsev::cli {

inline constexpr const char* kToolVersion = "lnsev 0.1.0";

enum ExitCode : int {
    kOk = 0,
    kOther = 1,
    kDataFailure = 2,
    kValidationFailure = 3,
    kConvergenceFailure = 4,
};

// Maps a library exception to a process exit code.
int exit_code_for(const std::exception& e);

struct InputSummary {
    PaymentKind variant = PaymentKind::PerPayment;
    double t = 0.0, T = kInf, R = kInf;
    std::size_t n0 = 0, n1 = 0, n2 = 0, n = 0;
};

InputSummary summarize_input(const PaymentSample& s);

struct ReportRow {
    std::string estimator;  // MLE, MTM, MTM-plugin
    std::string a, b;       // empty for MLE
    bool estimated = false; // false when validation failed without --force
    bool forced = false;
    FitResult fit;
    std::string validation;  // pass, fail, n/a
    std::vector<std::string> validation_reasons;
    // Y: parametric s*. Z: parametric F(t), F(T).
    std::optional<double> s_star, fx_t, fx_T;
    std::optional<double> are;
    std::optional<KsResult> ks;
};

struct RunReport {
    std::string version = kToolVersion;
    std::string timestamp;  // empty under --deterministic
    std::vector<std::pair<std::string, std::string>> config;
    InputSummary input;
    std::vector<ReportRow> rows;
    bool validation_failed = false;
};

struct FitRequest {
    SampleSource source;
    std::string method = "mle";
    std::string a = "0";
    std::string b = "0";
    double level = 0.95;
    bool force = false;
};

RunReport build_fit_report(const FitRequest& req);

void write_report_text(std::ostream& os, const RunReport& r);
void write_report_csv(std::ostream& os, const RunReport& r);
void write_report_json(std::ostream& os, const RunReport& r);
void write_summary(std::ostream& os, const InputSummary& s, const std::string& format);

struct SurfaceRequest {
    std::pair<double, double> gamma_range{0.0, 0.0};
    std::pair<double, double> sigma_range{0.0, 0.0};
    std::size_t grid_size = 41;
    bool ranges_given = false;
};

// CSV with columns section,x,y,value,marker: QQ pairs (x empirical, y fitted,
// value the plotting position) then the (gamma, sigma, loglik) grid.
void write_diagnostics(std::ostream& os, const PaymentSample& sample, const FitResult& fitted,
                       const SurfaceRequest& surface);

// Full CLI entry point; argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lnsev::cli
