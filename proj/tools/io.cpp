#include "io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lnsev/errors.hpp"

namespace lnsev::cli {

namespace {

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\"");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(strip(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(strip(cur));
    return out;
}

bool parse_double(const std::string& s, double& x) {
    if (s.empty()) return false;
    try {
        std::size_t pos = 0;
        x = std::stod(s, &pos);
        return pos == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

std::vector<double> read_numeric_column(const std::string& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file '" + path + "'");
    std::vector<double> out;
    std::vector<std::size_t> bad;
    std::string line;
    std::size_t lineno = 0;
    std::size_t col = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (strip(line).empty()) continue;
        const auto cells = split_csv(line);
        if (!header_seen) {
            header_seen = true;
            double probe = 0.0;
            const bool numeric = col < cells.size() && parse_double(cells[0], probe);
            if (!column.empty()) {
                if (numeric) throw DataError("--column given but '" + path + "' has no header row");
                std::size_t k = 0;
                while (k < cells.size() && cells[k] != column) ++k;
                if (k == cells.size()) throw DataError("column '" + column + "' not found in header");
                col = k;
                continue;
            }
            if (!numeric) continue;
        }
        double x = 0.0;
        if (col >= cells.size() || !parse_double(cells[col], x) || !std::isfinite(x)) {
            bad.push_back(lineno);
            continue;
        }
        out.push_back(x);
    }
    if (!bad.empty()) {
        std::ostringstream msg;
        msg << "unparseable records at line(s)";
        for (std::size_t i = 0; i < bad.size() && i < 20; ++i) msg << ' ' << bad[i];
        if (bad.size() > 20) msg << " ... (" << bad.size() << " total)";
        throw DataError(msg.str(), bad.front());
    }
    if (out.empty()) throw DataError("input file '" + path + "' contains no data");
    return out;
}

PaymentSample load_sample(const SampleSource& src) {
    const PolicySpec policy = src.policy();
    policy.validate(src.w0);
    std::vector<double> raw = read_numeric_column(src.input, src.column);
    if (src.ground_up) raw = payments_from_losses(raw, src.variant, policy);
    if (raw.empty()) throw DataError("no payments remain after applying the deductible");
    return transform_to_normal(raw, src.variant, policy, src.w0);
}

PaymentKind parse_variant(const std::string& s) {
    if (s == "y" || s == "Y") return PaymentKind::PerPayment;
    if (s == "z" || s == "Z") return PaymentKind::PerLoss;
    throw DomainError("variant must be y or z");
}

double parse_limit(const std::string& s) {
    if (s == "inf" || s == "none" || s.empty()) return kInf;
    double x = 0.0;
    if (!parse_double(s, x)) throw DomainError("limit must be a number or 'inf'");
    return x;
}

std::string format_fixed(double x, int decimals) {
    if (std::isnan(x)) return "NA";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    return buf;
}

}  // namespace lnsev::cli
