#include "lnsev/trim.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "lnsev/errors.hpp"

namespace lnsev {

namespace {

std::int64_t parse_int(std::string_view s) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        throw DomainError("malformed trim proportion '" + std::string(s) + "'");
    return v;
}

}  // namespace

Proportion::Proportion(std::int64_t num, std::int64_t den) {
    if (den <= 0 || num < 0 || num >= den)
        throw DomainError("trim proportion must lie in [0, 1): " + std::to_string(num) + "/" + std::to_string(den));
    const std::int64_t g = std::gcd(num, den);
    num_ = num / g;
    den_ = den / g;
}

Proportion Proportion::parse(std::string_view text) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    if (auto slash = text.find('/'); slash != std::string_view::npos)
        return Proportion(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
    if (text.find_first_of("eE") != std::string_view::npos) {
        double x = 0.0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
        if (ec != std::errc() || p != text.data() + text.size())
            throw DomainError("malformed trim proportion '" + std::string(text) + "'");
        return from_double(x);
    }
    const auto dot = text.find('.');
    const std::string_view whole = text.substr(0, dot);
    const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (frac.size() > 15) return from_double(std::stod(std::string(text)));
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const std::int64_t w = whole.empty() ? 0 : parse_int(whole);
    const std::int64_t f = frac.empty() ? 0 : parse_int(frac);
    return Proportion(w * den + f, den);
}

Proportion Proportion::from_double(double x) {
    if (!(x >= 0.0 && x < 1.0)) throw DomainError("trim proportion must lie in [0, 1)");
    std::int64_t den = 1;
    for (int k = 0; k <= 12; ++k, den *= 10) {
        const double scaled = std::round(x * static_cast<double>(den));
        if (scaled / static_cast<double>(den) == x) return Proportion(static_cast<std::int64_t>(scaled), den);
    }
    // Best rational approximation by continued fractions.
    std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double r = x;
    for (int i = 0; i < 64; ++i) {
        const auto q = static_cast<std::int64_t>(std::floor(r));
        const std::int64_t h2 = q * h1 + h0;
        const std::int64_t k2 = q * k1 + k0;
        if (k2 > 1'000'000'000'000LL) break;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        if (static_cast<double>(h1) / static_cast<double>(k1) == x) break;
        const double frac = r - static_cast<double>(q);
        if (frac == 0.0) break;
        r = 1.0 / frac;
    }
    return Proportion(h1, k1);
}

std::size_t Proportion::floor_times(std::size_t n) const {
    const auto prod = static_cast<__int128>(n) * num_;
    return static_cast<std::size_t>(prod / den_);
}

std::string Proportion::str() const {
    if (num_ == 0) return "0";
    std::int64_t d = den_;
    while (d % 10 == 0) d /= 10;
    while (d % 5 == 0) d /= 5;
    while (d % 2 == 0) d /= 2;
    if (d == 1) {
        // Terminating decimal.
        char buf[64];
        for (int digits = 1; digits <= 15; ++digits) {
            std::snprintf(buf, sizeof buf, "%.*f", digits, value());
            if (Proportion::parse(buf) == *this) return buf;
        }
    }
    return std::to_string(num_) + "/" + std::to_string(den_);
}

TrimSpec::TrimSpec(Proportion a_, Proportion b_) : a(a_), b(b_) {
    const auto lhs = static_cast<__int128>(a.num()) * b.den() + static_cast<__int128>(b.num()) * a.den();
    if (!(lhs < static_cast<__int128>(a.den()) * b.den())) throw DomainError("trim proportions must satisfy a + b < 1");
}

TrimWindow TrimSpec::window(std::size_t n) const {
    TrimWindow w{a.floor_times(n), b.floor_times(n), n};
    if (w.m_n + w.m_n_star >= n) throw DomainError("trimming window is empty for n = " + std::to_string(n));
    return w;
}

std::string TrimSpec::str() const { return "(" + a.str() + ", " + b.str() + ")"; }

}  // namespace lnsev
