#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace lnsev {

// Exact rational in [0, 1). Decimal text such as "0.05" is parsed exactly
// (5/100), so floor(n * a) never suffers from binary rounding.
class Proportion {
public:
    Proportion() = default;
    Proportion(std::int64_t num, std::int64_t den);

    static Proportion parse(std::string_view text);
    static Proportion from_double(double x);

    double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    std::size_t floor_times(std::size_t n) const;
    std::string str() const;

    friend bool operator==(const Proportion&, const Proportion&) = default;

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

struct TrimWindow {
    std::size_t m_n = 0;       // floor(n a) lowest order statistics dropped
    std::size_t m_n_star = 0;  // floor(n b) highest dropped
    std::size_t n = 0;
    std::size_t size() const { return n - m_n - m_n_star; }
};

struct TrimSpec {
    Proportion a;
    Proportion b;

    TrimSpec() = default;
    TrimSpec(Proportion a_, Proportion b_);
    TrimSpec(double a_, double b_) : TrimSpec(Proportion::from_double(a_), Proportion::from_double(b_)) {}

    double lower() const { return a.value(); }
    double upper() const { return b.value(); }
    double tau() const { return 1.0 - a.value() - b.value(); }

    TrimWindow window(std::size_t n) const;
    std::string str() const;
};

}  // namespace lnsev
