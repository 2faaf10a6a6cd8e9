#pragma once

#include <string>
#include <vector>

#include "lnsev/payment_model.hpp"

namespace lnsev::cli {

struct SampleSource {
    std::string input;
    std::string column;  // empty: first column
    double deductible = 0.0;
    double limit = kInf;
    double coinsurance = 1.0;
    double w0 = 0.0;
    PaymentKind variant = PaymentKind::PerPayment;
    bool ground_up = false;  // input holds ground-up losses rather than payments

    PolicySpec policy() const { return {coinsurance, deductible, limit}; }
};

// One number per record. A non-numeric first record is treated as a header.
// Unparseable records are collected and reported together by line number.
std::vector<double> read_numeric_column(const std::string& path, const std::string& column = {});

PaymentSample load_sample(const SampleSource& src);

PaymentKind parse_variant(const std::string& s);

// "inf", "none" or a number.
double parse_limit(const std::string& s);

std::string format_fixed(double x, int decimals);

}  // namespace lnsev::cli
