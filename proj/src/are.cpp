#include "lnsev/are.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lnsev/errors.hpp"
#include "lnsev/mle.hpp"
#include "lnsev/mtm.hpp"

namespace lnsev {

double are_pair(const Matrix2& s_mle, const Matrix2& s_alt) {
    const double dm = s_mle.det();
    const double da = s_alt.det();
    if (!(dm > 0.0) || !(da > 0.0)) throw DomainError("ARE requires positive definite covariance matrices");
    return std::sqrt(dm / da);
}

Matrix2 cov_mle_at(PaymentKind variant, const GroundUpLognormal& model, const PolicySpec& policy) {
    const NormalThresholds th = derive_thresholds(policy, model.w0);
    const StandardizedThresholds st = standardize(model, th);
    return cov_mle(variant, st.gamma, model.sigma, th);
}

Matrix2 cov_mtm(PaymentKind variant, const GroundUpLognormal& model, const PolicySpec& policy, const TrimSpec& trim,
                const QuadratureSpec& quad) {
    if (variant == PaymentKind::PerPayment)
        return cov_mtm_y(model.theta, model.sigma, derive_thresholds(policy, model.w0), trim, quad);
    return cov_mtm_z(model.sigma, trim, quad);
}

AreTable are_table(const AreRequest& req) {
    AreTable table;
    table.variant = req.variant;
    const Matrix2 s_mle = cov_mle_at(req.variant, req.model, req.policy);
    for (const TrimSpec& trim : req.grid) {
        AreCell cell{trim, std::nullopt, {}};
        try {
            const TrimValidation v = validate_trim_population(req.variant, req.model, req.policy, trim);
            if (!v.pass()) {
                std::string msg = "invalid trimming";
                for (const auto& r : v.reasons) msg += "; " + r;
                throw ValidationError(msg);
            }
            cell.value = are_pair(s_mle, cov_mtm(req.variant, req.model, req.policy, trim, req.quad));
        } catch (const Error& e) {
            cell.error = e.what();
        }
        table.cells.push_back(std::move(cell));
    }
    return table;
}

std::optional<double> AreTable::at(double a, double b) const {
    for (const auto& c : cells)
        if (std::abs(c.trim.lower() - a) < 1e-12 && std::abs(c.trim.upper() - b) < 1e-12) return c.value;
    return std::nullopt;
}

void AreTable::write_csv(std::ostream& os, int decimals) const {
    std::vector<Proportion> as, bs;
    for (const auto& c : cells) {
        if (std::find(as.begin(), as.end(), c.trim.a) == as.end()) as.push_back(c.trim.a);
        if (std::find(bs.begin(), bs.end(), c.trim.b) == bs.end()) bs.push_back(c.trim.b);
    }
    os << "a\\b";
    for (const auto& b : bs) os << ',' << b.str();
    os << '\n';
    char buf[64];
    for (const auto& a : as) {
        os << a.str();
        for (const auto& b : bs) {
            os << ',';
            const auto it = std::find_if(cells.begin(), cells.end(),
                                         [&](const AreCell& c) { return c.trim.a == a && c.trim.b == b; });
            if (it == cells.end()) continue;
            if (!it->value) {
                os << "NA";
                continue;
            }
            std::snprintf(buf, sizeof buf, "%.*f", decimals, *it->value);
            os << buf;
        }
        os << '\n';
    }
}

double finite_re_from_mse(const Matrix2& mse, const Matrix2& s_mle, std::size_t n) {
    const double dm = s_mle.det();
    if (!(dm > 0.0)) throw DomainError("S_mle must be positive definite");
    const Matrix2 scaled = mse * static_cast<double>(n);
    const double d = scaled.det();
    const bool zero = mse.a11 == 0.0 && mse.a12 == 0.0 && mse.a22 == 0.0;
    if (zero) return kInf;
    if (!(d > 0.0)) throw SingularityError("empirical MSE matrix is singular");
    return std::sqrt(dm) / std::sqrt(d);
}

double finite_re(const std::vector<Estimate>& estimates, const Estimate& truth, const Matrix2& s_mle, std::size_t n) {
    if (estimates.size() < 2) throw DomainError("finite_re needs at least two replications");
    long double s11 = 0, s12 = 0, s22 = 0;
    for (const auto& e : estimates) {
        const long double dt = e.theta - truth.theta;
        const long double ds = e.sigma - truth.sigma;
        s11 += dt * dt;
        s12 += dt * ds;
        s22 += ds * ds;
    }
    const long double m = static_cast<long double>(estimates.size());
    const Matrix2 mse = Matrix2::symmetric(static_cast<double>(s11 / m), static_cast<double>(s12 / m),
                                           static_cast<double>(s22 / m));
    return finite_re_from_mse(mse, s_mle, n);
}

}  // namespace lnsev
