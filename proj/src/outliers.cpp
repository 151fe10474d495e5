#include "tabreg/outliers.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tabreg/stats.hpp"

namespace tabreg::outliers {

std::string to_string(Method m) {
    switch (m) {
        case Method::zscore: return "zscore";
        case Method::tukey: return "tukey";
        case Method::cooks: return "cooks";
    }
    return "unknown";
}

void TukeyParams::validate() const {
    if (!(a > 0.0 && a < 0.5)) throw ConfigError("tukey level a must lie in (0, 0.5)");
    if (!(b > 0.5 && b < 1.0)) throw ConfigError("tukey level b must lie in (0.5, 1)");
    if (!(k > 0.0)) throw ConfigError("tukey multiplier k must be > 0");
}

OutlierReport zscore_outliers(const std::vector<double>& values, double z_lo, double z_hi) {
    if (values.size() < 2) throw DataError("zscore_outliers needs at least 2 values");
    if (!(z_lo < z_hi)) throw ConfigError("zscore bounds require z_lo < z_hi");

    OutlierReport report;
    report.method = Method::zscore;
    report.params = {{"z_lo", z_lo}, {"z_hi", z_hi}};
    report.lower_bound = z_lo;
    report.upper_bound = z_hi;

    const double m = stats::mean(values);
    const double sd = stats::sample_std(values);
    if (sd == 0.0) {
        report.degenerate = true;
        report.per_row_score.assign(values.size(), 0.0);
        return report;
    }
    report.per_row_score.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double z = (values[i] - m) / sd;
        report.per_row_score.push_back(z);
        if (z < z_lo || z > z_hi) report.flagged.push_back(static_cast<std::int64_t>(i));
    }
    return report;
}

OutlierReport tukey_fences(const std::vector<double>& values, const TukeyParams& params) {
    if (values.empty()) throw DataError("tukey_fences of empty data");
    params.validate();

    const double q1 = stats::quantile(values, {params.a});
    const double q3 = stats::quantile(values, {params.b});
    const double iqr = q3 - q1; // spread between the upper and lower levels
    OutlierReport report;
    report.method = Method::tukey;
    report.params = {{"a", params.a}, {"b", params.b}, {"k", params.k}};
    report.lower_bound = q1 - params.k * iqr;
    report.upper_bound = q3 + params.k * iqr;
    report.degenerate = iqr == 0.0;
    report.per_row_score = values;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < report.lower_bound || values[i] > report.upper_bound) {
            report.flagged.push_back(static_cast<std::int64_t>(i));
        }
    }
    return report;
}

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
    Eigen::MatrixXd Z(X.rows(), X.cols() + 1);
    Z.col(0).setOnes();
    Z.rightCols(X.cols()) = X;
    return Z;
}

} // namespace

Eigen::VectorXd ols_leverage(const Eigen::MatrixXd& X) {
    const Eigen::MatrixXd Z = with_intercept(X);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
    if (qr.rank() < Z.cols()) throw DataError("rank-deficient design in leverage computation");
    const Eigen::MatrixXd ZtZ = Z.transpose() * Z;
    const Eigen::MatrixXd solved = ZtZ.ldlt().solve(Z.transpose()); // (Z'Z)^{-1} Z'
    Eigen::VectorXd h(Z.rows());
    for (Eigen::Index i = 0; i < Z.rows(); ++i) h(i) = Z.row(i).dot(solved.col(i));
    return h;
}

OutlierReport cooks_distance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             double threshold_scale) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols() + 1; // fitted coefficients, intercept included
    if (y.size() != n) throw DataError("cooks_distance: X/y row mismatch");
    if (n <= p) throw DataError("cooks_distance needs n_rows > n_features + 1");

    const Eigen::MatrixXd Z = with_intercept(X);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
    if (qr.rank() < Z.cols()) throw DataError("cooks_distance: rank-deficient design");
    const Eigen::VectorXd beta = qr.solve(y);
    const Eigen::VectorXd resid = y - Z * beta;
    double s2 = resid.squaredNorm() / static_cast<double>(n - p);
    // an exact fit leaves only rounding noise; treat it as the s^2 = 0 case
    const double y_scale = y.squaredNorm() / static_cast<double>(n);
    if (s2 <= 1e-20 * std::max(y_scale, 1e-300)) s2 = 0.0;
    const Eigen::VectorXd h = ols_leverage(X);

    OutlierReport report;
    report.method = Method::cooks;
    report.params = {{"threshold_scale", threshold_scale}};
    report.lower_bound = 0.0;
    report.upper_bound = threshold_scale / static_cast<double>(n);
    report.degenerate = s2 == 0.0;
    report.per_row_score.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        double d = 0.0;
        if (s2 > 0.0) {
            const double hi = h(i);
            d = (resid(i) * resid(i) / (static_cast<double>(p) * s2)) * hi / ((1.0 - hi) * (1.0 - hi));
        }
        report.per_row_score[static_cast<std::size_t>(i)] = d;
        if (d > report.upper_bound) report.flagged.push_back(i);
    }
    return report;
}

std::string OutlierReport::to_json() const {
    nlohmann::json j;
    j["method"] = to_string(method);
    j["params"] = params;
    j["bounds"] = {{"lower", lower_bound}, {"upper", upper_bound}};
    j["flagged"] = flagged;
    j["degenerate"] = degenerate;
    if (!per_row_score.empty()) j["per_row_score"] = per_row_score;
    return j.dump(2);
}

} // namespace tabreg::outliers
