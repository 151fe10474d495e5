#ifndef TABREG_OUTLIERS_HPP
#define TABREG_OUTLIERS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tabreg/error.hpp"

namespace tabreg::outliers {

enum class Method { zscore, tukey, cooks };

std::string to_string(Method m);

/// Tukey fence parameters: lower/upper quantile levels and the fence
/// multiplier. Defaults follow the reference pipeline's wide levels
/// (0.10/0.90); the textbook quartile setting is 0.25/0.75.
struct TukeyParams {
    double a = 0.10; // lower quantile level, in (0, 0.5)
    double b = 0.90; // upper quantile level, in (0.5, 1)
    double k = 1.5;  // fence multiplier, > 0

    void validate() const;
};

/// Auditable outcome of one detection pass. `flagged` is strictly increasing;
/// every flagged row's score violates the recorded bounds.
struct OutlierReport {
    Method method = Method::zscore;
    std::map<std::string, double> params;
    double lower_bound = 0.0; // fence / z_lo; for cooks: 0
    double upper_bound = 0.0; // fence / z_hi; for cooks: the D threshold
    std::vector<std::int64_t> flagged;
    std::vector<double> per_row_score; // z, value, or Cook's D; empty if not recorded
    bool degenerate = false;           // zero spread, nothing can be flagged

    std::string to_json() const;
};

/// Flags rows whose z-score (n-1 std) falls outside [z_lo, z_hi]. A constant
/// input flags nothing and sets the degenerate marker. Needs >= 2 values.
OutlierReport zscore_outliers(const std::vector<double>& values, double z_lo = -3.0,
                              double z_hi = 3.0);

/// Tukey fences: Q1 = quantile(a), Q3 = quantile(b), fences at
/// Q1 - k*(Q3-Q1) and Q3 + k*(Q3-Q1); values outside are flagged.
OutlierReport tukey_fences(const std::vector<double>& values, const TukeyParams& params = {});

/// Leverage: diagonal of the hat matrix of the intercept-augmented OLS fit.
Eigen::VectorXd ols_leverage(const Eigen::MatrixXd& X);

/// Cook's distance per row: D_i = e_i^2/(p*s^2) * h_ii/(1-h_ii)^2 from the
/// intercept-augmented OLS fit of y on X (p = fitted coefficients,
/// s^2 = residual mean square). When s^2 = 0 all D_i are defined as 0.
/// Rows with D_i > threshold_scale/n are flagged (default 4/n). Requires
/// n_rows > n_features + 1 and a full-column-rank augmented design.
OutlierReport cooks_distance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             double threshold_scale = 4.0);

} // namespace tabreg::outliers

#endif
