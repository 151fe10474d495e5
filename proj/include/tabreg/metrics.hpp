#ifndef TABREG_METRICS_HPP
#define TABREG_METRICS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace tabreg::eval {

/// Regression scores. r2 is undefined-marked (nullopt) when y_true is
/// constant and the residuals are not all zero; a perfect fit of a constant
/// target scores r2 = 1.
struct MetricSet {
    std::optional<double> r2;
    double mse = 0.0;
    double mae = 0.0;
    std::int64_t n = 0;
};

/// R^2 = 1 - SS_res/SS_tot about mean(y_true); MSE/MAE are plain means.
/// Throws DataError on empty or mismatched inputs.
MetricSet metrics(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);
MetricSet metrics(const std::vector<double>& y_true, const std::vector<double>& y_pred);

/// Seed-deterministic k-fold assignment: a shuffled permutation sliced into
/// contiguous folds whose sizes differ by at most 1. Depends only on
/// (n, k, seed), never on data values. Returns fold index per row.
std::vector<int> fold_assignment(std::size_t n, int k, std::uint64_t seed);

} // namespace tabreg::eval

#endif
