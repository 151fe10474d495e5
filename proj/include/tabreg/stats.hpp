#ifndef TABREG_STATS_HPP
#define TABREG_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tabreg/error.hpp"
#include "tabreg/table.hpp"

namespace tabreg::stats {

struct QuantileQuery {
    double q = 0.5;
    enum class Method { linear_interpolation } method = Method::linear_interpolation;
};

/// Quantile by linear interpolation on order statistics: the value at sorted
/// position q*(n-1), interpolated between neighbors. q=0 gives the minimum,
/// q=1 the maximum. q is clamped to [0,1]. This is the convention all fence
/// computations in the toolkit share, so they are bit-reproducible.
template <typename Scalar>
Scalar quantile(std::vector<Scalar> values, Scalar q) {
    if (values.empty()) throw DataError("quantile of empty data");
    q = std::clamp<Scalar>(q, 0, 1);
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    if (n == 1) return values[0];
    const Scalar pos = q * static_cast<Scalar>(n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= n) return values[n - 1];
    const Scalar frac = pos - static_cast<Scalar>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

template <typename Scalar>
Scalar quantile(const std::vector<Scalar>& values, const QuantileQuery& query) {
    return quantile(values, static_cast<Scalar>(query.q));
}

inline double quantile(const Eigen::Ref<const Eigen::VectorXd>& values, double q) {
    return quantile(std::vector<double>(values.begin(), values.end()), q);
}

template <typename Scalar>
Scalar mean(const std::vector<Scalar>& values) {
    if (values.empty()) throw DataError("mean of empty data");
    Scalar s = 0;
    for (Scalar v : values) s += v;
    return s / static_cast<Scalar>(values.size());
}

/// Sample standard deviation (n-1 denominator). Requires at least 2 values.
template <typename Scalar>
Scalar sample_std(const std::vector<Scalar>& values) {
    if (values.size() < 2) throw DataError("sample_std needs at least 2 values");
    const Scalar m = mean(values);
    Scalar ss = 0;
    for (Scalar v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<Scalar>(values.size() - 1));
}

/// Pearson correlation of two equally long sequences. Returns nullopt when
/// either argument is constant (undefined rather than NaN).
template <typename Scalar>
std::optional<Scalar> pearson(const std::vector<Scalar>& x, const std::vector<Scalar>& y) {
    if (x.size() != y.size()) throw DataError("pearson: length mismatch");
    const auto n = x.size();
    if (n < 2) return std::nullopt;
    const Scalar mx = mean(x), my = mean(y);
    Scalar sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Scalar dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0 || syy <= 0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

struct ColumnSummary {
    std::string name;
    std::optional<double> mean;
    std::optional<double> stddev; // n-1 denominator
    std::optional<double> min;
    std::optional<double> max;
    std::int64_t missing_count = 0;
};

/// Per-column descriptive statistics. Missing values are excluded from the
/// moments and counted; text columns contribute only the missing count.
/// A column with fewer than 2 present values has its std undefined-marked,
/// with fewer than 1 all moments are undefined-marked.
std::vector<ColumnSummary> describe(const Table& table);

/// Symmetric Pearson correlation matrix. Undefined cells (constant columns)
/// are marked, not NaN-propagated; the diagonal of a non-constant column is
/// exactly 1.
struct CorrelationMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd values;                 // undefined cells hold NaN
    std::vector<std::uint8_t> defined_mask; // row-major n*n, 1 = defined

    bool defined(std::size_t i, std::size_t j) const {
        return defined_mask[i * names.size() + j] != 0;
    }
    /// CSV export (names header + rows; undefined cells empty) for external
    /// heatmap plotting.
    void write_csv(const std::string& path) const;
};

/// Pairwise-complete Pearson matrix over the named numeric columns: for each
/// pair, rows missing in either column are excluded.
/// Throws DataError on unknown or non-numeric column names.
CorrelationMatrix pearson_matrix(const Table& table, const std::vector<std::string>& columns);

} // namespace tabreg::stats

#endif
