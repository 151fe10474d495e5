#include "tabreg/split.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "tabreg/rng.hpp"

namespace tabreg {

SplitResult split_train_test(const Table& t, double test_fraction, std::uint64_t seed,
                             bool leakage_guard) {
    const std::size_t n = t.n_rows();
    if (n < 2) throw DataError("split needs at least 2 rows");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("test_fraction must lie in (0, 1)");
    }
    const auto n_test =
        static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    if (n_test == 0 || n_test == n) {
        throw ConfigError("test_fraction yields an empty train or test set");
    }

    Rng rng(seed);
    std::vector<std::size_t> perm = rng.permutation(n);
    std::vector<std::size_t> test_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> train_idx(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());

    SplitResult result;
    if (leakage_guard) {
        std::vector<std::size_t> feature_cols;
        for (std::size_t i = 0; i < t.n_cols(); ++i) {
            const ColumnRole role = t.column(i).role;
            if (role == ColumnRole::numeric_feature || role == ColumnRole::categorical_feature ||
                role == ColumnRole::date_feature) {
                feature_cols.push_back(i);
            }
        }
        std::unordered_set<std::string> train_keys;
        train_keys.reserve(train_idx.size() * 2);
        for (std::size_t r : train_idx) train_keys.insert(t.row_key(r, feature_cols));
        std::vector<std::size_t> kept;
        kept.reserve(test_idx.size());
        for (std::size_t r : test_idx) {
            if (train_keys.count(t.row_key(r, feature_cols))) result.leakage_dropped.push_back(r);
            else kept.push_back(r);
        }
        test_idx = std::move(kept);
        if (test_idx.empty()) throw DataError("leakage guard dropped the entire test set");
    }

    result.train = t.select_rows(train_idx);
    result.test = t.select_rows(test_idx);
    return result;
}

} // namespace tabreg
