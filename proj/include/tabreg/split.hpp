#ifndef TABREG_SPLIT_HPP
#define TABREG_SPLIT_HPP

#include <cstdint>
#include <vector>

#include "tabreg/table.hpp"

namespace tabreg {

struct SplitResult {
    Table train;
    Table test;
    std::vector<std::size_t> leakage_dropped; // original row indices, sorted
};

/// Seed-deterministic holdout split. |test| = round(test_fraction * n); the
/// permutation depends only on (n, seed); within each side the original row
/// order is preserved. With the leakage guard on, any test row whose feature
/// vector (feature-role columns, exact cell equality) also occurs in train is
/// moved to leakage_dropped instead of test.
SplitResult split_train_test(const Table& t, double test_fraction, std::uint64_t seed,
                             bool leakage_guard);

} // namespace tabreg

#endif
