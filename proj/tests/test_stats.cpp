#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tabreg/rng.hpp"
#include "tabreg/stats.hpp"
#include "tabreg/synth.hpp"

using namespace tabreg;
using doctest::Approx;

TEST_CASE("quantile: linear interpolation on order statistics") {
    const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    // position 0.25*(10-1) = 2.25 between sorted ranks 3 and 4
    CHECK(stats::quantile(v, 0.25) == Approx(3.25).epsilon(1e-12));
    CHECK(stats::quantile(v, 0.0) == 1.0);
    CHECK(stats::quantile(v, 1.0) == 10.0);

    const std::vector<double> constant{5, 5, 5};
    CHECK(stats::quantile(constant, 0.9) == 5.0);

    CHECK_THROWS_AS(stats::quantile(std::vector<double>{}, 0.5), DataError);
}

TEST_CASE("quantile: monotone in q, permutation invariant") {
    Rng rng(99);
    std::vector<double> v(37);
    for (double& x : v) x = rng.normal() * 10;
    double prev = -1e300;
    for (double q = 0.0; q <= 1.0; q += 0.01) {
        const double cur = stats::quantile(v, q);
        CHECK(cur >= prev);
        prev = cur;
    }
    std::vector<double> shuffled = v;
    rng.shuffle(shuffled);
    for (double q : {0.0, 0.1, 0.37, 0.5, 0.77, 1.0}) {
        CHECK(stats::quantile(v, q) == stats::quantile(shuffled, q));
    }
}

TEST_CASE("describe: moments with the n-1 denominator, missing handling") {
    std::vector<Column> cols;
    cols.push_back(Column::make_numeric("two", ColumnRole::numeric_feature, {2, 4}));
    cols.push_back(Column::make_numeric("one", ColumnRole::numeric_feature, {7, 0}));
    cols.back().missing[1] = 1;
    cols.push_back(Column::make_numeric("none", ColumnRole::numeric_feature, {0, 0}));
    cols.back().missing = {1, 1};
    const Table t{std::move(cols)};

    const auto summary = stats::describe(t);
    REQUIRE(summary.size() == 3);

    CHECK(*summary[0].mean == Approx(3.0));
    CHECK(*summary[0].stddev == Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(summary[0].missing_count == 0);

    CHECK(*summary[1].mean == Approx(7.0));
    CHECK_FALSE(summary[1].stddev.has_value()); // single value: std undefined-marked
    CHECK(summary[1].missing_count == 1);

    CHECK_FALSE(summary[2].mean.has_value());
    CHECK(summary[2].missing_count == 2);
}

TEST_CASE("pearson: hand-derived value and sign cases") {
    const std::vector<double> x{1, 2, 3};
    const std::vector<double> y{1, 2, 4};
    CHECK(*stats::pearson(x, y) == Approx(0.98198).epsilon(1e-4));

    std::vector<double> neg(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) neg[i] = -x[i];
    CHECK(*stats::pearson(x, x) == Approx(1.0).epsilon(1e-12));
    CHECK(*stats::pearson(x, neg) == Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pearson: affine invariance under positive scaling") {
    Rng rng(4);
    std::vector<double> x(101), y(101);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.normal();
        y[i] = 0.3 * x[i] + rng.normal();
    }
    const double base = *stats::pearson(x, y);
    std::vector<double> ax(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) ax[i] = 2.5 * x[i] + 17.0;
    CHECK(*stats::pearson(ax, y) == Approx(base).epsilon(1e-12));
}

TEST_CASE("pearson_matrix: symmetry, diagonal, constant columns undefined") {
    std::vector<Column> cols;
    cols.push_back(Column::make_numeric("a", ColumnRole::numeric_feature, {1, 2, 3, 4}));
    cols.push_back(Column::make_numeric("b", ColumnRole::numeric_feature, {2, 1, 4, 3}));
    cols.push_back(Column::make_numeric("c", ColumnRole::numeric_feature, {5, 5, 5, 5}));
    const Table t{std::move(cols)};

    const auto m = stats::pearson_matrix(t, {"a", "b", "c"});
    CHECK(m.values(0, 0) == 1.0);
    CHECK(m.values(1, 1) == 1.0);
    CHECK(m.values(0, 1) == Approx(m.values(1, 0)).epsilon(1e-12));
    CHECK_FALSE(m.defined(2, 2)); // constant column is undefined-marked
    CHECK_FALSE(m.defined(0, 2));
    CHECK(m.defined(0, 1));

    CHECK_THROWS_AS(stats::pearson_matrix(t, {"a", "zzz"}), DataError);
}

TEST_CASE("pearson_matrix: pairwise-complete exclusion") {
    std::vector<Column> cols;
    cols.push_back(Column::make_numeric("a", ColumnRole::numeric_feature, {1, 2, 3, 100}));
    cols.back().missing[3] = 1;
    cols.push_back(Column::make_numeric("b", ColumnRole::numeric_feature, {1, 2, 3, -50}));
    const Table t{std::move(cols)};
    const auto m = stats::pearson_matrix(t, {"a", "b"});
    // row 3 is excluded for the (a, b) pair, leaving a perfect correlation
    CHECK(m.values(0, 1) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("describe of the synthetic generator converges to the spec means") {
    SynthSpec spec = SynthSpec::bundled_default();
    spec.corruption = {};
    const SynthResult result = synthesize_dataset(spec, 10000);
    const auto summary = stats::describe(result.table);
    for (const SynthColumn& sc : spec.columns) {
        if (sc.role != ColumnRole::numeric_feature) continue;
        for (const auto& s : summary) {
            if (s.name != sc.name) continue;
            const double bound = 5.0 * sc.std / std::sqrt(10000.0);
            CHECK_MESSAGE(std::abs(*s.mean - sc.mean) <= bound, sc.name);
        }
    }
}
