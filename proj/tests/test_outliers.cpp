#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "tabreg/outliers.hpp"
#include "tabreg/rng.hpp"

using namespace tabreg;
using doctest::Approx;

namespace {

// Independent quantile: sort + interpolate, written against the stated
// convention rather than calling the stats module.
double oracle_quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + (pos - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

std::vector<std::int64_t> oracle_tukey(const std::vector<double>& v, double a, double b, double k) {
    const double q1 = oracle_quantile(v, a);
    const double q3 = oracle_quantile(v, b);
    const double iqr = q3 - q1;
    std::vector<std::int64_t> flagged;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < q1 - k * iqr || v[i] > q3 + k * iqr) {
            flagged.push_back(static_cast<std::int64_t>(i));
        }
    }
    return flagged;
}

// Full hat matrix by explicit inverse; deliberately a different route than
// the implementation's solve-based leverage.
Eigen::VectorXd oracle_leverage(const Eigen::MatrixXd& X) {
    Eigen::MatrixXd Z(X.rows(), X.cols() + 1);
    Z.col(0).setOnes();
    Z.rightCols(X.cols()) = X;
    const Eigen::MatrixXd H = Z * (Z.transpose() * Z).inverse() * Z.transpose();
    return H.diagonal();
}

} // namespace

TEST_CASE("zscore: a gross outlier among constants is flagged") {
    std::vector<double> v(100, 0.0);
    v.push_back(50.0);
    const auto report = outliers::zscore_outliers(v);
    // direct mean/std oracle: z of the spike is about 9.95
    const double mean = 50.0 / 101.0;
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / 100.0);
    CHECK((50.0 - mean) / sd > 3.0);
    REQUIRE(report.flagged.size() == 1);
    CHECK(report.flagged[0] == 100);
}

TEST_CASE("zscore: constant data flags nothing, degenerate marker set") {
    const std::vector<double> v(10, 3.0);
    const auto report = outliers::zscore_outliers(v);
    CHECK(report.flagged.empty());
    CHECK(report.degenerate);
}

TEST_CASE("zscore: small-n ceiling keeps a mild spike unflagged") {
    const std::vector<double> v{1, 1, 1, 1, 1, 1, 1, 1, 1, 10};
    const auto report = outliers::zscore_outliers(v);
    CHECK(report.flagged.empty());
    // hand z: max |z| is about 2.846, under the default |3| bound
    CHECK(report.per_row_score[9] == Approx(2.846).epsilon(1e-3));
}

TEST_CASE("zscore: flag set invariant under positive affine transforms") {
    Rng rng(11);
    std::vector<double> v(200);
    for (double& x : v) x = rng.normal() * 3 + 1;
    v[7] = 40;
    v[123] = -35;
    const auto base = outliers::zscore_outliers(v);
    std::vector<double> scaled(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) scaled[i] = 2.7 * v[i] + 100.0;
    const auto transformed = outliers::zscore_outliers(scaled);
    CHECK(base.flagged == transformed.flagged);
}

TEST_CASE("zscore: errors") {
    CHECK_THROWS_AS(outliers::zscore_outliers({1.0}), DataError);
    CHECK_THROWS_AS(outliers::zscore_outliers({1.0, 2.0}, 3.0, -3.0), ConfigError);
}

TEST_CASE("tukey: quartile fixture with one far point") {
    std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 100};
    const auto report = outliers::tukey_fences(v, {0.25, 0.75, 1.5});
    // brute force: Q1 = 3.5, Q3 = 8.5, fences (-4, 16)
    CHECK(report.lower_bound == Approx(-4.0).epsilon(1e-12));
    CHECK(report.upper_bound == Approx(16.0).epsilon(1e-12));
    REQUIRE(report.flagged.size() == 1);
    CHECK(report.flagged[0] == 10);
}

TEST_CASE("tukey: constant list collapses fences, flags nothing") {
    const auto report = outliers::tukey_fences(std::vector<double>(8, 2.5), {0.25, 0.75, 1.5});
    CHECK(report.flagged.empty());
    CHECK(report.degenerate);
    CHECK(report.lower_bound == 2.5);
    CHECK(report.upper_bound == 2.5);
}

TEST_CASE("tukey: default levels are the wide 0.10/0.90 setting") {
    outliers::TukeyParams defaults;
    CHECK(defaults.a == 0.10);
    CHECK(defaults.b == 0.90);
    CHECK(defaults.k == 1.5);
}

TEST_CASE("tukey: brute-force oracle equivalence on seeded lists") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const auto n = static_cast<std::size_t>(20 + rng.uniform_int(0, 200));
        std::vector<double> v(n);
        for (double& x : v) {
            x = rng.normal() * 10;
            if (rng.uniform() < 0.05) x *= 12; // sprinkle heavy tails
        }
        for (const auto& [a, b] : {std::pair{0.25, 0.75}, std::pair{0.10, 0.90}}) {
            const auto report = outliers::tukey_fences(v, {a, b, 1.5});
            CHECK(report.flagged == oracle_tukey(v, a, b, 1.5));
        }
    }
}

TEST_CASE("tukey: permutation invariance of fences and flags") {
    Rng rng(5);
    std::vector<double> v(60);
    for (double& x : v) x = rng.normal() * 4;
    v[11] = 100;
    const auto base = outliers::tukey_fences(v);

    std::vector<std::size_t> perm = rng.permutation(v.size());
    std::vector<double> shuffled(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) shuffled[i] = v[perm[i]];
    const auto shuffled_report = outliers::tukey_fences(shuffled);

    CHECK(base.lower_bound == shuffled_report.lower_bound);
    CHECK(base.upper_bound == shuffled_report.upper_bound);
    std::vector<std::int64_t> mapped;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (std::find(base.flagged.begin(), base.flagged.end(),
                      static_cast<std::int64_t>(perm[i])) != base.flagged.end()) {
            mapped.push_back(static_cast<std::int64_t>(i));
        }
    }
    std::sort(mapped.begin(), mapped.end());
    CHECK(shuffled_report.flagged == mapped);
}

TEST_CASE("tukey: large k flags nothing") {
    Rng rng(6);
    std::vector<double> v(50);
    for (double& x : v) x = rng.normal();
    const double lo = *std::min_element(v.begin(), v.end());
    const double hi = *std::max_element(v.begin(), v.end());
    const double q1 = oracle_quantile(v, 0.25), q3 = oracle_quantile(v, 0.75);
    const double k = (hi - lo) / (q3 - q1) + 1.0;
    const auto report = outliers::tukey_fences(v, {0.25, 0.75, k});
    CHECK(report.flagged.empty());
}

TEST_CASE("cooks: perfect fit gives all zeros") {
    Eigen::MatrixXd X(5, 1);
    X << 1, 2, 3, 4, 5;
    Eigen::VectorXd y(5);
    y << 3, 5, 7, 9, 11; // exactly 2x + 1
    const auto report = outliers::cooks_distance(X, y);
    CHECK(report.flagged.empty());
    for (double d : report.per_row_score) CHECK(d == 0.0);
}

TEST_CASE("cooks: closed form equals the leave-one-out refit oracle") {
    // D_i = sum_j (yhat_j - yhat_j^(i))^2 / (p * s^2), by literal refit
    auto loo_oracle = [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
        const Eigen::Index n = X.rows(), p = X.cols() + 1;
        Eigen::MatrixXd Z(n, p);
        Z.col(0).setOnes();
        Z.rightCols(X.cols()) = X;
        const Eigen::VectorXd beta = (Z.transpose() * Z).ldlt().solve(Z.transpose() * y);
        const Eigen::VectorXd fitted = Z * beta;
        const double s2 = (y - fitted).squaredNorm() / static_cast<double>(n - p);
        Eigen::VectorXd d(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::MatrixXd Zi(n - 1, p);
            Eigen::VectorXd yi(n - 1);
            Eigen::Index k = 0;
            for (Eigen::Index r = 0; r < n; ++r) {
                if (r == i) continue;
                Zi.row(k) = Z.row(r);
                yi(k) = y(r);
                ++k;
            }
            const Eigen::VectorXd beta_i = (Zi.transpose() * Zi).ldlt().solve(Zi.transpose() * yi);
            d(i) = (Z * (beta - beta_i)).squaredNorm() / (static_cast<double>(p) * s2);
        }
        return d;
    };

    SUBCASE("4-point fixture") {
        Eigen::MatrixXd X(4, 1);
        X << 1, 2, 3, 4;
        Eigen::VectorXd y(4);
        y << 1, 2, 3, 10;
        const auto report = outliers::cooks_distance(X, y);
        const Eigen::VectorXd d = loo_oracle(X, y);
        for (Eigen::Index i = 0; i < 4; ++i) {
            CHECK(report.per_row_score[static_cast<std::size_t>(i)] ==
                  Approx(d(i)).epsilon(1e-8));
        }
    }

    SUBCASE("50 seeded 20x3 designs") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            Rng rng(seed);
            Eigen::MatrixXd X(20, 3);
            Eigen::VectorXd y(20);
            for (Eigen::Index i = 0; i < 20; ++i) {
                for (Eigen::Index j = 0; j < 3; ++j) X(i, j) = rng.normal();
                y(i) = X(i, 0) - 2 * X(i, 1) + 0.5 * rng.normal();
            }
            const auto report = outliers::cooks_distance(X, y);
            const Eigen::VectorXd d = loo_oracle(X, y);
            for (Eigen::Index i = 0; i < 20; ++i) {
                CHECK(std::abs(report.per_row_score[static_cast<std::size_t>(i)] - d(i)) < 1e-8);
            }
        }
    }
}

TEST_CASE("cooks: default threshold is 4/n") {
    Eigen::MatrixXd X(8, 1);
    X << 1, 2, 3, 4, 5, 6, 7, 30;
    Eigen::VectorXd y(8);
    y << 1.1, 1.9, 3.2, 3.8, 5.1, 5.9, 7.2, 60;
    const auto report = outliers::cooks_distance(X, y);
    CHECK(report.upper_bound == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("cooks: errors on rank deficiency and short input") {
    Eigen::MatrixXd X(5, 2);
    X.col(0) << 1, 2, 3, 4, 5;
    X.col(1) = 2 * X.col(0); // dependent columns
    Eigen::VectorXd y(5);
    y << 1, 2, 3, 4, 5;
    CHECK_THROWS_AS(outliers::cooks_distance(X, y), DataError);

    Eigen::MatrixXd small(3, 2);
    small << 1, 2, 3, 4, 5, 6;
    Eigen::VectorXd ys(3);
    ys << 1, 2, 3;
    CHECK_THROWS_AS(outliers::cooks_distance(small, ys), DataError);
}

TEST_CASE("leverage: duplicating every row halves each h_ii") {
    Rng rng(21);
    Eigen::MatrixXd X(5, 2);
    for (Eigen::Index i = 0; i < 5; ++i) {
        X(i, 0) = rng.normal();
        X(i, 1) = rng.normal();
    }
    const Eigen::VectorXd h = outliers::ols_leverage(X);
    const Eigen::VectorXd h_oracle = oracle_leverage(X);
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(h(i) == Approx(h_oracle(i)).epsilon(1e-10));

    Eigen::MatrixXd X2(10, 2);
    X2.topRows(5) = X;
    X2.bottomRows(5) = X;
    const Eigen::VectorXd h2 = outliers::ols_leverage(X2);
    for (Eigen::Index i = 0; i < 5; ++i) {
        CHECK(h2(i) == Approx(0.5 * h(i)).epsilon(1e-10));
        CHECK(h2(i + 5) == Approx(0.5 * h(i)).epsilon(1e-10));
    }
}

TEST_CASE("outlier report serializes to JSON") {
    const auto report = outliers::tukey_fences({1, 2, 3, 100}, {0.25, 0.75, 1.5});
    const std::string j = report.to_json();
    CHECK(j.find("\"method\": \"tukey\"") != std::string::npos);
    CHECK(j.find("\"flagged\"") != std::string::npos);
}
