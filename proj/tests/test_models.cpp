#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "tabreg/models.hpp"
#include "tabreg/rng.hpp"
#include "tabreg/synth.hpp"

using namespace tabreg;
using namespace tabreg::models;
using doctest::Approx;

namespace {

// Seeded dense problem: y = X*w + intercept + noise.
struct Problem {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

Problem random_problem(std::uint64_t seed, Eigen::Index n, Eigen::Index p, double noise) {
    Rng rng(seed);
    Problem prob;
    prob.X.resize(n, p);
    Eigen::VectorXd w(p);
    for (Eigen::Index j = 0; j < p; ++j) w(j) = rng.normal() * 2;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) prob.X(i, j) = rng.normal();
    }
    prob.y = prob.X * w;
    for (Eigen::Index i = 0; i < n; ++i) prob.y(i) += 0.5 + noise * rng.normal();
    return prob;
}

double mse_of(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).squaredNorm() / static_cast<double>(a.size());
}

// Every midpoint between consecutive distinct sorted values of one feature.
std::vector<double> candidate_thresholds(const Eigen::MatrixXd& X, Eigen::Index feature) {
    std::vector<double> v(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) v[static_cast<std::size_t>(i)] = X(i, feature);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    std::vector<double> mids;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) mids.push_back(v[i] + 0.5 * (v[i + 1] - v[i]));
    return mids;
}

} // namespace

TEST_CASE("spec: unknown hyperparameters rejected, defaults documented") {
    RegressorSpec spec;
    spec.algorithm = Algorithm::gbt;
    spec.params["n_rounds"] = 10;
    CHECK_NOTHROW(spec.validate());
    spec.params["bogus"] = 1;
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    RegressorSpec lasso;
    lasso.algorithm = Algorithm::lasso;
    CHECK(lasso.param("alpha") == 1.0);
    CHECK_THROWS_AS(lasso.param("nope"), ConfigError);
}

TEST_CASE("ols: exact line") {
    Eigen::MatrixXd X(4, 1);
    X << 0, 1, 2, 3;
    Eigen::VectorXd y = 2.0 * X.col(0).array() + 1.0;
    const TrainedModel m = fit_ols(X, y);
    const auto& lin = std::get<LinearModel>(m.params);
    CHECK(lin.coefficients(0) == Approx(2.0).epsilon(1e-10));
    CHECK(lin.intercept == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("ols: constant target") {
    Eigen::MatrixXd X(5, 2);
    X << 1, 2, 3, 5, 5, 6, 7, 11, 9, 10; // full-rank design
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(5, 7.0);
    const TrainedModel m = fit_ols(X, y);
    const auto& lin = std::get<LinearModel>(m.params);
    CHECK(lin.coefficients.norm() == Approx(0.0).scale(1).epsilon(1e-9));
    CHECK(lin.intercept == Approx(7.0).epsilon(1e-9));
}

TEST_CASE("ols: RSS gradient vanishes at the solution") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Problem prob = random_problem(seed, 50, 3, 0.3);
        const TrainedModel m = fit_ols(prob.X, prob.y);
        const auto& lin = std::get<LinearModel>(m.params);
        const Eigen::VectorXd resid =
            prob.y - prob.X * lin.coefficients - Eigen::VectorXd::Constant(50, lin.intercept);
        // stationarity oracle: gradient of RSS is -2 [1 X]' r
        CHECK(std::abs(resid.sum()) < 1e-8);
        CHECK((prob.X.transpose() * resid).norm() < 1e-8);
    }
}

TEST_CASE("ols: rank-deficient design warns and names columns") {
    Eigen::MatrixXd X(6, 2);
    X.col(0) << 1, 2, 3, 4, 5, 6;
    X.col(1) = 3 * X.col(0);
    Eigen::VectorXd y = X.col(0);
    const TrainedModel m = fit_ols(X, y, {"f0", "f1"});
    REQUIRE_FALSE(m.meta.warnings.empty());
    CHECK(m.meta.warnings[0].find("rank-deficient") != std::string::npos);
    // prediction still reproduces y despite the ambiguous coefficients
    CHECK(mse_of(predict(m, X), y) < 1e-8);
}

TEST_CASE("lasso: alpha=0 matches ols") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Problem prob = random_problem(seed, 60, 4, 0.2);
        const TrainedModel ls = fit_lasso(prob.X, prob.y, 0.0, 1e-10, 200000);
        const TrainedModel ols = fit_ols(prob.X, prob.y);
        const auto& a = std::get<LinearModel>(ls.params);
        const auto& b = std::get<LinearModel>(ols.params);
        CHECK((a.coefficients - b.coefficients).lpNorm<Eigen::Infinity>() < 1e-6);
        CHECK(std::abs(a.intercept - b.intercept) < 1e-6);
    }
}

TEST_CASE("lasso: analytic one-dimensional soft threshold") {
    Eigen::MatrixXd X(2, 1);
    X << 1, -1;
    Eigen::VectorXd y(2);
    y << 2, -2;
    const TrainedModel m = fit_lasso(X, y, 0.5);
    const auto& lin = std::get<LinearModel>(m.params);
    // 1-D grid-scan oracle over w in [-5, 5], step 1e-4, on
    // (1/(2*2))||Xw - y||^2 + 0.5|w| = (w-2)^2/2 + 0.5|w|
    double best_w = 0, best_obj = 1e300;
    for (double w = -5.0; w <= 5.0; w += 1e-4) {
        const double obj = 0.5 * (w - 2) * (w - 2) + 0.5 * std::abs(w);
        if (obj < best_obj) {
            best_obj = obj;
            best_w = w;
        }
    }
    CHECK(best_w == Approx(1.5).epsilon(1e-3));
    CHECK(lin.coefficients(0) == Approx(1.5).epsilon(1e-6));
    CHECK(lin.intercept == Approx(0.0).scale(1).epsilon(1e-9));
}

TEST_CASE("lasso: null threshold zeroes every coefficient") {
    Rng rng(40);
    const Eigen::Index n = 50, p = 3;
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) X(i, j) = rng.normal();
    }
    // center and scale to unit population variance so the stated bound applies
    for (Eigen::Index j = 0; j < p; ++j) {
        X.col(j).array() -= X.col(j).mean();
        X.col(j) /= std::sqrt(X.col(j).squaredNorm() / static_cast<double>(n));
    }
    Eigen::VectorXd y = X.col(0) * 2.0;
    for (Eigen::Index i = 0; i < n; ++i) y(i) += 0.1 * rng.normal();
    y.array() -= y.mean();

    const double alpha_max = (X.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(n);
    const TrainedModel m = fit_lasso(X, y, alpha_max * 1.0001);
    const auto& lin = std::get<LinearModel>(m.params);
    CHECK(lin.coefficients.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("lasso: KKT conditions hold at convergence") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Problem prob = random_problem(seed + 100, 40, 5, 0.5);
        const double alpha = 0.3;
        const double tol = 1e-9;
        const TrainedModel m = fit_lasso(prob.X, prob.y, alpha, tol, 200000);
        const auto& lin = std::get<LinearModel>(m.params);
        REQUIRE(lin.converged);

        // check in the standardized space the solver works in
        const Eigen::Index n = prob.X.rows();
        Eigen::MatrixXd Xs = prob.X;
        for (Eigen::Index j = 0; j < Xs.cols(); ++j) {
            Xs.col(j).array() -= Xs.col(j).mean();
            const double sd = std::sqrt(Xs.col(j).squaredNorm() / static_cast<double>(n));
            if (sd > 0) Xs.col(j) /= sd;
        }
        Eigen::VectorXd w_std(lin.coefficients.size());
        for (Eigen::Index j = 0; j < w_std.size(); ++j) {
            w_std(j) = lin.coefficients(j) * lin.feature_std(j);
        }
        const Eigen::VectorXd yc = prob.y.array() - prob.y.mean();
        const Eigen::VectorXd r = yc - Xs * w_std;
        for (Eigen::Index j = 0; j < w_std.size(); ++j) {
            const double g = Xs.col(j).dot(r) / static_cast<double>(n);
            if (w_std(j) == 0.0) {
                CHECK(std::abs(g) <= alpha + 1e-6);
            } else {
                CHECK(g == Approx(alpha * (w_std(j) > 0 ? 1.0 : -1.0)).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("lasso: nonzero count non-increasing along an alpha grid") {
    const Problem prob = random_problem(77, 80, 6, 1.0);
    int prev = 7;
    for (double alpha : {0.01, 0.05, 0.1, 0.5, 1.0, 2.0, 5.0}) {
        const TrainedModel m = fit_lasso(prob.X, prob.y, alpha);
        const auto& lin = std::get<LinearModel>(m.params);
        int nz = 0;
        for (Eigen::Index j = 0; j < lin.coefficients.size(); ++j) {
            nz += lin.coefficients(j) != 0.0;
        }
        CHECK(nz <= prev);
        prev = nz;
    }
}

TEST_CASE("cart: constant target yields a single leaf") {
    Eigen::MatrixXd X(4, 1);
    X << 1, 2, 3, 4;
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(4, 5.0);
    const TrainedModel m = fit_cart(X, y);
    const auto& ens = std::get<TreeEnsembleModel>(m.params);
    REQUIRE(ens.trees.size() == 1);
    CHECK(ens.trees[0].nodes.size() == 1);
    CHECK(ens.trees[0].nodes[0].value == 5.0);
}

TEST_CASE("cart: depth-1 split on the step fixture") {
    Eigen::MatrixXd X(4, 1);
    X << 1, 2, 3, 4;
    Eigen::VectorXd y(4);
    y << 0, 0, 10, 10;
    const TrainedModel m = fit_cart(X, y, 1);
    const auto& tree = std::get<TreeEnsembleModel>(m.params).trees[0];
    REQUIRE(tree.nodes.size() == 3);
    CHECK(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].threshold == Approx(2.5));

    // exhaustive split-search oracle over the 3 midpoints
    double best_thr = 0, best_red = -1;
    for (double thr : candidate_thresholds(X, 0)) {
        std::vector<double> left, right;
        for (Eigen::Index i = 0; i < 4; ++i) (X(i, 0) <= thr ? left : right).push_back(y(i));
        auto sse = [](const std::vector<double>& v) {
            double mean = 0;
            for (double x : v) mean += x;
            mean /= static_cast<double>(v.size());
            double s = 0;
            for (double x : v) s += (x - mean) * (x - mean);
            return s;
        };
        const double red = sse({0, 0, 10, 10}) - sse(left) - sse(right);
        if (red > best_red) {
            best_red = red;
            best_thr = thr;
        }
    }
    CHECK(best_thr == Approx(2.5));
    CHECK(tree.nodes[0].gain == Approx(best_red).epsilon(1e-12));

    const Eigen::VectorXd pred = predict(m, X);
    CHECK(pred(0) == 0.0);
    CHECK(pred(3) == 10.0);
}

TEST_CASE("cart: unlimited depth memorizes distinct rows") {
    const Problem prob = random_problem(8, 64, 2, 1.0);
    const TrainedModel m = fit_cart(prob.X, prob.y);
    CHECK(mse_of(predict(m, prob.X), prob.y) == Approx(0.0).scale(1).epsilon(1e-18));
}

TEST_CASE("cart: tie-break picks the lowest feature index then lowest threshold") {
    // feature 1 duplicates feature 0, so every split gain ties
    Eigen::MatrixXd X(4, 2);
    X.col(0) << 1, 2, 3, 4;
    X.col(1) << 1, 2, 3, 4;
    Eigen::VectorXd y(4);
    y << 0, 0, 10, 10;
    const TrainedModel m = fit_cart(X, y, 1);
    const auto& tree = std::get<TreeEnsembleModel>(m.params).trees[0];
    CHECK(tree.nodes[0].feature == 0);
}

TEST_CASE("tree traversal of a hand-built 3-node tree") {
    Tree tree;
    tree.nodes.resize(3);
    tree.nodes[0].feature = 0;
    tree.nodes[0].threshold = 1.5;
    tree.nodes[0].left = 1;
    tree.nodes[0].right = 2;
    tree.nodes[1].value = -7;
    tree.nodes[2].value = 9;
    Eigen::RowVectorXd row(1);
    row << 1.0;
    CHECK(tree.predict_row(row) == -7);
    row << 1.5; // boundary goes left
    CHECK(tree.predict_row(row) == -7);
    row << 2.0;
    CHECK(tree.predict_row(row) == 9);
}

TEST_CASE("random forest: degenerates to cart") {
    const Problem prob = random_problem(9, 40, 3, 0.5);
    const TrainedModel forest = fit_random_forest(prob.X, prob.y, 1, -1,
                                                  static_cast<int>(prob.X.cols()), 123, 1,
                                                  /*bootstrap=*/false);
    const TrainedModel cart = fit_cart(prob.X, prob.y);
    CHECK((predict(forest, prob.X) - predict(cart, prob.X)).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("random forest: same seed, same predictions; different seed differs") {
    const Problem prob = random_problem(10, 80, 4, 1.0);
    const TrainedModel a = fit_random_forest(prob.X, prob.y, 20, -1, 0, 42);
    const TrainedModel b = fit_random_forest(prob.X, prob.y, 20, -1, 0, 42);
    const TrainedModel c = fit_random_forest(prob.X, prob.y, 20, -1, 0, 43);
    CHECK((predict(a, prob.X) - predict(b, prob.X)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((predict(a, prob.X) - predict(c, prob.X)).lpNorm<Eigen::Infinity>() > 0.0);
}

TEST_CASE("random forest: variance reduction vs a single deep tree") {
    // noisy fixture: forest test MSE must not exceed the single tree's
    SynthSpec spec = SynthSpec::bundled_default();
    spec.seed = 2024;
    spec.corruption = {};
    const SynthResult data = synthesize_dataset(spec, 1200);
    const std::vector<std::string> names = data.table.numeric_feature_names();
    const Eigen::MatrixXd X = design_matrix(data.table, names);
    const Eigen::VectorXd y = target_vector(data.table);
    const Eigen::Index n_train = 900;
    const Eigen::MatrixXd Xtr = X.topRows(n_train), Xte = X.bottomRows(X.rows() - n_train);
    const Eigen::VectorXd ytr = y.head(n_train), yte = y.tail(y.size() - n_train);

    const TrainedModel tree = fit_cart(Xtr, ytr);
    const TrainedModel forest = fit_random_forest(Xtr, ytr, 100, -1, 0, 7);
    const double tree_mse = mse_of(predict(tree, Xte), yte);
    const double forest_mse = mse_of(predict(forest, Xte), yte);
    CHECK(forest_mse <= tree_mse);
}

TEST_CASE("gbt: one round, depth 0, lambda 0, eta 1 predicts the mean") {
    Eigen::MatrixXd X(5, 1);
    X << 1, 2, 3, 4, 5;
    Eigen::VectorXd y(5);
    y << 2, 4, 6, 8, 10;
    GbtParams params;
    params.n_rounds = 1;
    params.max_depth = 0;
    params.lambda = 0;
    params.learning_rate = 1;
    params.base_score = 0;
    const TrainedModel m = fit_gbt(X, y, params);
    const Eigen::VectorXd pred = predict(m, X);
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(pred(i) == 6.0);
}

TEST_CASE("gbt: leaf weight formula on a two-point leaf") {
    // leaf with y = [2, 4], base 0, lambda 2: G = -6, H = 2, w* = 6/(2+2)
    Eigen::MatrixXd X(2, 1);
    X << 1, 1; // indistinguishable rows force a single leaf
    Eigen::VectorXd y(2);
    y << 2, 4;
    GbtParams params;
    params.n_rounds = 1;
    params.max_depth = 3;
    params.lambda = 2;
    params.learning_rate = 1;
    params.base_score = 0;
    const TrainedModel m = fit_gbt(X, y, params);
    const auto& tree = std::get<TreeEnsembleModel>(m.params).trees[0];
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].value == Approx(1.5).epsilon(1e-12));
}

TEST_CASE("gbt: split gains match the exhaustive-partition oracle") {
    Eigen::MatrixXd X(4, 1);
    X << 1, 2, 3, 4;
    Eigen::VectorXd y(4);
    y << 0, 0, 10, 10;
    GbtParams params;
    params.n_rounds = 3;
    params.max_depth = 2;
    params.lambda = 1.0;
    params.gamma = 0.1;
    params.learning_rate = 0.5;
    params.base_score = 0;
    const TrainedModel m = fit_gbt(X, y, params);
    const auto& ens = std::get<TreeEnsembleModel>(m.params);

    // replay boosting: maintain yhat, recompute every node's (G, H) by
    // routing rows, and compare each accepted split against brute force
    Eigen::VectorXd yhat = Eigen::VectorXd::Constant(4, params.base_score);
    for (const Tree& tree : ens.trees) {
        const Eigen::VectorXd g = yhat - y;
        std::vector<std::vector<int>> reach(tree.nodes.size());
        for (int i = 0; i < 4; ++i) {
            int node = 0;
            reach[0].push_back(i);
            while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
                const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
                node = X(i, nd.feature) <= nd.threshold ? nd.left : nd.right;
                reach[static_cast<std::size_t>(node)].push_back(i);
            }
        }
        for (std::size_t nid = 0; nid < tree.nodes.size(); ++nid) {
            const auto& nd = tree.nodes[nid];
            double G = 0, H = 0;
            for (int i : reach[nid]) {
                G += g(i);
                H += 1;
            }
            if (nd.feature < 0) {
                CHECK(nd.value == Approx(-G / (H + params.lambda)).epsilon(1e-12));
                // leaf optimality: the quadratic round objective
                // G*w + 0.5*(H+lambda)*w^2 never decreases under +-delta
                auto obj = [&](double w) { return G * w + 0.5 * (H + params.lambda) * w * w; };
                CHECK(obj(nd.value + 1e-3) >= obj(nd.value) - 1e-15);
                CHECK(obj(nd.value - 1e-3) >= obj(nd.value) - 1e-15);
                continue;
            }
            // exhaustive-partition oracle over every candidate midpoint
            double best_gain = 0;
            for (double thr : candidate_thresholds(X, nd.feature)) {
                double GL = 0, HL = 0;
                for (int i : reach[nid]) {
                    if (X(i, nd.feature) <= thr) {
                        GL += g(i);
                        HL += 1;
                    }
                }
                const double GR = G - GL, HR = H - HL;
                if (HL < params.min_child_weight || HR < params.min_child_weight) continue;
                const double gain = 0.5 * (GL * GL / (HL + params.lambda) +
                                           GR * GR / (HR + params.lambda) -
                                           G * G / (H + params.lambda)) -
                                    params.gamma;
                best_gain = std::max(best_gain, gain);
            }
            CHECK(nd.gain == Approx(best_gain).epsilon(1e-10));
        }
        for (int i = 0; i < 4; ++i) {
            Eigen::RowVectorXd row = X.row(i);
            yhat(i) += params.learning_rate * tree.predict_row(row);
        }
    }
}

TEST_CASE("gbt: early stopping caps the round count") {
    const Problem prob = random_problem(55, 300, 3, 1.0);
    GbtParams params;
    params.n_rounds = 400;
    params.max_depth = 3;
    params.early_stopping_rounds = 10;
    params.seed = 5;
    const TrainedModel m = fit_gbt(prob.X, prob.y, params);
    const auto& ens = std::get<TreeEnsembleModel>(m.params);
    CHECK(ens.rounds_used <= 400);
    CHECK(ens.rounds_used == static_cast<int>(ens.trees.size()));
    CHECK(m.meta.rounds_used == ens.rounds_used);
    // the detector should trip well before the cap on this noisy fixture
    CHECK(ens.rounds_used < 400);
}

TEST_CASE("svr: wide tube collapses to the midrange constant") {
    Eigen::MatrixXd X(6, 1);
    X << 1, 2, 3, 4, 5, 6;
    Eigen::VectorXd y(6);
    y << 1, 3, 2, 8, 5, 4;
    const double eps = (8.0 - 1.0) / 2.0 + 0.01;
    const TrainedModel m = fit_linear_svr(X, y, 1.0, eps);
    const auto& svr = std::get<SvrModel>(m.params);
    CHECK(svr.coefficients(0) == Approx(0.0).scale(1).epsilon(1e-12));
    CHECK(svr.intercept == Approx(4.5).epsilon(1e-9)); // midrange of y
}

TEST_CASE("svr: objective within 1e-3 of a 2-D grid-scan oracle") {
    Rng rng(3);
    const Eigen::Index n = 60;
    Eigen::MatrixXd X(n, 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = rng.normal();
        y(i) = 1.7 * X(i, 0) + 0.3 + 0.2 * rng.normal();
    }
    const double c = 1.0, eps = 0.1;
    const TrainedModel m = fit_linear_svr(X, y, c, eps, 20000);
    const auto& svr = std::get<SvrModel>(m.params);

    auto objective = [&](double w, double b) {
        double loss = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            loss += std::max(0.0, std::abs(X(i, 0) * w + b - y(i)) - eps);
        }
        return 0.5 * w * w + c * loss;
    };
    // 200x200 grid over a bracketing box
    double grid_best = 1e300;
    for (int iw = 0; iw <= 200; ++iw) {
        for (int ib = 0; ib <= 200; ++ib) {
            const double w = -1.0 + 4.0 * iw / 200.0; // [-1, 3]
            const double b = -2.0 + 4.0 * ib / 200.0; // [-2, 2]
            grid_best = std::min(grid_best, objective(w, b));
        }
    }
    CHECK(objective(svr.coefficients(0), svr.intercept) <= grid_best + 1e-3);
}

TEST_CASE("svr: large C recovers the true slope on noiseless data") {
    Rng rng(12);
    const Eigen::Index n = 100;
    Eigen::MatrixXd X(n, 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = rng.normal() * 2;
        y(i) = 3.0 * X(i, 0) - 1.0;
    }
    const TrainedModel m = fit_linear_svr(X, y, 1e5, 1e-3, 60000);
    const auto& svr = std::get<SvrModel>(m.params);
    CHECK(svr.coefficients(0) == Approx(3.0).epsilon(1e-2));
    CHECK(svr.intercept == Approx(-1.0).epsilon(1e-2));
}

TEST_CASE("voting: stub members average; identical members collapse") {
    const Problem prob = random_problem(60, 50, 2, 0.1);
    std::vector<RegressorSpec> members(2);
    members[0].algorithm = Algorithm::ols;
    members[1].algorithm = Algorithm::ols;
    const TrainedModel voting = fit_voting(members, prob.X, prob.y, 7);
    const TrainedModel single = fit_ols(prob.X, prob.y);
    CHECK((predict(voting, prob.X) - predict(single, prob.X)).lpNorm<Eigen::Infinity>() < 1e-12);

    // two constant stubs at 10 and 20 average to 15 (gbt root stumps)
    Eigen::MatrixXd X1(4, 1);
    X1 << 1, 2, 3, 4;
    GbtParams p10;
    p10.n_rounds = 1;
    p10.max_depth = 0;
    p10.lambda = 0;
    p10.learning_rate = 1;
    p10.base_score = 0;
    const TrainedModel ten = fit_gbt(X1, Eigen::VectorXd::Constant(4, 10.0), p10);
    const TrainedModel twenty = fit_gbt(X1, Eigen::VectorXd::Constant(4, 20.0), p10);
    VotingModel stub;
    stub.members = {ten, twenty};
    TrainedModel combined;
    combined.spec.algorithm = Algorithm::voting;
    combined.feature_names = {"x"};
    combined.params = stub;
    const Eigen::VectorXd pred = predict(combined, X1);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(pred(i) == Approx(15.0).epsilon(1e-12));
}

TEST_CASE("voting: ensemble test MSE no worse than the worst member") {
    SynthSpec spec = SynthSpec::bundled_default();
    spec.seed = 31;
    spec.corruption = {};
    const SynthResult data = synthesize_dataset(spec, 800);
    const std::vector<std::string> names = data.table.numeric_feature_names();
    const Eigen::MatrixXd X = design_matrix(data.table, names);
    const Eigen::VectorXd y = target_vector(data.table);
    const Eigen::MatrixXd Xtr = X.topRows(600), Xte = X.bottomRows(200);
    const Eigen::VectorXd ytr = y.head(600), yte = y.tail(200);

    std::vector<RegressorSpec> members(3);
    members[0].algorithm = Algorithm::random_forest;
    members[0].params["n_trees"] = 30;
    members[0].seed = 1;
    members[1].algorithm = Algorithm::lasso;
    members[2].algorithm = Algorithm::gbt;
    members[2].params["n_rounds"] = 60;
    members[2].seed = 2;

    double worst = 0;
    for (const RegressorSpec& ms : members) {
        const TrainedModel m = fit(ms, Xtr, ytr, names);
        worst = std::max(worst, mse_of(predict(m, Xte), yte));
    }
    const TrainedModel voting = fit_voting(members, Xtr, ytr, 7, names);
    CHECK(mse_of(predict(voting, Xte), yte) <= worst);
}

TEST_CASE("baseline: echoes the appraisal column") {
    SynthSpec spec = SynthSpec::bundled_default();
    spec.corruption = {};
    // price = aprtot exactly
    spec.ground_truth.coefficients = {{"aprtot", 1.0}};
    spec.ground_truth.noise_std = 0;
    spec.ground_truth.nonlinearity = GroundTruth::Nonlinearity::none;
    const SynthResult data = synthesize_dataset(spec, 100);

    RegressorSpec bspec;
    bspec.algorithm = Algorithm::baseline_column;
    const TrainedModel m = fit(bspec, data.table);
    const Eigen::VectorXd pred = predict(m, data.table);
    const Column& aprtot = data.table.column("aprtot");
    for (std::size_t r = 0; r < 100; ++r) {
        CHECK(pred(static_cast<Eigen::Index>(r)) == aprtot.numeric[r]);
    }
    // R^2 of the baseline is exactly 1 here
    const Eigen::VectorXd y = target_vector(data.table);
    CHECK((pred - y).lpNorm<Eigen::Infinity>() == 0.0);

    CHECK_THROWS_AS(feature_importance(m), DataError);
}

TEST_CASE("predict: name matching, column order irrelevance, errors") {
    const Problem prob = random_problem(70, 30, 2, 0.1);
    const TrainedModel m = fit_ols(prob.X, prob.y, {"a", "b"});

    std::vector<Column> cols;
    std::vector<double> a(30), b(30);
    for (Eigen::Index i = 0; i < 30; ++i) {
        a[static_cast<std::size_t>(i)] = prob.X(i, 0);
        b[static_cast<std::size_t>(i)] = prob.X(i, 1);
    }
    // deliberately reversed column order
    cols.push_back(Column::make_numeric("b", ColumnRole::numeric_feature, b));
    cols.push_back(Column::make_numeric("a", ColumnRole::numeric_feature, a));
    const Table t{std::move(cols)};
    CHECK((predict(m, t) - predict(m, prob.X)).lpNorm<Eigen::Infinity>() == 0.0);

    // deterministic repeat
    CHECK((predict(m, t) - predict(m, t)).lpNorm<Eigen::Infinity>() == 0.0);

    // 0-row table
    const Table empty = t.select_rows({});
    CHECK(predict(m, empty).size() == 0);

    // missing column listed by name
    const Table only_a = t.select_columns({"a"});
    CHECK_THROWS_WITH_AS(predict(m, only_a), doctest::Contains("b"), DataError);

    // missing cell reports the row
    std::vector<Column> holed;
    holed.push_back(Column::make_numeric("a", ColumnRole::numeric_feature, a));
    holed.push_back(Column::make_numeric("b", ColumnRole::numeric_feature, b));
    holed[1].missing[3] = 1;
    const Table t_holed{std::move(holed)};
    CHECK_THROWS_WITH_AS(predict(m, t_holed), doctest::Contains("row 3"), DataError);
}

TEST_CASE("importance: single split, constant feature, normalization") {
    Eigen::MatrixXd X(4, 2);
    X.col(0) << 1, 2, 3, 4;
    X.col(1) << 5, 5, 5, 5; // constant, cannot split
    Eigen::VectorXd y(4);
    y << 0, 0, 10, 10;
    const TrainedModel m = fit_cart(X, y, 1, 1, {"f", "g"});
    const ImportanceVector iv = feature_importance(m);
    CHECK(iv.scores[0] == Approx(1.0).epsilon(1e-12));
    CHECK(iv.scores[1] == 0.0);

    SUBCASE("forest importances sum to 1") {
        const Problem prob = random_problem(80, 100, 5, 1.0);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const TrainedModel forest = fit_random_forest(prob.X, prob.y, 20, -1, 2, seed);
            const ImportanceVector fi = feature_importance(forest);
            double total = 0;
            for (double s : fi.scores) {
                CHECK(s >= 0.0);
                total += s;
            }
            CHECK(total == Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("importance: linear models use |coefficient| * feature std") {
    Rng rng(90);
    Eigen::MatrixXd X(200, 2);
    for (Eigen::Index i = 0; i < 200; ++i) {
        X(i, 0) = rng.normal() * 10; // large scale, small coefficient
        X(i, 1) = rng.normal();      // small scale, large coefficient
    }
    Eigen::VectorXd y = 0.5 * X.col(0) + 5.0 * X.col(1);
    const TrainedModel m = fit_ols(X, y, {"wide", "steep"});
    const ImportanceVector iv = feature_importance(m);
    const auto& lin = std::get<LinearModel>(m.params);
    const double raw0 = std::abs(lin.coefficients(0)) * lin.feature_std(0);
    const double raw1 = std::abs(lin.coefficients(1)) * lin.feature_std(1);
    CHECK(iv.scores[0] == Approx(raw0 / (raw0 + raw1)).epsilon(1e-9));
    CHECK(iv.scores[1] == Approx(raw1 / (raw0 + raw1)).epsilon(1e-9));
}

TEST_CASE("fits are deterministic across repeated runs") {
    const Problem prob = random_problem(99, 150, 4, 1.0);
    RegressorSpec spec;
    spec.algorithm = Algorithm::gbt;
    spec.params["n_rounds"] = 30;
    spec.seed = 11;
    const TrainedModel a = fit(spec, prob.X, prob.y, {});
    const TrainedModel b = fit(spec, prob.X, prob.y, {});
    CHECK((predict(a, prob.X) - predict(b, prob.X)).lpNorm<Eigen::Infinity>() == 0.0);
}
