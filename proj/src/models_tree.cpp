#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <thread>

#include "tabreg/models.hpp"
#include "tabreg/rng.hpp"

// Tree growing shared by cart, random_forest and gbt. One criterion covers
// both: growing on (g, h) statistics with g = -y, h = 1, lambda = gamma = 0
// reproduces the SSE-reduction tree whose leaves predict the mean, while
// boosting passes its own gradients and regularizers.

namespace tabreg::models {

namespace {

struct GrowthParams {
    int max_depth = -1;            // -1 unlimited, 0 = single leaf
    double min_child_hess = 1.0;   // minimum hessian sum (= row count when h = 1) per side
    double lambda = 0.0;
    double gamma = 0.0;
    int feature_subset = 0;        // 0 = all features, else fresh per-node subset
    double gain_scale = 1.0;       // multiplier on the stored node gain
};

class TreeGrower {
public:
    TreeGrower(const Eigen::MatrixXd& X, const Eigen::VectorXd& g, const Eigen::VectorXd& h,
               const GrowthParams& params, Rng* rng)
        : X_(X), g_(g), h_(h), params_(params), rng_(rng) {}

    Tree grow(std::vector<std::size_t> rows) {
        tree_.nodes.clear();
        grow_node(std::move(rows), 0);
        return std::move(tree_);
    }

private:
    struct Cell {
        double v, g, h;
    };

    struct BestSplit {
        double gain = 0.0;
        int feature = -1;
        double threshold = 0.0;
    };

    int grow_node(std::vector<std::size_t> rows, int depth) {
        double G = 0.0, H = 0.0;
        for (std::size_t r : rows) {
            G += g_(static_cast<Eigen::Index>(r));
            H += h_(static_cast<Eigen::Index>(r));
        }
        const int node_id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        tree_.nodes[static_cast<std::size_t>(node_id)].value = -G / (H + params_.lambda);
        tree_.nodes[static_cast<std::size_t>(node_id)].n_samples =
            static_cast<std::int64_t>(rows.size());

        const bool depth_ok = params_.max_depth < 0 || depth < params_.max_depth;
        if (!depth_ok || rows.size() < 2) return node_id;

        const BestSplit best = find_best_split(rows, G, H);
        if (best.feature < 0) return node_id;

        std::vector<std::size_t> left, right;
        left.reserve(rows.size());
        right.reserve(rows.size());
        for (std::size_t r : rows) {
            if (X_(static_cast<Eigen::Index>(r), best.feature) <= best.threshold) left.push_back(r);
            else right.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        const int left_id = grow_node(std::move(left), depth + 1);
        const int right_id = grow_node(std::move(right), depth + 1);
        TreeNode& nd = tree_.nodes[static_cast<std::size_t>(node_id)];
        nd.feature = best.feature;
        nd.threshold = best.threshold;
        nd.gain = params_.gain_scale * best.gain;
        nd.left = left_id;
        nd.right = right_id;
        return node_id;
    }

    BestSplit find_best_split(const std::vector<std::size_t>& rows, double G, double H) {
        const auto p = static_cast<int>(X_.cols());
        std::vector<int> candidates;
        if (params_.feature_subset > 0 && params_.feature_subset < p) {
            auto drawn = rng_->sample_without_replacement(static_cast<std::size_t>(p),
                                                          static_cast<std::size_t>(params_.feature_subset));
            candidates.assign(drawn.begin(), drawn.end());
            std::sort(candidates.begin(), candidates.end()); // ties still break toward the lowest index
        } else {
            candidates.resize(static_cast<std::size_t>(p));
            std::iota(candidates.begin(), candidates.end(), 0);
        }

        BestSplit best;
        const double parent_score = G * G / (H + params_.lambda);
        std::vector<Cell> cells(rows.size());
        for (int f : candidates) {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const auto r = static_cast<Eigen::Index>(rows[i]);
                cells[i] = {X_(r, f), g_(r), h_(r)};
            }
            std::sort(cells.begin(), cells.end(),
                      [](const Cell& a, const Cell& b) { return a.v < b.v; });
            double GL = 0.0, HL = 0.0;
            for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
                GL += cells[i].g;
                HL += cells[i].h;
                if (cells[i].v == cells[i + 1].v) continue; // only between distinct values
                const double GR = G - GL, HR = H - HL;
                if (HL < params_.min_child_hess || HR < params_.min_child_hess) continue;
                const double gain = 0.5 * (GL * GL / (HL + params_.lambda) +
                                           GR * GR / (HR + params_.lambda) - parent_score) -
                                    params_.gamma;
                if (gain > 0.0 && gain > best.gain) {
                    best.gain = gain;
                    best.feature = f;
                    best.threshold = cells[i].v + 0.5 * (cells[i + 1].v - cells[i].v);
                }
            }
        }
        return best;
    }

    const Eigen::MatrixXd& X_;
    const Eigen::VectorXd& g_;
    const Eigen::VectorXd& h_;
    const GrowthParams& params_;
    Rng* rng_;
    Tree tree_;
};

std::vector<std::size_t> all_rows(Eigen::Index n) {
    std::vector<std::size_t> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t workers = std::min({hw, n, std::size_t{8}});
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace

// Defined in models.cpp; shared by every fit path.
std::string current_timestamp();

std::size_t Tree::leaf_count() const {
    std::size_t n = 0;
    for (const TreeNode& nd : nodes) n += nd.feature < 0;
    return n;
}

TrainedModel fit_cart(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int max_depth,
                      int min_samples_leaf, std::vector<std::string> names) {
    if (X.rows() < 1) throw DataError("fit_cart needs at least 1 row");
    if (X.rows() != y.size()) throw DataError("fit_cart: X/y row mismatch");
    if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
    names = default_feature_names(std::move(names), X.cols());

    GrowthParams gp;
    gp.max_depth = max_depth;
    gp.min_child_hess = static_cast<double>(min_samples_leaf);
    gp.gain_scale = 2.0; // stored gains are true SSE reductions
    const Eigen::VectorXd g = -y;
    const Eigen::VectorXd h = Eigen::VectorXd::Ones(y.size());
    TreeGrower grower(X, g, h, gp, nullptr);

    TrainedModel model;
    model.spec.algorithm = Algorithm::cart;
    model.feature_names = std::move(names);
    TreeEnsembleModel ensemble;
    ensemble.trees.push_back(grower.grow(all_rows(X.rows())));
    model.params = std::move(ensemble);
    model.meta.n_rows = X.rows();
    model.meta.timestamp = current_timestamp();
    return model;
}

TrainedModel fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int n_trees,
                               int max_depth, int feature_subset_size, std::uint64_t seed,
                               int min_samples_leaf, bool bootstrap,
                               std::vector<std::string> names) {
    if (n_trees < 1) throw ConfigError("random forest needs n_trees >= 1");
    if (X.rows() < 1) throw DataError("fit_random_forest needs at least 1 row");
    if (X.rows() != y.size()) throw DataError("fit_random_forest: X/y row mismatch");
    const auto p = static_cast<int>(X.cols());
    if (feature_subset_size < 0 || feature_subset_size > p) {
        throw ConfigError("feature_subset_size must lie in [0, n_features]");
    }
    const int subset = feature_subset_size == 0 ? (p + 2) / 3 : feature_subset_size;
    names = default_feature_names(std::move(names), X.cols());

    const Eigen::VectorXd g = -y;
    const Eigen::VectorXd h = Eigen::VectorXd::Ones(y.size());
    const auto n = static_cast<std::size_t>(X.rows());

    std::vector<Tree> trees(static_cast<std::size_t>(n_trees));
    parallel_for(trees.size(), [&](std::size_t t) {
        Rng rng(derive_seed(seed, t));
        std::vector<std::size_t> rows;
        if (bootstrap) {
            rows.reserve(n);
            for (std::size_t i = 0; i < n; ++i) {
                rows.push_back(static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(n) - 1)));
            }
        } else {
            rows = all_rows(X.rows());
        }
        GrowthParams gp;
        gp.max_depth = max_depth;
        gp.min_child_hess = static_cast<double>(min_samples_leaf);
        gp.feature_subset = subset;
        gp.gain_scale = 2.0;
        TreeGrower grower(X, g, h, gp, &rng);
        trees[t] = grower.grow(std::move(rows));
    });

    TrainedModel model;
    model.spec.algorithm = Algorithm::random_forest;
    model.spec.seed = seed;
    model.feature_names = std::move(names);
    TreeEnsembleModel ensemble;
    ensemble.trees = std::move(trees);
    model.params = std::move(ensemble);
    model.meta.seed = seed;
    model.meta.n_rows = X.rows();
    model.meta.timestamp = current_timestamp();
    return model;
}

TrainedModel fit_gbt(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GbtParams& params,
                     std::vector<std::string> names) {
    if (X.rows() < 1) throw DataError("fit_gbt needs at least 1 row");
    if (X.rows() != y.size()) throw DataError("fit_gbt: X/y row mismatch");
    if (params.n_rounds < 1) throw ConfigError("gbt needs n_rounds >= 1");
    if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0)) {
        throw ConfigError("learning_rate must lie in (0, 1]");
    }
    if (params.lambda < 0 || params.gamma < 0 || params.min_child_weight < 0) {
        throw ConfigError("lambda, gamma and min_child_weight must be >= 0");
    }
    if (params.early_stopping_rounds < 0) throw ConfigError("early_stopping_rounds must be >= 0");
    names = default_feature_names(std::move(names), X.cols());

    const auto n = static_cast<std::size_t>(X.rows());
    std::vector<std::size_t> fit_rows = all_rows(X.rows());
    std::vector<std::size_t> val_rows;
    if (params.early_stopping_rounds > 0) {
        if (!(params.validation_fraction > 0.0 && params.validation_fraction < 1.0)) {
            throw ConfigError("validation_fraction must lie in (0, 1)");
        }
        auto n_val = static_cast<std::size_t>(
            std::llround(params.validation_fraction * static_cast<double>(n)));
        n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
        Rng rng(derive_seed(params.seed, 0xE5));
        std::vector<std::size_t> perm = rng.permutation(n);
        val_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
        fit_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_val), perm.end());
        std::sort(val_rows.begin(), val_rows.end());
        std::sort(fit_rows.begin(), fit_rows.end());
    }

    double base = params.base_score;
    if (std::isnan(base)) {
        double s = 0.0;
        for (std::size_t r : fit_rows) s += y(static_cast<Eigen::Index>(r));
        base = s / static_cast<double>(fit_rows.size());
    }

    Eigen::VectorXd yhat = Eigen::VectorXd::Constant(y.size(), base);
    Eigen::VectorXd g(y.size());
    const Eigen::VectorXd h = Eigen::VectorXd::Ones(y.size());

    GrowthParams gp;
    gp.max_depth = params.max_depth;
    gp.min_child_hess = params.min_child_weight;
    gp.lambda = params.lambda;
    gp.gamma = params.gamma;

    TreeEnsembleModel ensemble;
    ensemble.boosted = true;
    ensemble.base_score = base;
    ensemble.learning_rate = params.learning_rate;

    double best_mse = std::numeric_limits<double>::infinity();
    int best_round = 0;
    int since_best = 0;
    for (int round = 0; round < params.n_rounds; ++round) {
        g = yhat - y; // squared-error gradient; hessian is 1
        TreeGrower grower(X, g, h, gp, nullptr);
        Tree tree = grower.grow(fit_rows);
        for (Eigen::Index r = 0; r < X.rows(); ++r) {
            yhat(r) += params.learning_rate * tree.predict_row(X.row(r));
        }
        ensemble.trees.push_back(std::move(tree));

        if (!val_rows.empty()) {
            double mse = 0.0;
            for (std::size_t r : val_rows) {
                const auto i = static_cast<Eigen::Index>(r);
                mse += (yhat(i) - y(i)) * (yhat(i) - y(i));
            }
            mse /= static_cast<double>(val_rows.size());
            if (mse < best_mse) {
                best_mse = mse;
                best_round = round + 1;
                since_best = 0;
            } else if (++since_best >= params.early_stopping_rounds) {
                break;
            }
        }
    }
    if (!val_rows.empty()) {
        ensemble.trees.resize(static_cast<std::size_t>(std::max(1, best_round)));
    }
    ensemble.rounds_used = static_cast<int>(ensemble.trees.size());

    TrainedModel model;
    model.spec.algorithm = Algorithm::gbt;
    model.spec.seed = params.seed;
    model.feature_names = std::move(names);
    model.meta.seed = params.seed;
    model.meta.n_rows = X.rows();
    model.meta.rounds_used = ensemble.rounds_used;
    model.meta.timestamp = current_timestamp();
    model.params = std::move(ensemble);
    return model;
}

} // namespace tabreg::models
