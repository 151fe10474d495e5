#ifndef TABREG_MODELS_HPP
#define TABREG_MODELS_HPP

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "tabreg/table.hpp"

namespace tabreg::models {

enum class Algorithm {
    ols,
    lasso,
    cart,
    random_forest,
    gbt,
    linear_svr,
    voting,
    baseline_column,
};

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

/// Algorithm choice plus hyperparameters. Unknown parameter names are
/// rejected; every algorithm's full parameter set and defaults live in
/// `defaults()`:
///
/// max_depth counts split levels: -1 = unlimited, 0 = a single leaf.
///
///   ols            : (none)
///   lasso          : alpha=1.0, tol=1e-7, max_iter=100000
///   cart           : max_depth=-1, min_samples_leaf=1
///   random_forest  : n_trees=100, max_depth=-1, feature_subset_size=0
///                    (0 = ceil(p/3)), min_samples_leaf=1, bootstrap=1
///   gbt            : n_rounds=200, learning_rate=0.1, max_depth=4,
///                    lambda=1.0, gamma=0, min_child_weight=1,
///                    early_stopping_rounds=0 (off), validation_fraction=0.1,
///                    base_score=nan (nan = mean of the training target)
///   linear_svr     : c=1.0, epsilon=0.1, max_iter=2000, tol=1e-6
///   voting         : (none; members default to random_forest, lasso, gbt)
///   baseline_column: (none; the appraisal-role column is resolved at fit)
struct RegressorSpec {
    Algorithm algorithm = Algorithm::ols;
    std::map<std::string, double> params;
    std::uint64_t seed = 0;
    std::vector<RegressorSpec> members; // voting only; empty = default trio

    void validate() const;
    double param(const std::string& name) const;
    static const std::map<std::string, double>& defaults(Algorithm a);
};

/// Flat binary-tree node; feature == -1 marks a leaf. Rows with
/// feature value <= threshold go left.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    double value = 0.0; // leaf prediction (mean or boosted leaf weight)
    double gain = 0.0;  // split quality: SSE reduction (cart/forest) or boosting gain
    int left = -1;
    int right = -1;
    std::int64_t n_samples = 0;
};

struct Tree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
        int i = 0;
        while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
            const TreeNode& nd = nodes[static_cast<std::size_t>(i)];
            i = row(nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }
    std::size_t leaf_count() const;
};

struct LinearModel {
    Eigen::VectorXd coefficients;
    double intercept = 0.0;
    double alpha = 0.0;          // lasso penalty; 0 for plain least squares
    Eigen::VectorXd feature_std; // training-data population std, for importances
    bool converged = true;
};

struct SvrModel {
    Eigen::VectorXd coefficients;
    double intercept = 0.0;
    Eigen::VectorXd feature_std;
    bool converged = true;
};

struct TreeEnsembleModel {
    std::vector<Tree> trees;
    bool boosted = false;       // boosted: base + lr * sum(trees); else mean over trees
    double base_score = 0.0;
    double learning_rate = 1.0;
    int rounds_used = 0;
};

struct BaselineModel {
    std::string column;
};

struct TrainedModel;

struct VotingModel {
    std::vector<TrainedModel> members;
};

struct TrainingMeta {
    std::uint64_t seed = 0;
    std::int64_t n_rows = 0;
    std::string timestamp; // informational; excluded from fingerprints
    int rounds_used = 0;
    std::vector<std::string> warnings;
};

/// A fitted estimator. predict consumes exactly feature_names, matched by
/// name, in any column order.
struct TrainedModel {
    RegressorSpec spec;
    std::vector<std::string> feature_names;
    std::variant<LinearModel, TreeEnsembleModel, SvrModel, VotingModel, BaselineModel> params;
    TrainingMeta meta;
};

/// Normalized per-feature importance: nonnegative, sums to 1 (all-zero in
/// the degenerate no-signal case).
struct ImportanceVector {
    std::vector<std::string> names;
    std::vector<double> scores;
};

struct GbtParams {
    int n_rounds = 200;
    double learning_rate = 0.1;
    int max_depth = 4;
    double lambda = 1.0;           // leaf L2
    double gamma = 0.0;            // per-leaf penalty
    double min_child_weight = 1.0; // minimum hessian sum per side
    int early_stopping_rounds = 0; // 0 = off
    double validation_fraction = 0.1;
    double base_score = std::numeric_limits<double>::quiet_NaN(); // nan = mean(y)
    std::uint64_t seed = 0;
};

// ---- matrix-level fits (X rows = samples, columns ordered as `names`) ----
// An empty `names` argument synthesizes f0..f{p-1} so that every fitted
// model carries one name per design column.

std::vector<std::string> default_feature_names(std::vector<std::string> names, Eigen::Index p);

/// Least squares via normal equations, intercept always included. A
/// rank-deficient design gets a ridge jitter of 1e-10 on the normal-equation
/// diagonal and a warning naming the dependent columns.
TrainedModel fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     std::vector<std::string> names = {});

/// Cyclic coordinate descent with soft thresholding on
/// (1/(2n))*||Xw - y||^2 + alpha*||w||_1. Features are standardized
/// internally (population std) and de-standardized on output; the intercept
/// is unpenalized. Converged when the largest standardized-coefficient
/// change in a sweep drops below tol; hitting max_iter returns the model
/// with a warning flag. At convergence the KKT conditions hold:
/// |x_j'r|/n <= alpha + tol for zero coefficients, = alpha*sign(w_j) +- tol
/// for nonzero ones.
TrainedModel fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha,
                       double tol = 1e-7, std::int64_t max_iter = 100000,
                       std::vector<std::string> names = {});

/// Greedy binary regression tree: splits maximize SSE reduction, candidate
/// thresholds are midpoints between consecutive distinct sorted values,
/// leaves predict the mean, exact ties break toward the lowest feature index
/// then lowest threshold. max_depth = 0 means unlimited.
TrainedModel fit_cart(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int max_depth = -1,
                      int min_samples_leaf = 1, std::vector<std::string> names = {});

/// Bootstrap-aggregated trees with a fresh random feature subset drawn at
/// every node. Per-tree seeds derive from (seed, tree index), so results do
/// not depend on scheduling. feature_subset_size 0 = ceil(p/3).
/// bootstrap=false is a test hook that fits every tree on all rows.
TrainedModel fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int n_trees,
                               int max_depth, int feature_subset_size, std::uint64_t seed,
                               int min_samples_leaf = 1, bool bootstrap = true,
                               std::vector<std::string> names = {});

/// Second-order boosting with squared-error loss (g = yhat - y, h = 1).
/// Leaf weights are -G/(H+lambda); a split is taken only when
/// gain = 0.5*[G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)] - gamma > 0.
/// With early_stopping_rounds set, a validation_fraction slice of the rows
/// is held out and boosting stops once its MSE has not improved for that
/// many rounds; the model keeps the best round count.
TrainedModel fit_gbt(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GbtParams& params,
                     std::vector<std::string> names = {});

/// Linear epsilon-insensitive SVR: minimizes
/// 0.5*||w||^2 + C * sum(max(0, |x_i'w + b - y_i| - epsilon)) by
/// deterministic full-batch subgradient descent on internally standardized
/// data, starting from w = 0, b = midrange(y), with step
/// s_t = 2 / ((1 + C~*n) * sqrt(t+1)) and best-iterate tracking.
TrainedModel fit_linear_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double c,
                            double epsilon, std::int64_t max_iter = 2000, double tol = 1e-6,
                            std::vector<std::string> names = {});

/// Fits every member on the full data; prediction is the arithmetic mean of
/// member predictions. A member failure aborts with the member named.
TrainedModel fit_voting(const std::vector<RegressorSpec>& member_specs, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& y, std::uint64_t seed,
                        std::vector<std::string> names = {});

// ---- table-level facade ----

/// Build the design matrix for the named columns (matched by name; order
/// given by `names`). Throws DataError listing absent columns; a missing
/// cell is an error naming the row, never imputed.
Eigen::MatrixXd design_matrix(const Table& t, const std::vector<std::string>& names);

/// Target column as a vector; throws if absent or containing missing cells.
Eigen::VectorXd target_vector(const Table& t);

/// Role-aware fit: features are the numeric-storage feature-role columns;
/// identifier and appraisal columns never enter the design. baseline_column
/// resolves the appraisal-role column and simply echoes it at predict time.
TrainedModel fit(const RegressorSpec& spec, const Table& train);

/// Spec-dispatched fit on an explicit design matrix (baseline_column is not
/// available here; it needs a table).
TrainedModel fit(const RegressorSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 std::vector<std::string> names);

Eigen::VectorXd predict(const TrainedModel& model, const Eigen::MatrixXd& X);
Eigen::VectorXd predict(const TrainedModel& model, const Table& rows);

/// Tree ensembles: total stored split gain per feature. Linear models:
/// |coefficient| * feature std. Voting: mean of member importances.
/// Normalized to sum 1; throws DataError for baseline_column.
ImportanceVector feature_importance(const TrainedModel& model);

} // namespace tabreg::models

#endif
