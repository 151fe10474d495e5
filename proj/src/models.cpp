#include <chrono>
#include <cmath>
#include <ctime>

#include "tabreg/models.hpp"
#include "tabreg/rng.hpp"

namespace tabreg::models {

std::vector<std::string> default_feature_names(std::vector<std::string> names, Eigen::Index p) {
    if (names.empty()) {
        names.reserve(static_cast<std::size_t>(p));
        for (Eigen::Index j = 0; j < p; ++j) names.push_back("f" + std::to_string(j));
    }
    if (names.size() != static_cast<std::size_t>(p)) {
        throw DataError("feature name count does not match the design matrix");
    }
    return names;
}

std::string current_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::ols: return "ols";
        case Algorithm::lasso: return "lasso";
        case Algorithm::cart: return "cart";
        case Algorithm::random_forest: return "random_forest";
        case Algorithm::gbt: return "gbt";
        case Algorithm::linear_svr: return "linear_svr";
        case Algorithm::voting: return "voting";
        case Algorithm::baseline_column: return "baseline_column";
    }
    return "unknown";
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "ols") return Algorithm::ols;
    if (s == "lasso") return Algorithm::lasso;
    if (s == "cart") return Algorithm::cart;
    if (s == "random_forest") return Algorithm::random_forest;
    if (s == "gbt") return Algorithm::gbt;
    if (s == "linear_svr") return Algorithm::linear_svr;
    if (s == "voting") return Algorithm::voting;
    if (s == "baseline_column") return Algorithm::baseline_column;
    throw ConfigError("unknown algorithm: " + s);
}

const std::map<std::string, double>& RegressorSpec::defaults(Algorithm a) {
    static const std::map<std::string, double> ols_d{};
    static const std::map<std::string, double> lasso_d{
        {"alpha", 1.0}, {"tol", 1e-7}, {"max_iter", 100000}};
    static const std::map<std::string, double> cart_d{{"max_depth", -1}, {"min_samples_leaf", 1}};
    static const std::map<std::string, double> forest_d{{"n_trees", 100},
                                                        {"max_depth", -1},
                                                        {"feature_subset_size", 0},
                                                        {"min_samples_leaf", 1},
                                                        {"bootstrap", 1}};
    static const std::map<std::string, double> gbt_d{
        {"n_rounds", 200},
        {"learning_rate", 0.1},
        {"max_depth", 4},
        {"lambda", 1.0},
        {"gamma", 0.0},
        {"min_child_weight", 1.0},
        {"early_stopping_rounds", 0},
        {"validation_fraction", 0.1},
        {"base_score", std::numeric_limits<double>::quiet_NaN()}};
    static const std::map<std::string, double> svr_d{
        {"c", 1.0}, {"epsilon", 0.1}, {"max_iter", 2000}, {"tol", 1e-6}};
    static const std::map<std::string, double> none_d{};
    switch (a) {
        case Algorithm::ols: return ols_d;
        case Algorithm::lasso: return lasso_d;
        case Algorithm::cart: return cart_d;
        case Algorithm::random_forest: return forest_d;
        case Algorithm::gbt: return gbt_d;
        case Algorithm::linear_svr: return svr_d;
        default: return none_d;
    }
}

void RegressorSpec::validate() const {
    const auto& allowed = defaults(algorithm);
    for (const auto& [name, value] : params) {
        (void)value;
        if (!allowed.count(name)) {
            throw ConfigError("unknown hyperparameter '" + name + "' for algorithm " +
                              to_string(algorithm));
        }
    }
    if (algorithm != Algorithm::voting && !members.empty()) {
        throw ConfigError("only voting specs may declare members");
    }
    for (const RegressorSpec& m : members) {
        if (m.algorithm == Algorithm::voting) throw ConfigError("voting members cannot be voting");
        m.validate();
    }
}

double RegressorSpec::param(const std::string& name) const {
    auto it = params.find(name);
    if (it != params.end()) return it->second;
    const auto& d = defaults(algorithm);
    auto dit = d.find(name);
    if (dit == d.end()) {
        throw ConfigError("unknown hyperparameter '" + name + "' for algorithm " +
                          to_string(algorithm));
    }
    return dit->second;
}

Eigen::MatrixXd design_matrix(const Table& t, const std::vector<std::string>& names) {
    std::string absent;
    for (const std::string& n : names) {
        if (!t.has_column(n)) absent += (absent.empty() ? "" : ", ") + n;
    }
    if (!absent.empty()) throw DataError("missing feature columns: " + absent);

    Eigen::MatrixXd X(static_cast<Eigen::Index>(t.n_rows()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
        const Column& c = t.column(names[j]);
        if (!c.is_numeric) throw DataError("feature column is not numeric: " + c.name);
        for (std::size_t r = 0; r < t.n_rows(); ++r) {
            if (c.is_missing(r)) {
                throw DataError("missing cell in feature '" + c.name + "' at row " +
                                std::to_string(r));
            }
            X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = c.numeric[r];
        }
    }
    return X;
}

Eigen::VectorXd target_vector(const Table& t) {
    const auto idx = t.target_index();
    if (!idx) throw DataError("table has no target column");
    const Column& c = t.column(*idx);
    Eigen::VectorXd y(static_cast<Eigen::Index>(t.n_rows()));
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        if (c.is_missing(r)) {
            throw DataError("missing cell in target at row " + std::to_string(r));
        }
        y(static_cast<Eigen::Index>(r)) = c.numeric[r];
    }
    return y;
}

namespace {

std::vector<RegressorSpec> default_voting_members(std::uint64_t seed) {
    std::vector<RegressorSpec> members(3);
    members[0].algorithm = Algorithm::random_forest;
    members[1].algorithm = Algorithm::lasso;
    members[2].algorithm = Algorithm::gbt;
    for (std::size_t i = 0; i < members.size(); ++i) members[i].seed = derive_seed(seed, i);
    return members;
}

} // namespace

TrainedModel fit(const RegressorSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 std::vector<std::string> names) {
    switch (spec.algorithm) {
        case Algorithm::ols:
            return fit_ols(X, y, std::move(names));
        case Algorithm::lasso: {
            TrainedModel m = fit_lasso(X, y, spec.param("alpha"), spec.param("tol"),
                                       static_cast<std::int64_t>(spec.param("max_iter")),
                                       std::move(names));
            m.spec = spec;
            return m;
        }
        case Algorithm::cart: {
            TrainedModel m = fit_cart(X, y, static_cast<int>(spec.param("max_depth")),
                                      static_cast<int>(spec.param("min_samples_leaf")),
                                      std::move(names));
            m.spec = spec;
            return m;
        }
        case Algorithm::random_forest: {
            TrainedModel m = fit_random_forest(
                X, y, static_cast<int>(spec.param("n_trees")),
                static_cast<int>(spec.param("max_depth")),
                static_cast<int>(spec.param("feature_subset_size")), spec.seed,
                static_cast<int>(spec.param("min_samples_leaf")), spec.param("bootstrap") != 0.0,
                std::move(names));
            m.spec = spec;
            return m;
        }
        case Algorithm::gbt: {
            GbtParams p;
            p.n_rounds = static_cast<int>(spec.param("n_rounds"));
            p.learning_rate = spec.param("learning_rate");
            p.max_depth = static_cast<int>(spec.param("max_depth"));
            p.lambda = spec.param("lambda");
            p.gamma = spec.param("gamma");
            p.min_child_weight = spec.param("min_child_weight");
            p.early_stopping_rounds = static_cast<int>(spec.param("early_stopping_rounds"));
            p.validation_fraction = spec.param("validation_fraction");
            p.base_score = spec.param("base_score");
            p.seed = spec.seed;
            TrainedModel m = fit_gbt(X, y, p, std::move(names));
            m.spec = spec;
            return m;
        }
        case Algorithm::linear_svr: {
            TrainedModel m = fit_linear_svr(X, y, spec.param("c"), spec.param("epsilon"),
                                            static_cast<std::int64_t>(spec.param("max_iter")),
                                            spec.param("tol"), std::move(names));
            m.spec = spec;
            return m;
        }
        case Algorithm::voting: {
            const auto& members = spec.members.empty() ? default_voting_members(spec.seed)
                                                       : spec.members;
            TrainedModel m = fit_voting(members, X, y, spec.seed, std::move(names));
            m.spec = spec;
            return m;
        }
        case Algorithm::baseline_column:
            throw ConfigError("baseline_column requires a table with an appraisal column");
    }
    throw ConfigError("unhandled algorithm");
}

TrainedModel fit_voting(const std::vector<RegressorSpec>& member_specs, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& y, std::uint64_t seed,
                        std::vector<std::string> names) {
    if (member_specs.size() < 2) throw ConfigError("voting needs at least 2 members");
    names = default_feature_names(std::move(names), X.cols());
    VotingModel voting;
    voting.members.reserve(member_specs.size());
    for (const RegressorSpec& ms : member_specs) {
        try {
            voting.members.push_back(fit(ms, X, y, names));
        } catch (const Error& e) {
            throw DataError("voting member '" + to_string(ms.algorithm) + "' failed: " + e.what());
        }
    }
    TrainedModel model;
    model.spec.algorithm = Algorithm::voting;
    model.spec.seed = seed;
    model.feature_names = std::move(names);
    model.params = std::move(voting);
    model.meta.seed = seed;
    model.meta.n_rows = X.rows();
    model.meta.timestamp = current_timestamp();
    return model;
}

TrainedModel fit(const RegressorSpec& spec, const Table& train) {
    spec.validate();
    if (spec.algorithm == Algorithm::baseline_column) {
        const auto idx = train.baseline_index();
        if (!idx) throw DataError("baseline_column: table has no appraisal-role column");
        TrainedModel model;
        model.spec = spec;
        model.feature_names = {train.column(*idx).name};
        model.params = BaselineModel{train.column(*idx).name};
        model.meta.n_rows = static_cast<std::int64_t>(train.n_rows());
        model.meta.timestamp = current_timestamp();
        return model;
    }
    std::vector<std::string> names = train.numeric_feature_names();
    if (names.empty()) throw DataError("no numeric feature columns to fit on");
    const Eigen::MatrixXd X = design_matrix(train, names);
    const Eigen::VectorXd y = target_vector(train);
    return fit(spec, X, y, std::move(names));
}

Eigen::VectorXd predict(const TrainedModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != static_cast<Eigen::Index>(model.feature_names.size())) {
        throw DataError("predict: expected " + std::to_string(model.feature_names.size()) +
                        " feature columns, got " + std::to_string(X.cols()));
    }
    if (const auto* lin = std::get_if<LinearModel>(&model.params)) {
        return (X * lin->coefficients).array() + lin->intercept;
    }
    if (const auto* svr = std::get_if<SvrModel>(&model.params)) {
        return (X * svr->coefficients).array() + svr->intercept;
    }
    if (const auto* ens = std::get_if<TreeEnsembleModel>(&model.params)) {
        Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), ens->boosted ? ens->base_score : 0.0);
        for (const Tree& tree : ens->trees) {
            const double scale = ens->boosted ? ens->learning_rate : 1.0;
            for (Eigen::Index r = 0; r < X.rows(); ++r) {
                out(r) += scale * tree.predict_row(X.row(r));
            }
        }
        if (!ens->boosted && !ens->trees.empty()) out /= static_cast<double>(ens->trees.size());
        return out;
    }
    if (const auto* voting = std::get_if<VotingModel>(&model.params)) {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
        for (const TrainedModel& m : voting->members) out += predict(m, X);
        return out / static_cast<double>(voting->members.size());
    }
    // baseline: the single design column is the appraisal column itself
    return X.col(0);
}

Eigen::VectorXd predict(const TrainedModel& model, const Table& rows) {
    if (rows.n_rows() == 0) return Eigen::VectorXd(0);
    return predict(model, design_matrix(rows, model.feature_names));
}

namespace {

void accumulate_tree_gains(const Tree& tree, std::vector<double>& acc) {
    for (const TreeNode& nd : tree.nodes) {
        if (nd.feature >= 0) acc[static_cast<std::size_t>(nd.feature)] += nd.gain;
    }
}

} // namespace

ImportanceVector feature_importance(const TrainedModel& model) {
    ImportanceVector iv;
    iv.names = model.feature_names;
    const std::size_t p = model.feature_names.size();
    iv.scores.assign(p, 0.0);

    if (std::holds_alternative<BaselineModel>(model.params)) {
        throw DataError("baseline_column model has no feature importances");
    }
    if (const auto* lin = std::get_if<LinearModel>(&model.params)) {
        for (std::size_t j = 0; j < p; ++j) {
            iv.scores[j] = std::abs(lin->coefficients(static_cast<Eigen::Index>(j))) *
                           lin->feature_std(static_cast<Eigen::Index>(j));
        }
    } else if (const auto* svr = std::get_if<SvrModel>(&model.params)) {
        for (std::size_t j = 0; j < p; ++j) {
            iv.scores[j] = std::abs(svr->coefficients(static_cast<Eigen::Index>(j))) *
                           svr->feature_std(static_cast<Eigen::Index>(j));
        }
    } else if (const auto* ens = std::get_if<TreeEnsembleModel>(&model.params)) {
        for (const Tree& tree : ens->trees) accumulate_tree_gains(tree, iv.scores);
    } else if (const auto* voting = std::get_if<VotingModel>(&model.params)) {
        for (const TrainedModel& m : voting->members) {
            const ImportanceVector mi = feature_importance(m);
            for (std::size_t j = 0; j < p; ++j) iv.scores[j] += mi.scores[j];
        }
    }

    double total = 0.0;
    for (double s : iv.scores) total += s;
    if (total > 0.0) {
        for (double& s : iv.scores) s /= total;
    }
    return iv;
}

} // namespace tabreg::models
