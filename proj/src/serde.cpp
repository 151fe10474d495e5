#include "tabreg/serde.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace tabreg::serde {

using nlohmann::json;

json to_json(const models::RegressorSpec& spec) {
    json j;
    j["algorithm"] = models::to_string(spec.algorithm);
    j["seed"] = spec.seed;
    json params = json::object();
    for (const auto& [name, value] : spec.params) {
        if (!std::isnan(value)) params[name] = value; // nan marks "use the default"
    }
    j["params"] = params;
    if (!spec.members.empty()) {
        j["members"] = json::array();
        for (const auto& m : spec.members) j["members"].push_back(to_json(m));
    }
    return j;
}

models::RegressorSpec spec_from_json(const json& j) {
    models::RegressorSpec spec;
    spec.algorithm = models::algorithm_from_string(j.at("algorithm").get<std::string>());
    spec.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("params")) {
        for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it) {
            spec.params[it.key()] = it.value().get<double>();
        }
    }
    if (j.contains("members")) {
        for (const auto& mj : j.at("members")) spec.members.push_back(spec_from_json(mj));
    }
    spec.validate();
    return spec;
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Eigen::VectorXd vector_from_json(const json& a) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    return v;
}

json tree_to_json(const models::Tree& tree) {
    json nodes = json::array();
    for (const models::TreeNode& nd : tree.nodes) {
        nodes.push_back({nd.feature, nd.threshold, nd.value, nd.gain, nd.left, nd.right,
                         nd.n_samples});
    }
    return json{{"nodes", nodes}};
}

models::Tree tree_from_json(const json& j) {
    models::Tree tree;
    for (const auto& nj : j.at("nodes")) {
        models::TreeNode nd;
        nd.feature = nj.at(0).get<int>();
        nd.threshold = nj.at(1).get<double>();
        nd.value = nj.at(2).get<double>();
        nd.gain = nj.at(3).get<double>();
        nd.left = nj.at(4).get<int>();
        nd.right = nj.at(5).get<int>();
        nd.n_samples = nj.at(6).get<std::int64_t>();
        tree.nodes.push_back(nd);
    }
    return tree;
}

json meta_to_json(const models::TrainingMeta& meta) {
    return json{{"seed", meta.seed},
                {"n_rows", meta.n_rows},
                {"timestamp", meta.timestamp}, // informational, excluded from comparisons
                {"rounds_used", meta.rounds_used},
                {"warnings", meta.warnings}};
}

models::TrainingMeta meta_from_json(const json& j) {
    models::TrainingMeta meta;
    meta.seed = j.value("seed", std::uint64_t{0});
    meta.n_rows = j.value("n_rows", std::int64_t{0});
    meta.timestamp = j.value("timestamp", std::string());
    meta.rounds_used = j.value("rounds_used", 0);
    if (j.contains("warnings")) meta.warnings = j.at("warnings").get<std::vector<std::string>>();
    return meta;
}

} // namespace

json to_json(const models::TrainedModel& model) {
    json j;
    j["spec"] = to_json(model.spec);
    j["feature_names"] = model.feature_names;
    j["meta"] = meta_to_json(model.meta);

    if (const auto* lin = std::get_if<models::LinearModel>(&model.params)) {
        j["kind"] = "linear";
        j["model"] = {{"coefficients", vector_to_json(lin->coefficients)},
                      {"intercept", lin->intercept},
                      {"alpha", lin->alpha},
                      {"feature_std", vector_to_json(lin->feature_std)},
                      {"converged", lin->converged}};
    } else if (const auto* svr = std::get_if<models::SvrModel>(&model.params)) {
        j["kind"] = "svr";
        j["model"] = {{"coefficients", vector_to_json(svr->coefficients)},
                      {"intercept", svr->intercept},
                      {"feature_std", vector_to_json(svr->feature_std)},
                      {"converged", svr->converged}};
    } else if (const auto* ens = std::get_if<models::TreeEnsembleModel>(&model.params)) {
        j["kind"] = "tree_ensemble";
        json trees = json::array();
        for (const models::Tree& t : ens->trees) trees.push_back(tree_to_json(t));
        j["model"] = {{"trees", trees},
                      {"boosted", ens->boosted},
                      {"base_score", ens->base_score},
                      {"learning_rate", ens->learning_rate},
                      {"rounds_used", ens->rounds_used}};
    } else if (const auto* voting = std::get_if<models::VotingModel>(&model.params)) {
        j["kind"] = "voting";
        json members = json::array();
        for (const models::TrainedModel& m : voting->members) members.push_back(to_json(m));
        j["model"] = {{"members", members}};
    } else if (const auto* baseline = std::get_if<models::BaselineModel>(&model.params)) {
        j["kind"] = "baseline";
        j["model"] = {{"column", baseline->column}};
    }
    return j;
}

models::TrainedModel model_from_json(const json& j) {
    models::TrainedModel model;
    model.spec = spec_from_json(j.at("spec"));
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.meta = meta_from_json(j.at("meta"));

    const std::string kind = j.at("kind").get<std::string>();
    const json& mj = j.at("model");
    if (kind == "linear") {
        models::LinearModel lin;
        lin.coefficients = vector_from_json(mj.at("coefficients"));
        lin.intercept = mj.at("intercept").get<double>();
        lin.alpha = mj.value("alpha", 0.0);
        lin.feature_std = vector_from_json(mj.at("feature_std"));
        lin.converged = mj.value("converged", true);
        model.params = std::move(lin);
    } else if (kind == "svr") {
        models::SvrModel svr;
        svr.coefficients = vector_from_json(mj.at("coefficients"));
        svr.intercept = mj.at("intercept").get<double>();
        svr.feature_std = vector_from_json(mj.at("feature_std"));
        svr.converged = mj.value("converged", true);
        model.params = std::move(svr);
    } else if (kind == "tree_ensemble") {
        models::TreeEnsembleModel ens;
        for (const auto& tj : mj.at("trees")) ens.trees.push_back(tree_from_json(tj));
        ens.boosted = mj.at("boosted").get<bool>();
        ens.base_score = mj.at("base_score").get<double>();
        ens.learning_rate = mj.at("learning_rate").get<double>();
        ens.rounds_used = mj.value("rounds_used", 0);
        model.params = std::move(ens);
    } else if (kind == "voting") {
        models::VotingModel voting;
        for (const auto& memberj : mj.at("members")) {
            voting.members.push_back(model_from_json(memberj));
        }
        model.params = std::move(voting);
    } else if (kind == "baseline") {
        model.params = models::BaselineModel{mj.at("column").get<std::string>()};
    } else {
        throw ConfigError("unknown model kind in model file: " + kind);
    }
    return model;
}

json to_json(const features::EncodingMap& map) {
    json j;
    j["column"] = map.column;
    switch (map.kind) {
        case features::EncodingMap::Kind::ordinal_label: j["kind"] = "ordinal_label"; break;
        case features::EncodingMap::Kind::date_split: j["kind"] = "date_split"; break;
        case features::EncodingMap::Kind::mean_target: j["kind"] = "mean_target"; break;
    }
    j["categories"] = map.categories;
    j["category_means"] = map.category_means;
    j["global_mean"] = map.global_mean;
    j["smoothing_m"] = map.smoothing_m;
    return j;
}

features::EncodingMap encoding_map_from_json(const json& j) {
    features::EncodingMap map;
    map.column = j.at("column").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ordinal_label") map.kind = features::EncodingMap::Kind::ordinal_label;
    else if (kind == "date_split") map.kind = features::EncodingMap::Kind::date_split;
    else if (kind == "mean_target") map.kind = features::EncodingMap::Kind::mean_target;
    else throw ConfigError("unknown encoder kind: " + kind);
    map.categories = j.value("categories", std::vector<std::string>{});
    if (j.contains("category_means")) {
        for (auto it = j.at("category_means").begin(); it != j.at("category_means").end(); ++it) {
            map.category_means[it.key()] = it.value().get<double>();
        }
    }
    map.global_mean = j.value("global_mean", 0.0);
    map.smoothing_m = j.value("smoothing_m", 10.0);
    return map;
}

json to_json(const features::BinModel& model) {
    json j;
    j["spec"] = {{"n_bins", model.spec.n_bins},
                 {"strategy", features::to_string(model.spec.strategy)},
                 {"edges", model.spec.edges}};
    j["mode"] = features::to_string(model.mode);
    j["bin_predictor"] = to_json(model.bin_predictor);
    j["removed_outliers"] = model.removed_outliers;
    j["fold_of_row"] = model.fold_of_row;
    j["step3_params"] = {{"a", model.step3_params.a},
                         {"b", model.step3_params.b},
                         {"k", model.step3_params.k}};
    return j;
}

features::BinModel bin_model_from_json(const json& j) {
    features::BinModel model;
    model.spec.n_bins = j.at("spec").at("n_bins").get<int>();
    model.spec.strategy = features::strategy_from_string(j.at("spec").at("strategy").get<std::string>());
    model.spec.edges = j.at("spec").at("edges").get<std::vector<double>>();
    model.mode = features::bin_mode_from_string(j.at("mode").get<std::string>());
    model.bin_predictor = model_from_json(j.at("bin_predictor"));
    model.removed_outliers = j.value("removed_outliers", std::vector<std::int64_t>{});
    model.fold_of_row = j.value("fold_of_row", std::vector<int>{});
    if (j.contains("step3_params")) {
        model.step3_params.a = j.at("step3_params").at("a").get<double>();
        model.step3_params.b = j.at("step3_params").at("b").get<double>();
        model.step3_params.k = j.at("step3_params").at("k").get<double>();
    }
    return model;
}

json to_json(const eval::MetricSet& m) {
    json j;
    if (m.r2) j["r2"] = *m.r2;
    else j["r2"] = nullptr;
    j["mse"] = m.mse;
    j["mae"] = m.mae;
    j["n"] = m.n;
    return j;
}

json to_json(const eval::ComparisonReport& report) {
    json j;
    j["dataset_fingerprint"] = report.dataset_fingerprint;
    j["bin_mode"] = report.bin_mode;
    j["bin_count"] = report.bin_count;
    j["binning_rows_removed"] = report.binning_rows_removed;
    json rows = json::array();
    for (const eval::ComparisonRow& row : report.rows) {
        json rj;
        rj["name"] = row.name;
        rj["algorithm"] = models::to_string(row.spec.algorithm);
        rj["before"] = row.before ? to_json(*row.before) : json(nullptr);
        rj["after"] = row.after ? to_json(*row.after) : json(nullptr);
        if (!row.error.empty()) rj["error"] = row.error;
        // wall-clock block: deliberately quarantined for byte-comparisons
        rj["timings"] = {{"fit_seconds", row.fit_seconds},
                         {"predict_seconds", row.predict_seconds}};
        rows.push_back(std::move(rj));
    }
    j["rows"] = std::move(rows);
    return j;
}

namespace {

std::string fmt_cell(const std::optional<eval::MetricSet>& m,
                     double (*pick)(const eval::MetricSet&)) {
    if (!m) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", pick(*m));
    return buf;
}

} // namespace

std::string comparison_text_table(const eval::ComparisonReport& report) {
    std::ostringstream out;
    auto r2 = [](const eval::MetricSet& m) { return m.r2.value_or(std::nan("")); };
    auto mse = [](const eval::MetricSet& m) { return m.mse; };
    auto mae = [](const eval::MetricSet& m) { return m.mae; };

    out << "  #  " << std::left;
    auto pad = [&](const std::string& s, int w) {
        std::string p = s;
        if (static_cast<int>(p.size()) < w) p.append(static_cast<std::size_t>(w) - p.size(), ' ');
        return p;
    };
    out << pad("Model", 20) << pad("R2", 10) << pad("MSE", 12) << pad("MAE", 12) << pad("R2*", 10)
        << pad("MSE*", 12) << pad("MAE*", 12) << "fit_s    predict_s\n";
    out << "     (columns marked * are after target binning)\n";
    int i = 1;
    for (const eval::ComparisonRow& row : report.rows) {
        char idx[8];
        std::snprintf(idx, sizeof(idx), "%3d  ", i++);
        out << idx << pad(row.name, 20) << pad(fmt_cell(row.before, r2), 10)
            << pad(fmt_cell(row.before, mse), 12) << pad(fmt_cell(row.before, mae), 12)
            << pad(fmt_cell(row.after, r2), 10) << pad(fmt_cell(row.after, mse), 12)
            << pad(fmt_cell(row.after, mae), 12);
        char timing[48];
        std::snprintf(timing, sizeof(timing), "%-8.3f %-8.3f", row.fit_seconds,
                      row.predict_seconds);
        out << timing;
        if (!row.error.empty()) out << "  ! " << row.error;
        out << '\n';
    }
    return out.str();
}

} // namespace tabreg::serde
