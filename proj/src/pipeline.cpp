#include "tabreg/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "tabreg/rng.hpp"
#include "tabreg/serde.hpp"
#include "tabreg/split.hpp"
#include "tabreg/stats.hpp"

namespace tabreg::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return it.key() == k; }) == allowed.end()) {
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
        }
    }
}

models::RegressorSpec spec_from_config(const json& j, const std::string& where) {
    check_keys(j, {"algorithm", "seed", "params", "members"}, where);
    try {
        return serde::spec_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError("bad model spec in " + where + ": " + e.what());
    }
}

std::string fingerprint_hex(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json dump_to_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << j.dump(2) << '\n';
    return j;
}

json load_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw DataError(std::string("cannot open ") + what + ": " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string(what) + " is not valid JSON: " + e.what());
    }
    return j;
}

} // namespace

PipelineConfig PipelineConfig::defaults() {
    PipelineConfig c;
    c.model.algorithm = models::Algorithm::gbt;
    c.model.seed = 7;
    c.binning.predictor.algorithm = models::Algorithm::gbt;
    c.binning.predictor.seed = 7;
    c.binning.predictor.params = {{"n_rounds", 500}, {"learning_rate", 0.05}, {"max_depth", 6}};
    return c;
}

PipelineConfig PipelineConfig::from_json(const json& j) {
    PipelineConfig c = defaults();
    check_keys(j,
               {"schema", "cleaning", "encoding", "binning", "model", "grid",
                "importance_selection", "cv", "split", "compare", "output_dir"},
               "config");
    c.schema_path = j.value("schema", std::string());
    if (j.contains("cleaning")) {
        const json& cj = j.at("cleaning");
        check_keys(cj, {"drop_nulls", "dedup", "outlier", "correlation_threshold"}, "cleaning");
        c.cleaning.drop_nulls = cj.value("drop_nulls", true);
        c.cleaning.dedup = cj.value("dedup", true);
        c.cleaning.correlation_threshold = cj.value("correlation_threshold", 0.05);
        if (cj.contains("outlier")) {
            const json& oj = cj.at("outlier");
            check_keys(oj, {"method", "a", "b", "k", "z_lo", "z_hi", "threshold_scale", "columns"},
                       "cleaning.outlier");
            OutlierConfig& o = c.cleaning.outlier;
            o.method = oj.value("method", std::string("tukey"));
            if (o.method != "none" && o.method != "zscore" && o.method != "tukey" &&
                o.method != "cooks") {
                throw ConfigError("unknown outlier method: " + o.method);
            }
            o.a = oj.value("a", 0.10);
            o.b = oj.value("b", 0.90);
            o.k = oj.value("k", 1.5);
            o.z_lo = oj.value("z_lo", -3.0);
            o.z_hi = oj.value("z_hi", 3.0);
            o.threshold_scale = oj.value("threshold_scale", 4.0);
            o.columns = oj.value("columns", std::vector<std::string>{});
        }
    }
    if (j.contains("encoding")) {
        const json& ej = j.at("encoding");
        check_keys(ej, {"categorical", "mean_target_m"}, "encoding");
        c.encoding.categorical = ej.value("categorical", std::string("ordinal"));
        if (c.encoding.categorical != "ordinal" && c.encoding.categorical != "mean_target") {
            throw ConfigError("encoding.categorical must be 'ordinal' or 'mean_target'");
        }
        c.encoding.mean_target_m = ej.value("mean_target_m", 10.0);
    }
    if (j.contains("binning")) {
        const json& bj = j.at("binning");
        check_keys(bj,
                   {"enabled", "n_bins", "strategy", "mode", "predictor", "step3_a", "step3_b",
                    "step3_k"},
                   "binning");
        c.binning.enabled = bj.value("enabled", true);
        c.binning.n_bins = bj.value("n_bins", 100);
        c.binning.strategy = bj.value("strategy", std::string("equal_width"));
        features::strategy_from_string(c.binning.strategy); // validates
        c.binning.mode = bj.value("mode", std::string("in_sample"));
        features::bin_mode_from_string(c.binning.mode);
        c.binning.step3_a = bj.value("step3_a", 0.25);
        c.binning.step3_b = bj.value("step3_b", 0.75);
        c.binning.step3_k = bj.value("step3_k", 3.0);
        if (bj.contains("predictor")) {
            c.binning.predictor = spec_from_config(bj.at("predictor"), "binning.predictor");
        }
    }
    if (j.contains("model")) c.model = spec_from_config(j.at("model"), "model");
    if (j.contains("grid")) {
        for (auto it = j.at("grid").begin(); it != j.at("grid").end(); ++it) {
            c.grid[it.key()] = it.value().get<std::vector<double>>();
        }
    }
    c.importance_selection = j.value("importance_selection", false);
    if (j.contains("cv")) {
        check_keys(j.at("cv"), {"k_outer", "k_inner"}, "cv");
        c.cv.k_outer = j.at("cv").value("k_outer", 10);
        c.cv.k_inner = j.at("cv").value("k_inner", 5);
    }
    if (j.contains("split")) {
        const json& sj = j.at("split");
        check_keys(sj, {"fraction", "seed", "leakage_guard"}, "split");
        c.split.fraction = sj.value("fraction", 0.2);
        c.split.seed = sj.value("seed", std::uint64_t{17});
        c.split.leakage_guard = sj.value("leakage_guard", true);
    }
    if (j.contains("compare")) {
        for (auto it = j.at("compare").begin(); it != j.at("compare").end(); ++it) {
            models::algorithm_from_string(it.key()); // validates the name
            std::map<std::string, double> params;
            for (auto pit = it.value().begin(); pit != it.value().end(); ++pit) {
                params[pit.key()] = pit.value().get<double>();
            }
            c.compare_overrides[it.key()] = std::move(params);
        }
    }
    c.output_dir = j.value("output_dir", std::string("out"));
    return c;
}

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
    return from_json(load_json_file(path, "config file"));
}

json PipelineConfig::to_json() const {
    json j;
    j["schema"] = schema_path;
    j["cleaning"] = {
        {"drop_nulls", cleaning.drop_nulls},
        {"dedup", cleaning.dedup},
        {"outlier",
         {{"method", cleaning.outlier.method},
          {"a", cleaning.outlier.a},
          {"b", cleaning.outlier.b},
          {"k", cleaning.outlier.k},
          {"z_lo", cleaning.outlier.z_lo},
          {"z_hi", cleaning.outlier.z_hi},
          {"threshold_scale", cleaning.outlier.threshold_scale},
          {"columns", cleaning.outlier.columns}}},
        {"correlation_threshold", cleaning.correlation_threshold},
    };
    j["encoding"] = {{"categorical", encoding.categorical},
                     {"mean_target_m", encoding.mean_target_m}};
    j["binning"] = {{"enabled", binning.enabled},
                    {"n_bins", binning.n_bins},
                    {"strategy", binning.strategy},
                    {"mode", binning.mode},
                    {"step3_a", binning.step3_a},
                    {"step3_b", binning.step3_b},
                    {"step3_k", binning.step3_k},
                    {"predictor", serde::to_json(binning.predictor)}};
    j["model"] = serde::to_json(model);
    j["grid"] = grid;
    j["importance_selection"] = importance_selection;
    j["cv"] = {{"k_outer", cv.k_outer}, {"k_inner", cv.k_inner}};
    j["split"] = {{"fraction", split.fraction},
                  {"seed", split.seed},
                  {"leakage_guard", split.leakage_guard}};
    json overrides = json::object();
    for (const auto& [alg, params] : compare_overrides) overrides[alg] = params;
    j["compare"] = overrides;
    j["output_dir"] = output_dir;
    return j;
}

std::map<std::string, ColumnRole> PipelineConfig::schema() const {
    if (!schema_path.empty()) return load_schema(schema_path);
    std::map<std::string, ColumnRole> schema;
    for (const SynthColumn& c : SynthSpec::bundled_default().columns) schema[c.name] = c.role;
    return schema;
}

json CleanReport::to_json() const {
    json j;
    j["rows_in"] = rows_in;
    j["rows_out"] = rows_out;
    j["nulls_removed"] = nulls_removed;
    j["duplicates_removed"] = duplicates_removed;
    j["outliers_removed"] = outliers_removed;
    json reports = json::array();
    for (const outliers::OutlierReport& r : outlier_reports) {
        reports.push_back(json::parse(r.to_json()));
    }
    j["outlier_reports"] = std::move(reports);
    json dropped = json::array();
    for (const auto& [name, corr] : dropped_features) {
        dropped.push_back({{"column", name}, {"correlation", corr}});
    }
    j["dropped_features"] = std::move(dropped);
    return j;
}

std::pair<Table, CleanReport> clean(const Table& t, const CleaningConfig& config) {
    CleanReport report;
    report.rows_in = static_cast<std::int64_t>(t.n_rows());
    Table current = t;

    if (config.drop_nulls) {
        std::vector<std::size_t> keep;
        keep.reserve(current.n_rows());
        for (std::size_t r = 0; r < current.n_rows(); ++r) {
            bool complete = true;
            for (const Column& c : current.columns()) {
                if (c.is_missing(r)) {
                    complete = false;
                    break;
                }
            }
            if (complete) keep.push_back(r);
        }
        report.nulls_removed = static_cast<std::int64_t>(current.n_rows() - keep.size());
        if (keep.size() < current.n_rows()) current = current.select_rows(keep);
    }

    if (config.dedup) {
        std::vector<std::size_t> all_cols(current.n_cols());
        std::iota(all_cols.begin(), all_cols.end(), std::size_t{0});
        std::unordered_map<std::string, std::size_t> seen;
        std::vector<std::size_t> keep;
        keep.reserve(current.n_rows());
        for (std::size_t r = 0; r < current.n_rows(); ++r) {
            if (seen.emplace(current.row_key(r, all_cols), r).second) keep.push_back(r);
        }
        report.duplicates_removed = static_cast<std::int64_t>(current.n_rows() - keep.size());
        if (keep.size() < current.n_rows()) current = current.select_rows(keep);
    }

    if (config.outlier.method != "none" && current.n_rows() > 0) {
        std::vector<std::string> columns = config.outlier.columns;
        if (columns.empty()) {
            const auto target = current.target_index();
            if (!target) throw DataError("outlier removal needs a target column");
            columns.push_back(current.column(*target).name);
        }
        std::vector<std::uint8_t> flagged_mask(current.n_rows(), 0);
        for (const std::string& name : columns) {
            const Column& c = current.column(name);
            if (!c.is_numeric) throw DataError("outlier column is not numeric: " + name);
            outliers::OutlierReport rep;
            if (config.outlier.method == "zscore") {
                rep = outliers::zscore_outliers(c.numeric, config.outlier.z_lo,
                                                config.outlier.z_hi);
            } else if (config.outlier.method == "tukey") {
                rep = outliers::tukey_fences(
                    c.numeric, {config.outlier.a, config.outlier.b, config.outlier.k});
            } else { // cooks: regression diagnostics of the target on the features
                const std::vector<std::string> feats = current.numeric_feature_names();
                if (feats.empty()) throw DataError("cooks outlier removal needs features");
                rep = outliers::cooks_distance(models::design_matrix(current, feats),
                                               models::target_vector(current),
                                               config.outlier.threshold_scale);
            }
            for (std::int64_t idx : rep.flagged) flagged_mask[static_cast<std::size_t>(idx)] = 1;
            rep.per_row_score.clear(); // keep the audit file small
            report.outlier_reports.push_back(std::move(rep));
        }
        std::vector<std::size_t> keep;
        keep.reserve(current.n_rows());
        for (std::size_t r = 0; r < current.n_rows(); ++r) {
            if (!flagged_mask[r]) keep.push_back(r);
        }
        report.outliers_removed = static_cast<std::int64_t>(current.n_rows() - keep.size());
        if (keep.size() < current.n_rows()) current = current.select_rows(keep);
    }

    if (config.correlation_threshold > 0 && current.n_rows() > 1) {
        if (const auto target = current.target_index()) {
            const features::CorrelationFilterResult fr = features::correlation_filter(
                current, current.column(*target).name, config.correlation_threshold);
            report.dropped_features = fr.dropped;
            std::vector<std::string> names;
            for (const auto& [name, corr] : fr.dropped) {
                (void)corr;
                names.push_back(name);
            }
            if (!names.empty()) current = current.drop_columns(names);
        }
    }

    report.rows_out = static_cast<std::int64_t>(current.n_rows());
    return {std::move(current), std::move(report)};
}

std::pair<Table, EncoderStack> fit_encoders(const Table& t, const EncodingConfig& config) {
    EncoderStack stack;
    Table current = t;
    // date columns first, in table order
    std::vector<std::string> dates;
    for (const Column& c : current.columns()) {
        if (c.role == ColumnRole::date_feature && !c.is_numeric) dates.push_back(c.name);
    }
    for (const std::string& name : dates) {
        current = features::encode_date(current, name);
        stack.date_columns.push_back(name);
    }
    std::vector<std::string> categoricals;
    for (const Column& c : current.columns()) {
        if (c.role == ColumnRole::categorical_feature && !c.is_numeric) {
            categoricals.push_back(c.name);
        }
    }
    for (const std::string& name : categoricals) {
        if (config.categorical == "mean_target") {
            auto [encoded, map] = features::mean_target_encode(current, name,
                                                               config.mean_target_m);
            current = std::move(encoded);
            stack.encoders.push_back(std::move(map));
        } else {
            auto [encoded, map] = features::ordinal_encode(current, name);
            current = std::move(encoded);
            stack.encoders.push_back(std::move(map));
        }
    }
    return {std::move(current), std::move(stack)};
}

Table EncoderStack::transform(const Table& t, std::int64_t* unseen_count) const {
    Table current = t;
    std::int64_t unseen_total = 0;
    for (const std::string& name : date_columns) {
        current = features::encode_date(current, name);
    }
    for (const features::EncodingMap& map : encoders) {
        auto [encoded, unseen] = map.apply(current);
        current = std::move(encoded);
        unseen_total += unseen;
    }
    if (unseen_count) *unseen_count = unseen_total;
    return current;
}

void ModelFile::save(const std::string& path) const {
    json j;
    j["format_version"] = format_version;
    json schema_j = json::object();
    for (const auto& [name, role] : schema) schema_j[name] = to_string(role);
    j["schema"] = std::move(schema_j);
    json stack;
    stack["date_columns"] = encoders.date_columns;
    stack["encoders"] = json::array();
    for (const features::EncodingMap& m : encoders.encoders) {
        stack["encoders"].push_back(serde::to_json(m));
    }
    j["pipeline"] = {{"encoder_stack", std::move(stack)},
                     {"bin_model", bin_model ? serde::to_json(*bin_model) : json(nullptr)},
                     {"retained_features", retained_features}};
    j["model"] = serde::to_json(model);
    j["config"] = config_snapshot;
    j["data_fingerprint"] = data_fingerprint;
    dump_to_file(j, path);
}

ModelFile ModelFile::load(const std::string& path) {
    const json j = load_json_file(path, "model file");
    ModelFile f;
    try {
        f.format_version = j.at("format_version").get<int>();
        if (f.format_version != kModelFileVersion) {
            throw DataError("model file version " + std::to_string(f.format_version) +
                            " is not supported (expected " + std::to_string(kModelFileVersion) +
                            ")");
        }
        for (auto it = j.at("schema").begin(); it != j.at("schema").end(); ++it) {
            f.schema[it.key()] = role_from_string(it.value().get<std::string>());
        }
        const json& pj = j.at("pipeline");
        const json& stack = pj.at("encoder_stack");
        f.encoders.date_columns = stack.at("date_columns").get<std::vector<std::string>>();
        for (const auto& ej : stack.at("encoders")) {
            f.encoders.encoders.push_back(serde::encoding_map_from_json(ej));
        }
        if (!pj.at("bin_model").is_null()) {
            f.bin_model = serde::bin_model_from_json(pj.at("bin_model"));
        }
        f.retained_features = pj.at("retained_features").get<std::vector<std::string>>();
        f.model = serde::model_from_json(j.at("model"));
        f.config_snapshot = j.value("config", json::object());
        f.data_fingerprint = j.value("data_fingerprint", std::string());
    } catch (const json::exception& e) {
        throw DataError("malformed model file: " + std::string(e.what()));
    }
    return f;
}

Eigen::VectorXd ModelFile::predict(const Table& raw) const {
    Table t = encoders.transform(raw);
    if (bin_model) t = features::target_binning_transform(*bin_model, t);
    return models::predict(model, t);
}

std::map<std::string, ColumnRole> ModelFile::input_schema(bool with_target) const {
    std::map<std::string, ColumnRole> s = schema;
    if (!with_target) {
        for (auto it = s.begin(); it != s.end();) {
            if (it->second == ColumnRole::target) it = s.erase(it);
            else ++it;
        }
    }
    return s;
}

void run_generate(const std::string& spec_path, std::int64_t n_rows,
                  std::optional<std::uint64_t> seed, const std::string& out_dir) {
    if (n_rows < 1) throw ConfigError("generate needs --rows >= 1");
    SynthSpec spec = spec_path.empty() ? SynthSpec::bundled_default()
                                       : SynthSpec::from_json_file(spec_path);
    if (seed) spec.seed = *seed;
    const SynthResult result = synthesize_dataset(spec, static_cast<std::size_t>(n_rows));

    fs::create_directories(out_dir);
    write_csv(result.table, (fs::path(out_dir) / "data.csv").string());
    {
        std::ofstream out(fs::path(out_dir) / "truth.csv", std::ios::binary);
        if (!out) throw DataError("cannot write truth.csv");
        out << "row,truth\n";
        for (std::size_t r = 0; r < result.truth.size(); ++r) {
            out << r << ',' << format_number(result.truth[r]) << '\n';
        }
    }
    result.log.save_json((fs::path(out_dir) / "generation_log.json").string());
}

void run_clean(const std::string& in_csv, const PipelineConfig& config,
               const std::string& out_csv, const std::string& report_path) {
    const Table t = load_csv(in_csv, config.schema(), nullptr, false, true);
    auto [cleaned, report] = clean(t, config.cleaning);
    write_csv(cleaned, out_csv);
    dump_to_file(report.to_json(), report_path);
    if (cleaned.n_rows() == 0) {
        throw DataError("cleaning removed every row (report written to " + report_path + ")");
    }
}

void run_profile(const std::string& in_csv, const PipelineConfig& config,
                 const std::string& out_dir) {
    const Table t = load_csv(in_csv, config.schema(), nullptr, false, true);
    auto [encoded, stack] = fit_encoders(t, config.encoding);
    (void)stack;
    const eval::ProfileReport report = eval::profile(encoded);
    eval::write_profile_csvs(report, out_dir);
    for (const std::string& notice : report.notices) {
        std::fprintf(stderr, "profile: %s\n", notice.c_str());
    }
}

void run_train(const std::string& in_csv, const PipelineConfig& config,
               const std::string& model_path) {
    const Table raw = load_csv(in_csv, config.schema(), nullptr, false, true);
    if (!raw.target_index()) throw DataError("training data has no target column");
    auto [encoded, stack] = fit_encoders(raw, config.encoding);

    models::RegressorSpec spec = config.model;
    if (!config.grid.empty()) {
        const eval::GridSearchResult gs =
            eval::grid_search(encoded, spec, config.grid, config.cv.k_inner,
                              derive_seed(spec.seed, 0x6d1d));
        for (const auto& [name, value] : gs.best) spec.params[name] = value;
    }

    Table modeling = encoded;
    if (config.importance_selection) {
        const std::vector<std::string> retained =
            features::importance_select(encoded, spec, config.cv.k_inner);
        std::vector<std::string> to_drop;
        for (const std::string& name : encoded.numeric_feature_names()) {
            if (std::find(retained.begin(), retained.end(), name) == retained.end()) {
                to_drop.push_back(name);
            }
        }
        if (!to_drop.empty()) modeling = modeling.drop_columns(to_drop);
    }

    ModelFile file;
    for (const Column& c : raw.columns()) file.schema[c.name] = c.role;
    file.encoders = std::move(stack);
    if (config.binning.enabled) {
        features::BinSpec bin_spec;
        bin_spec.n_bins = config.binning.n_bins;
        bin_spec.strategy = features::strategy_from_string(config.binning.strategy);
        auto [augmented, bin_model] = features::target_binning_fit(
            modeling, bin_spec, config.binning.predictor,
            features::bin_mode_from_string(config.binning.mode),
            {config.binning.step3_a, config.binning.step3_b, config.binning.step3_k});
        modeling = std::move(augmented);
        file.bin_model = std::move(bin_model);
    }
    file.model = models::fit(spec, modeling);
    file.retained_features = file.model.feature_names;
    file.config_snapshot = config.to_json();
    file.data_fingerprint = fingerprint_hex(raw.fingerprint());
    file.save(model_path);
}

void run_evaluate(const std::string& model_path, const std::string& in_csv,
                  const std::string& out_dir) {
    const ModelFile file = ModelFile::load(model_path);
    const Table raw = load_csv(in_csv, file.input_schema(true));
    Table t = file.encoders.transform(raw);
    if (file.bin_model) t = features::target_binning_transform(*file.bin_model, t);

    const Eigen::VectorXd y = models::target_vector(t);
    const Eigen::VectorXd pred = models::predict(file.model, t);
    const eval::MetricSet m = eval::metrics(y, pred);

    fs::create_directories(out_dir);
    const eval::PredictionErrorData pe = eval::prediction_error_data(file.model, t);
    json mj = serde::to_json(m);
    mj["prediction_error_fit"] = {{"slope", pe.best_fit_slope},
                                  {"intercept", pe.best_fit_intercept},
                                  {"identity", {{"slope", 1.0}, {"intercept", 0.0}}}};
    dump_to_file(mj, (fs::path(out_dir) / "metrics.json").string());
    eval::write_residuals_csv(eval::residuals_data(file.model, Table(), t),
                              (fs::path(out_dir) / "residuals.csv").string());
    eval::write_prediction_error_csv(pe, (fs::path(out_dir) / "prediction_error.csv").string());
}

std::vector<std::pair<std::string, models::RegressorSpec>> comparison_roster(
    const PipelineConfig& config) {
    struct Entry {
        const char* name;
        models::Algorithm algorithm;
        std::map<std::string, double> params;
    };
    const std::vector<Entry> entries = {
        {"VCPA Model", models::Algorithm::baseline_column, {}},
        {"Linear Regression", models::Algorithm::ols, {}},
        {"SVR", models::Algorithm::linear_svr, {{"c", 1000.0}, {"max_iter", 3000}}},
        {"Decision Tree", models::Algorithm::cart, {{"max_depth", 8}, {"min_samples_leaf", 5}}},
        {"Random Forest", models::Algorithm::random_forest, {{"n_trees", 100}}},
        {"Gradient Boosting", models::Algorithm::gbt, {{"n_rounds", 100}, {"max_depth", 3}}},
        {"Lasso", models::Algorithm::lasso, {{"alpha", 1.0}}},
        {"Voting Regressor", models::Algorithm::voting, {}},
    };
    std::vector<std::pair<std::string, models::RegressorSpec>> roster;
    std::uint64_t idx = 0;
    for (const Entry& e : entries) {
        models::RegressorSpec spec;
        spec.algorithm = e.algorithm;
        spec.params = e.params;
        spec.seed = derive_seed(config.model.seed, idx++);
        auto it = config.compare_overrides.find(models::to_string(e.algorithm));
        if (it != config.compare_overrides.end()) {
            for (const auto& [name, value] : it->second) spec.params[name] = value;
        }
        spec.validate();
        roster.emplace_back(e.name, std::move(spec));
    }
    return roster;
}

void run_compare(const std::string& in_csv, const PipelineConfig& config,
                 const std::string& out_dir) {
    const Table raw = load_csv(in_csv, config.schema(), nullptr, false, true);
    if (!raw.target_index()) throw DataError("comparison data has no target column");
    auto [cleaned, clean_report] = clean(raw, config.cleaning);
    (void)clean_report;
    if (cleaned.n_rows() < 2) throw DataError("not enough rows after cleaning");
    auto [encoded, stack] = fit_encoders(cleaned, config.encoding);
    (void)stack;
    const SplitResult split = split_train_test(encoded, config.split.fraction, config.split.seed,
                                               config.split.leakage_guard);

    features::BinSpec bin_spec;
    bin_spec.n_bins = config.binning.n_bins;
    bin_spec.strategy = features::strategy_from_string(config.binning.strategy);

    const std::size_t n_sample = std::min<std::size_t>(50, split.test.n_rows());
    Rng rng(derive_seed(config.split.seed, 0x5a));
    std::vector<std::size_t> sample_rows =
        rng.sample_without_replacement(split.test.n_rows(), n_sample);
    std::sort(sample_rows.begin(), sample_rows.end());
    const Table sample = split.test.select_rows(sample_rows);

    const eval::ComparisonReport report = eval::compare_models(
        split.train, split.test, comparison_roster(config), bin_spec, config.binning.predictor,
        features::bin_mode_from_string(config.binning.mode), &sample,
        {config.binning.step3_a, config.binning.step3_b, config.binning.step3_k});

    fs::create_directories(out_dir);
    json j = serde::to_json(report);
    j["config"] = config.to_json();
    j["leakage_dropped"] = split.leakage_dropped.size();
    dump_to_file(j, (fs::path(out_dir) / "comparison.json").string());
    {
        std::ofstream out(fs::path(out_dir) / "comparison.txt", std::ios::binary);
        out << serde::comparison_text_table(report);
    }
    {
        std::ofstream out(fs::path(out_dir) / "sample_predictions.csv", std::ios::binary);
        out << "row,actual";
        for (const eval::ComparisonRow& row : report.rows) {
            std::string header = row.name;
            std::replace(header.begin(), header.end(), ' ', '_');
            out << ',' << header;
        }
        out << '\n';
        for (std::size_t i = 0; i < n_sample; ++i) {
            out << sample_rows[i] << ',' << format_number(report.sample_actual[i]);
            for (const eval::ComparisonRow& row : report.rows) {
                out << ',';
                if (row.sample_predictions.size() == n_sample) {
                    out << format_number(row.sample_predictions[i]);
                }
            }
            out << '\n';
        }
    }
}

void run_predict(const std::string& model_path, const std::string& in_csv,
                 const std::string& out_csv) {
    const ModelFile file = ModelFile::load(model_path);
    const Table raw = load_csv(in_csv, file.input_schema(false), nullptr, /*allow_empty=*/true);
    std::ofstream out(out_csv, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + out_csv);
    out << "prediction\n";
    if (raw.n_rows() > 0) {
        const Eigen::VectorXd pred = file.predict(raw);
        for (Eigen::Index i = 0; i < pred.size(); ++i) {
            out << format_number(pred(i)) << '\n';
        }
    }
}

} // namespace tabreg::pipeline
