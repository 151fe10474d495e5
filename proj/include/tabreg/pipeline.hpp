#ifndef TABREG_PIPELINE_HPP
#define TABREG_PIPELINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabreg/csv.hpp"
#include "tabreg/eval.hpp"
#include "tabreg/features.hpp"
#include "tabreg/models.hpp"
#include "tabreg/outliers.hpp"
#include "tabreg/synth.hpp"
#include "tabreg/table.hpp"

namespace tabreg::pipeline {

struct OutlierConfig {
    std::string method = "tukey"; // none | zscore | tukey | cooks
    double a = 0.10;              // tukey levels; the wide reference setting
    double b = 0.90;
    double k = 1.5;
    double z_lo = -3.0;
    double z_hi = 3.0;
    double threshold_scale = 4.0;     // cooks: flag D > threshold_scale/n
    std::vector<std::string> columns; // empty = the target column
};

struct CleaningConfig {
    bool drop_nulls = true;
    bool dedup = true;
    OutlierConfig outlier;
    double correlation_threshold = 0.05;
};

struct EncodingConfig {
    std::string categorical = "ordinal"; // ordinal | mean_target
    double mean_target_m = 10.0;
};

struct BinningConfig {
    bool enabled = true;
    int n_bins = 100;
    std::string strategy = "equal_width";
    std::string mode = "in_sample"; // in_sample | out_of_fold
    double step3_a = 0.25;          // quartile levels on the predicted bin column
    double step3_b = 0.75;
    double step3_k = 3.0;           // far-out multiplier: catch gross bins, keep the tail
    models::RegressorSpec predictor; // default: gbt
};

struct CvConfig {
    int k_outer = 10;
    int k_inner = 5;
};

struct SplitConfig {
    double fraction = 0.2; // test share; the 80/20 default is configurable
    std::uint64_t seed = 17;
    bool leakage_guard = true;
};

/// Whole-pipeline configuration. Unknown JSON keys are rejected; a fully
/// defaulted config is valid and reproduces the reference pipeline
/// (nulls -> dedup -> target outliers -> correlation filter -> encode ->
/// binning -> fit).
struct PipelineConfig {
    std::string schema_path; // empty = the bundled property-sales schema
    CleaningConfig cleaning;
    EncodingConfig encoding;
    BinningConfig binning;
    models::RegressorSpec model; // default: gbt
    std::map<std::string, std::vector<double>> grid; // empty = no grid search
    bool importance_selection = false;
    CvConfig cv;
    SplitConfig split;
    std::map<std::string, std::map<std::string, double>> compare_overrides; // algorithm -> params
    std::string output_dir = "out";

    static PipelineConfig defaults();
    static PipelineConfig from_json_file(const std::string& path);
    static PipelineConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    /// The schema map: loaded from schema_path, or the bundled default.
    std::map<std::string, ColumnRole> schema() const;
};

struct CleanReport {
    std::int64_t rows_in = 0;
    std::int64_t rows_out = 0;
    std::int64_t duplicates_removed = 0;
    std::int64_t nulls_removed = 0;
    std::int64_t outliers_removed = 0;
    std::vector<outliers::OutlierReport> outlier_reports;
    std::vector<std::pair<std::string, double>> dropped_features; // name, correlation

    /// rows_in - nulls - duplicates - outliers == rows_out, always.
    nlohmann::json to_json() const;
};

/// Cleaning pass in the fixed order: drop rows with any missing cell,
/// drop exact full-row duplicates (keep first), remove configured outliers
/// (target column by default), drop low-correlation features.
std::pair<Table, CleanReport> clean(const Table& t, const CleaningConfig& config);

/// Fitted column encoders, replayable on new data at predict time.
struct EncoderStack {
    std::vector<std::string> date_columns;       // encode_date applied in this order
    std::vector<features::EncodingMap> encoders; // ordinal / mean-target maps

    Table transform(const Table& t, std::int64_t* unseen_count = nullptr) const;
};

/// Encode every date column and every text categorical column; returns the
/// numeric table and the replayable stack.
std::pair<Table, EncoderStack> fit_encoders(const Table& t, const EncodingConfig& config);

inline constexpr int kModelFileVersion = 1;

/// Self-contained fitted pipeline: schema, encoders, optional bin model and
/// the final estimator. Loading and predicting reproduces in-memory
/// predictions bit-exactly; a version mismatch is a hard error.
struct ModelFile {
    int format_version = kModelFileVersion;
    std::map<std::string, ColumnRole> schema;
    EncoderStack encoders;
    std::optional<features::BinModel> bin_model;
    std::vector<std::string> retained_features;
    models::TrainedModel model;
    nlohmann::json config_snapshot;
    std::string data_fingerprint; // hex

    void save(const std::string& path) const;
    static ModelFile load(const std::string& path);

    /// encoders -> bin transform -> model, on a raw schema-shaped table.
    Eigen::VectorXd predict(const Table& raw) const;
    /// Schema used to read prediction-time CSVs (target excluded).
    std::map<std::string, ColumnRole> input_schema(bool with_target) const;
};

// Command bodies behind the CLI. All throw ConfigError / DataError; the CLI
// maps them to exit codes 2 / 3.

void run_generate(const std::string& spec_path, std::int64_t n_rows,
                  std::optional<std::uint64_t> seed, const std::string& out_dir);
void run_clean(const std::string& in_csv, const PipelineConfig& config,
               const std::string& out_csv, const std::string& report_path);
void run_profile(const std::string& in_csv, const PipelineConfig& config,
                 const std::string& out_dir);
void run_train(const std::string& in_csv, const PipelineConfig& config,
               const std::string& model_path);
void run_evaluate(const std::string& model_path, const std::string& in_csv,
                  const std::string& out_dir);
void run_compare(const std::string& in_csv, const PipelineConfig& config,
                 const std::string& out_dir);
void run_predict(const std::string& model_path, const std::string& in_csv,
                 const std::string& out_csv);

/// The comparison roster in report order: the appraisal baseline first, then
/// linear, svr, tree, forest, gbt, lasso, voting. Per-row seeds derive from
/// the config's model seed; config.compare_overrides may adjust
/// hyperparameters per algorithm.
std::vector<std::pair<std::string, models::RegressorSpec>> comparison_roster(
    const PipelineConfig& config);

} // namespace tabreg::pipeline

#endif
