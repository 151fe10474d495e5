#ifndef TABREG_EVAL_HPP
#define TABREG_EVAL_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabreg/features.hpp"
#include "tabreg/metrics.hpp"
#include "tabreg/models.hpp"
#include "tabreg/stats.hpp"
#include "tabreg/table.hpp"

namespace tabreg::eval {

struct CVResult {
    std::vector<MetricSet> fold_scores;
    double mean_r2 = 0.0;
    double std_r2 = 0.0;          // sample std over fold scores
    std::vector<int> fold_of_row; // disjoint folds covering all rows, sizes within 1
};

/// k-fold cross-validation: seeded shuffle, contiguous fold slices, the
/// model refit from scratch per fold, scores averaged over folds.
CVResult kfold_cv(const Table& t, const models::RegressorSpec& spec, int k, std::uint64_t seed);

struct GridSearchResult {
    struct Candidate {
        std::map<std::string, double> params;
        double mean_r2 = 0.0;
    };
    std::vector<Candidate> candidates; // enumeration order: sorted keys, last key fastest
    std::map<std::string, double> best;
    int k_inner = 5;
};

/// Every point of the Cartesian grid scored by k_inner-fold CV mean R^2 on
/// t; ties keep the earliest candidate in enumeration order.
GridSearchResult grid_search(const Table& t, const models::RegressorSpec& spec,
                             const std::map<std::string, std::vector<double>>& grid,
                             int k_inner = 5, std::uint64_t seed = 0);

struct AlphaPathPoint {
    double alpha = 0.0;
    double cv_mse = 0.0;
    int nonzeros = 0; // nonzero coefficients of the full-data fit at this alpha
};

struct AlphaPathResult {
    std::vector<AlphaPathPoint> points;
    double chosen_alpha = 0.0; // minimizes cv_mse; ties keep the smallest alpha
};

/// Lasso regularization path: per-alpha k-fold CV mean MSE plus the
/// full-data nonzero count. The grid must be sorted ascending.
AlphaPathResult alpha_path(const Table& t, const std::vector<double>& alpha_grid, int k,
                           std::uint64_t seed = 0);

struct ResidualRecord {
    std::string split; // "train" or "test"
    double predicted = 0.0;
    double residual = 0.0; // actual - predicted
};

std::vector<ResidualRecord> residuals_data(const models::TrainedModel& model, const Table& train,
                                           const Table& test);
void write_residuals_csv(const std::vector<ResidualRecord>& records, const std::string& path);

struct PredictionErrorData {
    std::vector<std::pair<double, double>> points; // (actual, predicted)
    double best_fit_slope = 0.0;                   // OLS of predicted on actual
    double best_fit_intercept = 0.0;
    // the reference diagonal is slope 1, intercept 0
};

PredictionErrorData prediction_error_data(const models::TrainedModel& model, const Table& test);
void write_prediction_error_csv(const PredictionErrorData& data, const std::string& path);

struct LearningCurvePoint {
    double fraction = 0.0;
    double train_r2 = 0.0;
    double cv_r2 = 0.0;
};

/// Seeded nested subsamples (the full permutation's prefix, original row
/// order preserved) so fraction 1.0 reproduces the full-data CV score.
std::vector<LearningCurvePoint> learning_curve(const Table& t, const models::RegressorSpec& spec,
                                               const std::vector<double>& fractions, int k,
                                               std::uint64_t seed);
void write_learning_curve_csv(const std::vector<LearningCurvePoint>& points,
                              const std::string& path);

struct ProfileReport {
    bool has_bedrooms = false;
    std::map<std::int64_t, std::int64_t> bedroom_histogram; // rounded value -> count
    std::int64_t bedroom_missing = 0;
    bool has_months = false;
    std::string month_column;
    std::array<std::int64_t, 12> month_counts{};
    std::vector<stats::ColumnSummary> summary;
    stats::CorrelationMatrix correlation;
    std::vector<std::string> notices; // skipped sub-reports
};

/// Dataset profile: bedroom histogram (column "rmbed"), monthly transaction
/// counts (column "ys2" or the first "*_m" column), descriptive statistics,
/// and the correlation matrix over numeric columns. Missing source columns
/// skip their sub-report with a notice.
ProfileReport profile(const Table& t);
void write_profile_csvs(const ProfileReport& report, const std::string& out_dir);

struct ComparisonRow {
    std::string name; // display name; row 1 is the appraisal baseline
    models::RegressorSpec spec;
    std::optional<MetricSet> before; // raw features
    std::optional<MetricSet> after;  // with the predicted-bin feature; absent for the baseline
    double fit_seconds = 0.0;        // both arms combined
    double predict_seconds = 0.0;
    std::string error; // non-empty when an arm failed; the report survives
    std::vector<double> sample_predictions; // on the optional sample rows
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    std::uint64_t dataset_fingerprint = 0; // train+test tables
    std::string bin_mode;
    int bin_count = 0;
    std::int64_t binning_rows_removed = 0;
    std::vector<double> sample_actual; // targets of the sample rows, if given
};

/// Fit/evaluate every spec on raw features ("before"), then once: run
/// target-binning on train, transform test, and refit every spec on the
/// augmented tables ("after"). The baseline row has no after arm. Per-model
/// failures are recorded in-row, never fatal. When `sample` rows are given,
/// each row also records its predictions there (from the after-binning model
/// when one exists).
ComparisonReport compare_models(const Table& train, const Table& test,
                                const std::vector<std::pair<std::string, models::RegressorSpec>>& specs,
                                features::BinSpec bin_spec,
                                const models::RegressorSpec& bin_predictor_spec,
                                features::BinMode mode, const Table* sample = nullptr,
                                const outliers::TukeyParams& step3 = {0.25, 0.75, 1.5});

} // namespace tabreg::eval

#endif
