#ifndef TABREG_FEATURES_HPP
#define TABREG_FEATURES_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tabreg/models.hpp"
#include "tabreg/outliers.hpp"
#include "tabreg/table.hpp"

namespace tabreg::features {

/// Target discretization: n_bins labels in [0, n_bins-1]. equal_width lays
/// uniform edges over [min, max]; quantile uses empirical quantile edges
/// (duplicate edges collapse, reducing the effective bin count). Learned
/// edges are stored back into the spec and are strictly increasing.
struct BinSpec {
    int n_bins = 100;
    enum class Strategy { equal_width, quantile } strategy = Strategy::equal_width;
    std::vector<double> edges; // learned; n_bins+1 for equal_width

    void validate() const;
};

std::string to_string(BinSpec::Strategy s);
BinSpec::Strategy strategy_from_string(const std::string& s);

/// Labels for each price: equal_width uses floor(n_bins*(x-min)/(max-min))
/// with x = max clamped into the last bin. Fits the edges into `spec`.
/// Throws DataError on empty input or zero width under equal_width.
std::vector<int> bin_target(const std::vector<double>& prices, BinSpec& spec);

/// A fitted column encoder. ordinal_label maps categories to dense codes in
/// first-appearance order; unseen categories at transform time map to the
/// reserved code K (= category count) and are counted. mean_target maps a
/// category to its m-smoothed target mean (m-estimate); unseen maps to the
/// global mean.
struct EncodingMap {
    std::string column;
    enum class Kind { ordinal_label, date_split, mean_target } kind = Kind::ordinal_label;

    // ordinal_label
    std::vector<std::string> categories; // index = code
    // mean_target
    std::map<std::string, double> category_means;
    double global_mean = 0.0;
    double smoothing_m = 10.0;

    int code_of(const std::string& category) const; // ordinal; K for unseen
    /// Re-encode the column in another table; returns the new table and the
    /// number of unseen-category cells encountered.
    std::pair<Table, std::int64_t> apply(const Table& t) const;
};

/// Split a date column into two numeric columns. ISO dates (YYYY-MM-DD)
/// yield (calendar year, month 1-12); bare-year columns yield
/// (year, decade index = floor(year/10)). Derived names: sale_date -> ys1,
/// ys2; yrblt -> yb1, yb2; otherwise <col>_y and <col>_m (dates) or <col>_dec
/// (years). Throws DataError naming the row on an unparseable cell.
Table encode_date(const Table& t, const std::string& column);

std::pair<Table, EncodingMap> ordinal_encode(const Table& t, const std::string& column);

/// m-estimate target encoding for a categorical column; requires a target.
std::pair<Table, EncodingMap> mean_target_encode(const Table& t, const std::string& column,
                                                 double m = 10.0);

enum class BinMode {
    in_sample,   // predicted bins come from a model trained on all rows;
                 // reuses training-target information (leaky), kept for
                 // reproducing the classic procedure
    out_of_fold, // row i's bin predicted by a model that never saw row i
};

std::string to_string(BinMode m);
BinMode bin_mode_from_string(const std::string& s);

/// The trained target-binning stage: the bin spec with learned edges, the
/// full-data bin predictor used at transform time, and the train-time audit
/// trail (removed rows; fold bookkeeping in out_of_fold mode).
struct BinModel {
    BinSpec spec;
    models::TrainedModel bin_predictor; // trained on bin labels, never the raw target
    BinMode mode = BinMode::in_sample;
    std::vector<std::int64_t> removed_outliers; // train rows dropped in step 3
    std::vector<int> fold_of_row;               // out_of_fold only
    outliers::TukeyParams step3_params{0.25, 0.75, 1.5};
};

/// Three-step fit on a training table with a target:
///   1. bin the target into labels,
///   2. withhold the target and train predictor_spec on the labels; produce
///      a predicted bin for every row (in_sample: from the full-data model;
///      out_of_fold: 5-fold out-of-fold predictions, seed-deterministic),
///   3. flag predicted-bin outliers by Tukey fences (quartiles, k=1.5 by
///      default) and drop them.
/// Returns the surviving table with one new numeric feature `predicted_bin`
/// (clamped to [0, n_bins-1]) plus the original target, and the BinModel.
std::pair<Table, BinModel> target_binning_fit(const Table& train, BinSpec spec,
                                              const models::RegressorSpec& predictor_spec,
                                              BinMode mode,
                                              const outliers::TukeyParams& step3 = {0.25, 0.75,
                                                                                    1.5});

/// Append `predicted_bin` from the stored bin predictor; never removes rows.
/// Needs only the predictor's feature columns (the target may be absent).
Table target_binning_transform(const BinModel& model, const Table& rows);

struct CorrelationFilterResult {
    std::vector<std::string> retained;
    std::vector<std::pair<std::string, double>> dropped; // name, correlation vs target
};

/// Drop numeric feature columns whose |pearson r| against the target falls
/// below the threshold (pairwise-complete rows). Constant features are
/// dropped with correlation recorded as 0. Text feature columns are not
/// judged and stay retained; identifier and appraisal columns are never
/// model features and appear in neither list.
CorrelationFilterResult correlation_filter(const Table& t, const std::string& target,
                                           double threshold);

/// Backward elimination driven by model importances: fit on all features,
/// repeatedly drop the least important one while the k-fold CV mean R^2
/// stays within `tolerance` of the best seen; returns the feature set that
/// achieved the maximum CV score. Models without native importances rank by
/// |coefficient| * feature std.
std::vector<std::string> importance_select(const Table& train,
                                           const models::RegressorSpec& model_spec,
                                           int k_folds = 5, double tolerance = 0.002);

} // namespace tabreg::features

#endif
