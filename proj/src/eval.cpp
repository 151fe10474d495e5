#include "tabreg/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "tabreg/csv.hpp"
#include "tabreg/rng.hpp"

namespace tabreg::eval {

MetricSet metrics(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
    if (y_true.size() == 0) throw DataError("metrics of empty data");
    if (y_true.size() != y_pred.size()) throw DataError("metrics: length mismatch");

    MetricSet m;
    m.n = y_true.size();
    const Eigen::ArrayXd resid = y_true.array() - y_pred.array();
    m.mse = resid.square().mean();
    m.mae = resid.abs().mean();
    const double ss_res = resid.square().sum();
    const double ss_tot = (y_true.array() - y_true.mean()).square().sum();
    if (ss_tot > 0.0) {
        m.r2 = 1.0 - ss_res / ss_tot;
    } else if (ss_res == 0.0) {
        m.r2 = 1.0; // constant target, perfectly predicted
    }
    return m;
}

MetricSet metrics(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
    return metrics(Eigen::Map<const Eigen::VectorXd>(y_true.data(),
                                                     static_cast<Eigen::Index>(y_true.size())),
                   Eigen::Map<const Eigen::VectorXd>(y_pred.data(),
                                                     static_cast<Eigen::Index>(y_pred.size())));
}

std::vector<int> fold_assignment(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("k-fold needs k >= 2");
    if (static_cast<std::size_t>(k) > n) throw DataError("k-fold needs k <= n_rows");
    Rng rng(derive_seed(seed, 0xF01D + static_cast<std::uint64_t>(k)));
    const std::vector<std::size_t> perm = rng.permutation(n);
    std::vector<int> fold(n, 0);
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k); // first `extra` folds get one more
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) fold[perm[pos++]] = f;
    }
    return fold;
}

namespace {

std::vector<std::size_t> rows_of_fold(const std::vector<int>& fold, int f, bool invert) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < fold.size(); ++r) {
        if ((fold[r] == f) != invert) rows.push_back(r);
    }
    return rows;
}

} // namespace

CVResult kfold_cv(const Table& t, const models::RegressorSpec& spec, int k, std::uint64_t seed) {
    spec.validate();
    CVResult result;
    result.fold_of_row = fold_assignment(t.n_rows(), k, seed);

    double sum = 0.0, sumsq = 0.0;
    int defined = 0;
    for (int f = 0; f < k; ++f) {
        const Table fit_table = t.select_rows(rows_of_fold(result.fold_of_row, f, true));
        const Table val_table = t.select_rows(rows_of_fold(result.fold_of_row, f, false));
        const models::TrainedModel model = models::fit(spec, fit_table);
        const MetricSet s = metrics(models::target_vector(val_table),
                                    models::predict(model, val_table));
        result.fold_scores.push_back(s);
        if (s.r2) {
            sum += *s.r2;
            sumsq += *s.r2 * *s.r2;
            ++defined;
        }
    }
    if (defined > 0) {
        result.mean_r2 = sum / defined;
        if (defined > 1) {
            const double var = (sumsq - sum * sum / defined) / (defined - 1);
            result.std_r2 = std::sqrt(std::max(0.0, var));
        }
    }
    return result;
}

GridSearchResult grid_search(const Table& t, const models::RegressorSpec& spec,
                             const std::map<std::string, std::vector<double>>& grid, int k_inner,
                             std::uint64_t seed) {
    if (grid.empty()) throw ConfigError("grid_search needs a non-empty grid");
    std::vector<std::string> keys;
    for (const auto& [key, values] : grid) {
        if (values.empty()) throw ConfigError("empty value list for grid key " + key);
        keys.push_back(key); // std::map iterates keys sorted
    }

    GridSearchResult result;
    result.k_inner = k_inner;
    std::vector<std::size_t> odometer(keys.size(), 0);
    bool done = false;
    while (!done) {
        models::RegressorSpec candidate = spec;
        GridSearchResult::Candidate entry;
        for (std::size_t i = 0; i < keys.size(); ++i) {
            const double v = grid.at(keys[i])[odometer[i]];
            candidate.params[keys[i]] = v;
            entry.params[keys[i]] = v;
        }
        candidate.validate(); // unknown hyperparameters are a config error
        entry.mean_r2 = kfold_cv(t, candidate, k_inner, seed).mean_r2;
        result.candidates.push_back(std::move(entry));

        // advance, last key fastest
        done = true;
        for (std::size_t i = keys.size(); i-- > 0;) {
            if (++odometer[i] < grid.at(keys[i]).size()) {
                done = false;
                break;
            }
            odometer[i] = 0;
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < result.candidates.size(); ++i) {
        if (result.candidates[i].mean_r2 > result.candidates[best].mean_r2) best = i;
    }
    result.best = result.candidates[best].params;
    return result;
}

AlphaPathResult alpha_path(const Table& t, const std::vector<double>& alpha_grid, int k,
                           std::uint64_t seed) {
    if (alpha_grid.empty()) throw ConfigError("alpha_path needs a non-empty grid");
    if (!std::is_sorted(alpha_grid.begin(), alpha_grid.end())) {
        throw ConfigError("alpha grid must be sorted ascending");
    }

    AlphaPathResult result;
    const std::vector<int> fold = fold_assignment(t.n_rows(), k, seed);
    for (double alpha : alpha_grid) {
        models::RegressorSpec spec;
        spec.algorithm = models::Algorithm::lasso;
        spec.params["alpha"] = alpha;

        double mse_sum = 0.0;
        int folds_used = 0;
        for (int f = 0; f < k; ++f) {
            const Table fit_table = t.select_rows(rows_of_fold(fold, f, true));
            const Table val_table = t.select_rows(rows_of_fold(fold, f, false));
            const models::TrainedModel model = models::fit(spec, fit_table);
            mse_sum += metrics(models::target_vector(val_table),
                               models::predict(model, val_table)).mse;
            ++folds_used;
        }

        const models::TrainedModel full = models::fit(spec, t);
        const auto& lin = std::get<models::LinearModel>(full.params);
        int nonzeros = 0;
        for (Eigen::Index j = 0; j < lin.coefficients.size(); ++j) {
            if (lin.coefficients(j) != 0.0) ++nonzeros;
        }
        result.points.push_back({alpha, mse_sum / folds_used, nonzeros});
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < result.points.size(); ++i) {
        if (result.points[i].cv_mse < result.points[best].cv_mse) best = i;
    }
    result.chosen_alpha = result.points[best].alpha;
    return result;
}

std::vector<ResidualRecord> residuals_data(const models::TrainedModel& model, const Table& train,
                                           const Table& test) {
    std::vector<ResidualRecord> records;
    records.reserve(train.n_rows() + test.n_rows());
    auto emit = [&](const Table& t, const char* tag) {
        if (t.n_rows() == 0) return;
        const Eigen::VectorXd y = models::target_vector(t);
        const Eigen::VectorXd p = models::predict(model, t);
        for (Eigen::Index i = 0; i < y.size(); ++i) records.push_back({tag, p(i), y(i) - p(i)});
    };
    emit(train, "train");
    emit(test, "test");
    return records;
}

void write_residuals_csv(const std::vector<ResidualRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << "split,predicted,residual\n";
    for (const ResidualRecord& r : records) {
        out << r.split << ',' << format_number(r.predicted) << ',' << format_number(r.residual)
            << '\n';
    }
}

PredictionErrorData prediction_error_data(const models::TrainedModel& model, const Table& test) {
    PredictionErrorData data;
    if (test.n_rows() == 0) return data;
    const Eigen::VectorXd y = models::target_vector(test);
    const Eigen::VectorXd p = models::predict(model, test);
    data.points.reserve(static_cast<std::size_t>(y.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) data.points.emplace_back(y(i), p(i));

    // closed-form least squares of predicted on actual
    const double my = y.mean(), mp = p.mean();
    const double var = (y.array() - my).square().sum();
    if (var > 0.0) {
        data.best_fit_slope = ((y.array() - my) * (p.array() - mp)).sum() / var;
        data.best_fit_intercept = mp - data.best_fit_slope * my;
    } else {
        data.best_fit_slope = 0.0; // degenerate actuals
        data.best_fit_intercept = mp;
    }
    return data;
}

void write_prediction_error_csv(const PredictionErrorData& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << "actual,predicted\n";
    for (const auto& [a, p] : data.points) {
        out << format_number(a) << ',' << format_number(p) << '\n';
    }
}

std::vector<LearningCurvePoint> learning_curve(const Table& t, const models::RegressorSpec& spec,
                                               const std::vector<double>& fractions, int k,
                                               std::uint64_t seed) {
    if (fractions.empty()) throw ConfigError("learning_curve needs fractions");
    if (!std::is_sorted(fractions.begin(), fractions.end())) {
        throw ConfigError("fractions must be ascending");
    }
    Rng rng(derive_seed(seed, 0x5C));
    const std::vector<std::size_t> perm = rng.permutation(t.n_rows());

    std::vector<LearningCurvePoint> points;
    for (double f : fractions) {
        if (!(f > 0.0 && f <= 1.0)) throw ConfigError("fractions must lie in (0, 1]");
        const auto m = static_cast<std::size_t>(std::llround(f * static_cast<double>(t.n_rows())));
        if (m < static_cast<std::size_t>(k) || m < 2) {
            throw DataError("fraction too small to fit: " + std::to_string(f));
        }
        std::vector<std::size_t> rows(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m));
        std::sort(rows.begin(), rows.end()); // original order, so f = 1 is the table itself
        const Table sub = t.select_rows(rows);

        LearningCurvePoint point;
        point.fraction = f;
        const models::TrainedModel model = models::fit(spec, sub);
        const MetricSet train_m = metrics(models::target_vector(sub), models::predict(model, sub));
        point.train_r2 = train_m.r2.value_or(0.0);
        point.cv_r2 = kfold_cv(sub, spec, k, seed).mean_r2;
        points.push_back(point);
    }
    return points;
}

void write_learning_curve_csv(const std::vector<LearningCurvePoint>& points,
                              const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << "fraction,train_r2,cv_r2\n";
    for (const LearningCurvePoint& p : points) {
        out << format_number(p.fraction) << ',' << format_number(p.train_r2) << ','
            << format_number(p.cv_r2) << '\n';
    }
}

ProfileReport profile(const Table& t) {
    ProfileReport report;

    if (auto idx = t.find("rmbed"); idx && t.column(*idx).is_numeric) {
        report.has_bedrooms = true;
        const Column& c = t.column(*idx);
        for (std::size_t r = 0; r < t.n_rows(); ++r) {
            if (c.is_missing(r)) ++report.bedroom_missing;
            else ++report.bedroom_histogram[std::llround(c.numeric[r])];
        }
    } else {
        report.notices.push_back("bedroom histogram skipped: no numeric rmbed column");
    }

    std::string month_col;
    if (auto idx = t.find("ys2"); idx && t.column(*idx).is_numeric) {
        month_col = "ys2";
    } else {
        for (const Column& c : t.columns()) {
            if (c.is_numeric && c.name.size() > 2 && c.name.ends_with("_m")) {
                month_col = c.name;
                break;
            }
        }
    }
    if (!month_col.empty()) {
        report.has_months = true;
        report.month_column = month_col;
        const Column& c = t.column(month_col);
        for (std::size_t r = 0; r < t.n_rows(); ++r) {
            if (c.is_missing(r)) continue;
            const auto m = std::llround(c.numeric[r]);
            if (m >= 1 && m <= 12) ++report.month_counts[static_cast<std::size_t>(m - 1)];
        }
    } else {
        report.notices.push_back("monthly counts skipped: no month column (ys2 or *_m)");
    }

    report.summary = stats::describe(t);
    std::vector<std::string> numeric_cols;
    for (const Column& c : t.columns()) {
        if (c.is_numeric) numeric_cols.push_back(c.name);
    }
    if (numeric_cols.size() >= 2) report.correlation = stats::pearson_matrix(t, numeric_cols);
    return report;
}

void write_profile_csvs(const ProfileReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    if (report.has_bedrooms) {
        std::ofstream out(fs::path(out_dir) / "profile_bedrooms.csv", std::ios::binary);
        out << "bedrooms,count\n";
        for (const auto& [value, count] : report.bedroom_histogram) {
            out << value << ',' << count << '\n';
        }
        if (report.bedroom_missing > 0) out << "missing," << report.bedroom_missing << '\n';
    }
    if (report.has_months) {
        std::ofstream out(fs::path(out_dir) / "profile_months.csv", std::ios::binary);
        out << "month,count\n";
        for (std::size_t m = 0; m < 12; ++m) out << (m + 1) << ',' << report.month_counts[m] << '\n';
    }
    {
        std::ofstream out(fs::path(out_dir) / "profile_describe.csv", std::ios::binary);
        out << "column,mean,std,min,max,missing_count\n";
        auto cell = [](const std::optional<double>& v) {
            return v ? format_number(*v) : std::string();
        };
        for (const stats::ColumnSummary& s : report.summary) {
            out << s.name << ',' << cell(s.mean) << ',' << cell(s.stddev) << ',' << cell(s.min)
                << ',' << cell(s.max) << ',' << s.missing_count << '\n';
        }
    }
    if (!report.correlation.names.empty()) {
        report.correlation.write_csv((fs::path(out_dir) / "profile_correlation.csv").string());
    }
}

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

ComparisonReport compare_models(const Table& train, const Table& test,
                                const std::vector<std::pair<std::string, models::RegressorSpec>>& specs,
                                features::BinSpec bin_spec,
                                const models::RegressorSpec& bin_predictor_spec,
                                features::BinMode mode, const Table* sample,
                                const outliers::TukeyParams& step3) {
    if (specs.empty()) throw ConfigError("compare_models needs at least one spec");

    ComparisonReport report;
    report.dataset_fingerprint = train.fingerprint() ^ (test.fingerprint() * 0x9e3779b97f4a7c15ULL);
    report.bin_mode = features::to_string(mode);
    report.bin_count = bin_spec.n_bins;

    // One binning stage shared by every model's after-arm.
    Table aug_train, aug_test, aug_sample;
    bool binning_ok = false;
    std::string binning_error;
    try {
        auto [augmented, bin_model] = features::target_binning_fit(train, bin_spec,
                                                                   bin_predictor_spec, mode, step3);
        aug_train = std::move(augmented);
        aug_test = features::target_binning_transform(bin_model, test);
        if (sample) aug_sample = features::target_binning_transform(bin_model, *sample);
        report.binning_rows_removed = static_cast<std::int64_t>(bin_model.removed_outliers.size());
        binning_ok = true;
    } catch (const Error& e) {
        binning_error = e.what();
    }
    if (sample) {
        const Eigen::VectorXd ys = models::target_vector(*sample);
        report.sample_actual.assign(ys.begin(), ys.end());
    }

    const Eigen::VectorXd y_test = models::target_vector(test);
    for (const auto& [name, spec] : specs) {
        ComparisonRow row;
        row.name = name;
        row.spec = spec;
        const bool is_baseline = spec.algorithm == models::Algorithm::baseline_column;
        try {
            auto t0 = std::chrono::steady_clock::now();
            const models::TrainedModel model = models::fit(spec, train);
            row.fit_seconds += seconds_since(t0);
            t0 = std::chrono::steady_clock::now();
            const Eigen::VectorXd pred = models::predict(model, test);
            row.predict_seconds += seconds_since(t0);
            row.before = metrics(y_test, pred);
            if (sample && is_baseline) {
                const Eigen::VectorXd sp = models::predict(model, *sample);
                row.sample_predictions.assign(sp.begin(), sp.end());
            }
        } catch (const Error& e) {
            row.error = std::string("before: ") + e.what();
        }
        if (!is_baseline && row.error.empty()) {
            if (!binning_ok) {
                row.error = "after: binning failed: " + binning_error;
            } else {
                try {
                    auto t0 = std::chrono::steady_clock::now();
                    const models::TrainedModel model = models::fit(spec, aug_train);
                    row.fit_seconds += seconds_since(t0);
                    t0 = std::chrono::steady_clock::now();
                    const Eigen::VectorXd pred = models::predict(model, aug_test);
                    row.predict_seconds += seconds_since(t0);
                    row.after = metrics(y_test, pred);
                    if (sample) {
                        const Eigen::VectorXd sp = models::predict(model, aug_sample);
                        row.sample_predictions.assign(sp.begin(), sp.end());
                    }
                } catch (const Error& e) {
                    row.error = std::string("after: ") + e.what();
                }
            }
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace tabreg::eval
