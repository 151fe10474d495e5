#include "tabreg/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "tabreg/metrics.hpp"
#include "tabreg/rng.hpp"
#include "tabreg/stats.hpp"

namespace tabreg::features {

void BinSpec::validate() const {
    if (n_bins < 1) throw ConfigError("n_bins must be >= 1");
}

std::string to_string(BinSpec::Strategy s) {
    return s == BinSpec::Strategy::equal_width ? "equal_width" : "quantile";
}

BinSpec::Strategy strategy_from_string(const std::string& s) {
    if (s == "equal_width") return BinSpec::Strategy::equal_width;
    if (s == "quantile") return BinSpec::Strategy::quantile;
    throw ConfigError("unknown binning strategy: " + s);
}

std::string to_string(BinMode m) {
    return m == BinMode::in_sample ? "in_sample" : "out_of_fold";
}

BinMode bin_mode_from_string(const std::string& s) {
    if (s == "in_sample") return BinMode::in_sample;
    if (s == "out_of_fold") return BinMode::out_of_fold;
    throw ConfigError("unknown binning mode: " + s);
}

std::vector<int> bin_target(const std::vector<double>& prices, BinSpec& spec) {
    spec.validate();
    if (prices.empty()) throw DataError("bin_target of empty data");

    std::vector<int> labels(prices.size());
    if (spec.strategy == BinSpec::Strategy::equal_width) {
        const double lo = *std::min_element(prices.begin(), prices.end());
        const double hi = *std::max_element(prices.begin(), prices.end());
        if (!(hi > lo)) throw DataError("bin_target: constant prices have zero width");
        const double width = (hi - lo) / spec.n_bins;
        spec.edges.resize(static_cast<std::size_t>(spec.n_bins) + 1);
        for (int i = 0; i <= spec.n_bins; ++i) spec.edges[static_cast<std::size_t>(i)] = lo + width * i;
        spec.edges.back() = hi;
        for (std::size_t i = 0; i < prices.size(); ++i) {
            const auto raw = static_cast<int>(std::floor(spec.n_bins * (prices[i] - lo) / (hi - lo)));
            labels[i] = std::clamp(raw, 0, spec.n_bins - 1);
        }
    } else {
        std::vector<double> edges;
        edges.reserve(static_cast<std::size_t>(spec.n_bins) + 1);
        for (int i = 0; i <= spec.n_bins; ++i) {
            edges.push_back(stats::quantile(prices, static_cast<double>(i) / spec.n_bins));
        }
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        if (edges.size() < 2) throw DataError("bin_target: constant prices have zero width");
        spec.edges = edges;
        const auto n_eff = static_cast<int>(edges.size()) - 1;
        for (std::size_t i = 0; i < prices.size(); ++i) {
            // label = index of the half-open interval [e_k, e_{k+1}), last one closed
            const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, prices[i]);
            labels[i] = std::clamp(static_cast<int>(it - edges.begin()) - 1, 0, n_eff - 1);
        }
    }
    return labels;
}

int EncodingMap::code_of(const std::string& category) const {
    for (std::size_t i = 0; i < categories.size(); ++i) {
        if (categories[i] == category) return static_cast<int>(i);
    }
    return static_cast<int>(categories.size()); // reserved unseen code
}

namespace {

bool parse_iso_date(const std::string& s, int& y, int& m, int& d) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    auto num = [&](std::size_t from, std::size_t len, int& out) {
        auto [p, ec] = std::from_chars(s.data() + from, s.data() + from + len, out);
        return ec == std::errc() && p == s.data() + from + len;
    };
    if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return false;
    return m >= 1 && m <= 12 && d >= 1 && d <= 31;
}

bool parse_year(const std::string& s, int& y) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), y);
    return ec == std::errc() && p == s.data() + s.size();
}

std::pair<std::string, std::string> derived_names(const std::string& column, bool iso_mode) {
    if (column == "sale_date") return {"ys1", "ys2"};
    if (column == "yrblt") return {"yb1", "yb2"};
    return {column + "_y", iso_mode ? column + "_m" : column + "_dec"};
}

} // namespace

Table encode_date(const Table& t, const std::string& column) {
    const Column& c = t.column(column);
    if (c.is_numeric) throw DataError("encode_date: column has numeric storage: " + column);

    // Mode detection from the first present cell: ISO date vs bare year.
    bool iso_mode = true;
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        if (c.is_missing(r)) continue;
        int y, m, d;
        iso_mode = parse_iso_date(c.text[r], y, m, d);
        break;
    }

    const auto [name1, name2] = derived_names(column, iso_mode);
    Column c1, c2;
    c1.name = name1;
    c2.name = name2;
    c1.role = c2.role = ColumnRole::numeric_feature;
    c1.is_numeric = c2.is_numeric = true;
    c1.numeric.assign(t.n_rows(), 0.0);
    c2.numeric.assign(t.n_rows(), 0.0);
    c1.missing = c.missing;
    c2.missing = c.missing;

    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        if (c.is_missing(r)) continue;
        if (iso_mode) {
            int y, m, d;
            if (!parse_iso_date(c.text[r], y, m, d)) {
                throw DataError("encode_date: unparseable date '" + c.text[r] + "' in column " +
                                column + " at row " + std::to_string(r));
            }
            c1.numeric[r] = y;
            c2.numeric[r] = m;
        } else {
            int y;
            if (!parse_year(c.text[r], y)) {
                throw DataError("encode_date: unparseable year '" + c.text[r] + "' in column " +
                                column + " at row " + std::to_string(r));
            }
            c1.numeric[r] = y;
            c2.numeric[r] = std::floor(static_cast<double>(y) / 10.0);
        }
    }
    std::vector<Column> replacement;
    replacement.push_back(std::move(c1));
    replacement.push_back(std::move(c2));
    return t.replace_column(column, std::move(replacement));
}

std::pair<Table, EncodingMap> ordinal_encode(const Table& t, const std::string& column) {
    const Column& c = t.column(column);
    if (c.is_numeric) throw DataError("ordinal_encode: column has numeric storage: " + column);

    EncodingMap map;
    map.column = column;
    map.kind = EncodingMap::Kind::ordinal_label;
    std::map<std::string, int> code;
    Column enc;
    enc.name = c.name;
    enc.role = c.role;
    enc.is_numeric = true;
    enc.missing = c.missing;
    enc.numeric.reserve(t.n_rows());
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        if (c.is_missing(r)) {
            enc.numeric.push_back(0.0);
            continue;
        }
        auto [it, inserted] = code.emplace(c.text[r], static_cast<int>(map.categories.size()));
        if (inserted) map.categories.push_back(c.text[r]);
        enc.numeric.push_back(it->second);
    }
    std::vector<Column> replacement;
    replacement.push_back(std::move(enc));
    return {t.replace_column(column, std::move(replacement)), std::move(map)};
}

std::pair<Table, EncodingMap> mean_target_encode(const Table& t, const std::string& column,
                                                 double m) {
    const Column& c = t.column(column);
    if (c.is_numeric) throw DataError("mean_target_encode: column has numeric storage: " + column);
    const auto target_idx = t.target_index();
    if (!target_idx) throw DataError("mean_target_encode needs a target column");
    const Column& y = t.column(*target_idx);

    double global_sum = 0.0;
    std::int64_t global_n = 0;
    std::map<std::string, std::pair<double, std::int64_t>> acc; // sum, count
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        if (c.is_missing(r) || y.is_missing(r)) continue;
        global_sum += y.numeric[r];
        ++global_n;
        auto& a = acc[c.text[r]];
        a.first += y.numeric[r];
        a.second += 1;
    }
    if (global_n == 0) throw DataError("mean_target_encode: no complete rows");

    EncodingMap map;
    map.column = column;
    map.kind = EncodingMap::Kind::mean_target;
    map.smoothing_m = m;
    map.global_mean = global_sum / static_cast<double>(global_n);
    for (const auto& [cat, a] : acc) {
        map.category_means[cat] =
            (a.first + m * map.global_mean) / (static_cast<double>(a.second) + m);
    }

    auto [encoded, unseen] = map.apply(t);
    (void)unseen;
    return {std::move(encoded), std::move(map)};
}

std::pair<Table, std::int64_t> EncodingMap::apply(const Table& t) const {
    const Column& c = t.column(column);
    if (c.is_numeric) throw DataError("encoder: column has numeric storage: " + column);
    Column enc;
    enc.name = c.name;
    enc.role = c.role;
    enc.is_numeric = true;
    enc.missing = c.missing;
    enc.numeric.assign(t.n_rows(), 0.0);
    std::int64_t unseen = 0;

    if (kind == Kind::ordinal_label) {
        std::map<std::string, int> code;
        for (std::size_t i = 0; i < categories.size(); ++i) {
            code[categories[i]] = static_cast<int>(i);
        }
        for (std::size_t r = 0; r < t.n_rows(); ++r) {
            if (c.is_missing(r)) continue;
            auto it = code.find(c.text[r]);
            if (it == code.end()) {
                enc.numeric[r] = static_cast<double>(categories.size());
                ++unseen;
            } else {
                enc.numeric[r] = it->second;
            }
        }
    } else if (kind == Kind::mean_target) {
        for (std::size_t r = 0; r < t.n_rows(); ++r) {
            if (c.is_missing(r)) continue;
            auto it = category_means.find(c.text[r]);
            if (it == category_means.end()) {
                enc.numeric[r] = global_mean;
                ++unseen;
            } else {
                enc.numeric[r] = it->second;
            }
        }
    } else {
        throw ConfigError("date_split encoders are applied via encode_date");
    }
    std::vector<Column> replacement;
    replacement.push_back(std::move(enc));
    return {t.replace_column(column, std::move(replacement)), unseen};
}

namespace {

Eigen::VectorXd clamped_bin_predictions(const models::TrainedModel& predictor,
                                        const Eigen::MatrixXd& X, int n_bins) {
    Eigen::VectorXd p = models::predict(predictor, X);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        p(i) = std::clamp(p(i), 0.0, static_cast<double>(n_bins - 1));
    }
    return p;
}

} // namespace

std::pair<Table, BinModel> target_binning_fit(const Table& train, BinSpec spec,
                                              const models::RegressorSpec& predictor_spec,
                                              BinMode mode, const outliers::TukeyParams& step3) {
    predictor_spec.validate();
    const Eigen::VectorXd y = models::target_vector(train);
    std::vector<double> prices(y.begin(), y.end());
    const std::vector<int> labels = bin_target(prices, spec);

    std::vector<std::string> names = train.numeric_feature_names();
    if (names.empty()) throw DataError("target binning needs numeric feature columns");
    const Eigen::MatrixXd X = models::design_matrix(train, names);
    Eigen::VectorXd ybin(y.size());
    for (Eigen::Index i = 0; i < ybin.size(); ++i) {
        ybin(i) = static_cast<double>(labels[static_cast<std::size_t>(i)]);
    }

    BinModel model;
    model.spec = spec;
    model.mode = mode;
    model.step3_params = step3;
    model.bin_predictor = models::fit(predictor_spec, X, ybin, names);

    Eigen::VectorXd predicted;
    if (mode == BinMode::in_sample) {
        predicted = clamped_bin_predictions(model.bin_predictor, X, spec.n_bins);
    } else {
        const int k = 5;
        model.fold_of_row = eval::fold_assignment(train.n_rows(), k, predictor_spec.seed);
        predicted.resize(y.size());
        for (int f = 0; f < k; ++f) {
            std::vector<std::size_t> fit_rows, val_rows;
            for (std::size_t r = 0; r < train.n_rows(); ++r) {
                (model.fold_of_row[r] == f ? val_rows : fit_rows).push_back(r);
            }
            if (fit_rows.empty() || val_rows.empty()) continue;
            Eigen::MatrixXd Xf(static_cast<Eigen::Index>(fit_rows.size()), X.cols());
            Eigen::VectorXd yf(static_cast<Eigen::Index>(fit_rows.size()));
            for (std::size_t i = 0; i < fit_rows.size(); ++i) {
                Xf.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(fit_rows[i]));
                yf(static_cast<Eigen::Index>(i)) = ybin(static_cast<Eigen::Index>(fit_rows[i]));
            }
            models::RegressorSpec fold_spec = predictor_spec;
            fold_spec.seed = derive_seed(predictor_spec.seed, static_cast<std::uint64_t>(f) + 1);
            const models::TrainedModel fold_model = models::fit(fold_spec, Xf, yf, names);
            Eigen::MatrixXd Xv(static_cast<Eigen::Index>(val_rows.size()), X.cols());
            for (std::size_t i = 0; i < val_rows.size(); ++i) {
                Xv.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(val_rows[i]));
            }
            const Eigen::VectorXd pv = clamped_bin_predictions(fold_model, Xv, spec.n_bins);
            for (std::size_t i = 0; i < val_rows.size(); ++i) {
                predicted(static_cast<Eigen::Index>(val_rows[i])) = pv(static_cast<Eigen::Index>(i));
            }
        }
    }

    const std::vector<double> pred_vec(predicted.begin(), predicted.end());
    const outliers::OutlierReport report = outliers::tukey_fences(pred_vec, step3);
    model.removed_outliers = report.flagged;

    std::vector<std::size_t> survivors;
    survivors.reserve(train.n_rows());
    std::size_t next_flag = 0;
    for (std::size_t r = 0; r < train.n_rows(); ++r) {
        if (next_flag < report.flagged.size() &&
            static_cast<std::int64_t>(r) == report.flagged[next_flag]) {
            ++next_flag;
            continue;
        }
        survivors.push_back(r);
    }
    if (survivors.empty()) throw DataError("target binning removed every training row");

    Column bin_col;
    bin_col.name = "predicted_bin";
    bin_col.role = ColumnRole::numeric_feature;
    bin_col.is_numeric = true;
    bin_col.missing.assign(survivors.size(), 0);
    bin_col.numeric.reserve(survivors.size());
    for (std::size_t r : survivors) {
        bin_col.numeric.push_back(predicted(static_cast<Eigen::Index>(r)));
    }
    Table augmented = train.select_rows(survivors).with_column(std::move(bin_col));
    return {std::move(augmented), std::move(model)};
}

Table target_binning_transform(const BinModel& model, const Table& rows) {
    if (rows.has_column("predicted_bin")) {
        throw DataError("table already carries a predicted_bin column");
    }
    Column bin_col;
    bin_col.name = "predicted_bin";
    bin_col.role = ColumnRole::numeric_feature;
    bin_col.is_numeric = true;
    bin_col.missing.assign(rows.n_rows(), 0);
    if (rows.n_rows() > 0) {
        const Eigen::MatrixXd X = models::design_matrix(rows, model.bin_predictor.feature_names);
        const Eigen::VectorXd p = clamped_bin_predictions(model.bin_predictor, X, model.spec.n_bins);
        bin_col.numeric.assign(p.begin(), p.end());
    }
    return rows.with_column(std::move(bin_col));
}

CorrelationFilterResult correlation_filter(const Table& t, const std::string& target,
                                           double threshold) {
    const auto target_idx = t.find(target);
    if (!target_idx) throw DataError("correlation_filter: unknown target column " + target);
    const Column& y = t.column(*target_idx);
    if (!y.is_numeric) throw DataError("correlation_filter: target is not numeric");

    CorrelationFilterResult result;
    for (const Column& c : t.columns()) {
        const bool is_feature = c.role == ColumnRole::numeric_feature ||
                                c.role == ColumnRole::categorical_feature ||
                                c.role == ColumnRole::date_feature;
        if (!is_feature) continue;
        if (!c.is_numeric) {
            result.retained.push_back(c.name); // not judged until encoded
            continue;
        }
        std::vector<double> xs, ys;
        xs.reserve(t.n_rows());
        ys.reserve(t.n_rows());
        for (std::size_t r = 0; r < t.n_rows(); ++r) {
            if (c.is_missing(r) || y.is_missing(r)) continue;
            xs.push_back(c.numeric[r]);
            ys.push_back(y.numeric[r]);
        }
        const std::optional<double> r = stats::pearson(xs, ys);
        if (!r) {
            result.dropped.emplace_back(c.name, 0.0); // constant feature carries no signal
        } else if (std::abs(*r) < threshold) {
            result.dropped.emplace_back(c.name, *r);
        } else {
            result.retained.push_back(c.name);
        }
    }
    return result;
}

namespace {

double cv_mean_r2(const Table& train, const std::vector<std::string>& feature_names,
                  const models::RegressorSpec& spec, int k_folds) {
    const auto target_idx = train.target_index();
    if (!target_idx) throw DataError("importance_select needs a target column");
    const Eigen::MatrixXd X = models::design_matrix(train, feature_names);
    const Eigen::VectorXd y = models::target_vector(train);
    const std::vector<int> folds = eval::fold_assignment(train.n_rows(), k_folds, spec.seed);

    double sum = 0.0;
    int defined = 0;
    for (int f = 0; f < k_folds; ++f) {
        std::vector<std::size_t> fit_rows, val_rows;
        for (std::size_t r = 0; r < train.n_rows(); ++r) {
            (folds[r] == f ? val_rows : fit_rows).push_back(r);
        }
        if (fit_rows.empty() || val_rows.empty()) continue;
        Eigen::MatrixXd Xf(static_cast<Eigen::Index>(fit_rows.size()), X.cols());
        Eigen::VectorXd yf(static_cast<Eigen::Index>(fit_rows.size()));
        for (std::size_t i = 0; i < fit_rows.size(); ++i) {
            Xf.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(fit_rows[i]));
            yf(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(fit_rows[i]));
        }
        Eigen::MatrixXd Xv(static_cast<Eigen::Index>(val_rows.size()), X.cols());
        Eigen::VectorXd yv(static_cast<Eigen::Index>(val_rows.size()));
        for (std::size_t i = 0; i < val_rows.size(); ++i) {
            Xv.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(val_rows[i]));
            yv(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(val_rows[i]));
        }
        const models::TrainedModel m = models::fit(spec, Xf, yf, feature_names);
        const eval::MetricSet s = eval::metrics(yv, models::predict(m, Xv));
        if (s.r2) {
            sum += *s.r2;
            ++defined;
        }
    }
    if (defined == 0) return -std::numeric_limits<double>::infinity();
    return sum / defined;
}

} // namespace

std::vector<std::string> importance_select(const Table& train,
                                           const models::RegressorSpec& model_spec,
                                           int k_folds, double tolerance) {
    model_spec.validate();
    if (k_folds < 2) throw ConfigError("importance_select needs k_folds >= 2");
    std::vector<std::string> current = train.numeric_feature_names();
    if (current.size() < 2) throw DataError("importance_select needs at least 2 features");

    const Eigen::VectorXd y = models::target_vector(train);
    std::vector<std::string> best_set = current;
    double best_score = cv_mean_r2(train, current, model_spec, k_folds);

    while (current.size() > 1) {
        const Eigen::MatrixXd X = models::design_matrix(train, current);
        const models::TrainedModel fitted = models::fit(model_spec, X, y, current);
        const models::ImportanceVector iv = models::feature_importance(fitted);
        std::size_t weakest = 0;
        for (std::size_t j = 1; j < iv.scores.size(); ++j) {
            if (iv.scores[j] < iv.scores[weakest]) weakest = j;
        }
        std::vector<std::string> candidate = current;
        candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(weakest));
        const double score = cv_mean_r2(train, candidate, model_spec, k_folds);
        if (score < best_score - tolerance) break;
        current = std::move(candidate);
        if (score >= best_score) { // ties favor the smaller feature set
            best_score = score;
            best_set = current;
        }
    }
    return best_set;
}

} // namespace tabreg::features
