#include "tabreg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tabreg/rng.hpp"

namespace tabreg {

namespace {

// Days since 1970-01-01 -> (y, m, d), proleptic Gregorian.
void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const std::int64_t doe = z - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = static_cast<int>(yoe + era * 400 + (m <= 2 ? 1 : 0));
}

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const std::int64_t yoe = y - era * 400;
    const std::int64_t doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

std::string iso_date(std::int64_t days) {
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

constexpr std::uint64_t kNoiseStream = 1u << 20;
constexpr std::uint64_t kDuplicateStream = (1u << 20) + 1;
constexpr std::uint64_t kNullStream = (1u << 20) + 2;
constexpr std::uint64_t kOutlierStream = (1u << 20) + 3;

} // namespace

void SynthSpec::validate() const {
    if (columns.empty()) throw ConfigError("synth spec has no columns");
    std::size_t targets = 0;
    for (const SynthColumn& c : columns) {
        if (c.std < 0) throw ConfigError("negative std for column " + c.name);
        if (c.role == ColumnRole::target) ++targets;
    }
    if (targets != 1) throw ConfigError("synth spec needs exactly one target column");
    auto rate_ok = [](double r) { return r >= 0.0 && r < 1.0; };
    if (!rate_ok(corruption.duplicate_rate) || !rate_ok(corruption.null_rate) ||
        !rate_ok(corruption.outlier_rate)) {
        throw ConfigError("corruption rates must lie in [0, 1)");
    }
    if (corruption.outlier_rate > 0 && corruption.outlier_scale <= 1.0) {
        throw ConfigError("outlier_scale must be > 1");
    }
    for (const auto& [name, coef] : ground_truth.coefficients) {
        (void)coef;
        auto it = std::find_if(columns.begin(), columns.end(),
                               [&](const SynthColumn& c) { return c.name == name; });
        if (it == columns.end()) throw ConfigError("ground-truth coefficient for unknown column " + name);
        if (it->role != ColumnRole::numeric_feature && it->role != ColumnRole::appraisal_baseline) {
            throw ConfigError("ground-truth coefficient on non-numeric column " + name);
        }
    }
    if (ground_truth.noise_std < 0) throw ConfigError("negative noise_std");
}

SynthResult synthesize_dataset(const SynthSpec& spec, std::size_t n_rows) {
    spec.validate();
    if (n_rows < 1) throw ConfigError("n_rows must be >= 1");

    SynthResult out;
    const std::int64_t day_lo = days_from_civil(2015, 1, 1);
    const std::int64_t day_hi = days_from_civil(2019, 11, 13);

    std::vector<Column> cols;
    cols.reserve(spec.columns.size());
    std::size_t target_slot = 0;
    for (std::size_t ci = 0; ci < spec.columns.size(); ++ci) {
        const SynthColumn& sc = spec.columns[ci];
        Rng rng(derive_seed(spec.seed, ci));
        Column c;
        c.name = sc.name;
        c.role = sc.role;
        c.missing.assign(n_rows, 0);
        switch (sc.role) {
            case ColumnRole::categorical_feature: {
                c.is_numeric = false;
                c.text.reserve(n_rows);
                for (std::size_t r = 0; r < n_rows; ++r) {
                    const auto code = std::llround(sc.mean + sc.std * rng.normal());
                    c.text.push_back(std::to_string(code));
                }
                break;
            }
            case ColumnRole::date_feature: {
                c.is_numeric = false;
                c.text.reserve(n_rows);
                if (sc.std > 0) {
                    // bare calendar year
                    for (std::size_t r = 0; r < n_rows; ++r) {
                        c.text.push_back(std::to_string(std::llround(sc.mean + sc.std * rng.normal())));
                    }
                } else {
                    for (std::size_t r = 0; r < n_rows; ++r) {
                        const std::int64_t day = day_lo + rng.uniform_int(0, day_hi - day_lo);
                        int y, m, d;
                        civil_from_days(day, y, m, d);
                        ++out.log.month_counts[static_cast<std::size_t>(m - 1)];
                        c.text.push_back(iso_date(day));
                    }
                }
                break;
            }
            case ColumnRole::target: {
                c.is_numeric = true;
                c.numeric.assign(n_rows, 0.0); // filled from the ground truth below
                target_slot = ci;
                break;
            }
            default: { // identifier, numeric_feature, appraisal_baseline
                c.is_numeric = true;
                c.numeric.reserve(n_rows);
                for (std::size_t r = 0; r < n_rows; ++r) {
                    double v = sc.mean + sc.std * rng.normal();
                    if (sc.round_to_int) v = static_cast<double>(std::llround(v));
                    c.numeric.push_back(v);
                }
                break;
            }
        }
        cols.push_back(std::move(c));
    }

    // Ground truth and target.
    std::vector<std::size_t> coef_cols;
    std::vector<double> coef_vals;
    for (std::size_t ci = 0; ci < spec.columns.size(); ++ci) {
        auto it = spec.ground_truth.coefficients.find(spec.columns[ci].name);
        if (it != spec.ground_truth.coefficients.end() && it->second != 0.0) {
            coef_cols.push_back(ci);
            coef_vals.push_back(it->second);
        }
    }
    double interaction_scale = 0.0;
    if (spec.ground_truth.nonlinearity == GroundTruth::Nonlinearity::interaction &&
        coef_cols.size() >= 2) {
        const double s0 = std::abs(coef_vals[0]) * spec.columns[coef_cols[0]].std;
        const double s1 = std::abs(coef_vals[1]) * spec.columns[coef_cols[1]].std;
        interaction_scale = std::sqrt(s0 * s1);
    }

    out.truth.resize(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
        double t = 0.0;
        for (std::size_t k = 0; k < coef_cols.size(); ++k) {
            t += coef_vals[k] * cols[coef_cols[k]].numeric[r];
        }
        if (interaction_scale != 0.0) {
            auto z = [&](std::size_t k) {
                const SynthColumn& sc = spec.columns[coef_cols[k]];
                return sc.std > 0 ? (cols[coef_cols[k]].numeric[r] - sc.mean) / sc.std : 0.0;
            };
            t += interaction_scale * z(0) * z(1);
        }
        out.truth[r] = t;
    }
    {
        Rng noise(derive_seed(spec.seed, kNoiseStream));
        for (std::size_t r = 0; r < n_rows; ++r) {
            cols[target_slot].numeric[r] =
                out.truth[r] + spec.ground_truth.noise_std * noise.normal();
        }
    }

    // Corruption, logged with exact indices.
    const auto k_dup = static_cast<std::size_t>(std::llround(spec.corruption.duplicate_rate *
                                                             static_cast<double>(n_rows)));
    if (k_dup > 0) {
        Rng rng(derive_seed(spec.seed, kDuplicateStream));
        for (std::size_t i = 0; i < k_dup; ++i) {
            const auto src = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(n_rows) - 1));
            for (Column& c : cols) {
                c.missing.push_back(c.missing[src]);
                if (c.is_numeric) c.numeric.push_back(c.numeric[src]);
                else c.text.push_back(c.text[src]);
            }
            out.truth.push_back(out.truth[src]);
            out.log.duplicates.emplace_back(static_cast<std::int64_t>(n_rows + i),
                                            static_cast<std::int64_t>(src));
        }
    }
    const std::size_t total_rows = n_rows + k_dup;

    const auto k_null = static_cast<std::size_t>(std::llround(spec.corruption.null_rate *
                                                              static_cast<double>(n_rows)));
    if (k_null > 0) {
        std::vector<std::size_t> feature_cols;
        for (std::size_t ci = 0; ci < cols.size(); ++ci) {
            const ColumnRole role = cols[ci].role;
            if (role == ColumnRole::numeric_feature || role == ColumnRole::categorical_feature ||
                role == ColumnRole::date_feature) {
                feature_cols.push_back(ci);
            }
        }
        if (feature_cols.empty()) throw ConfigError("null corruption needs feature columns");
        Rng rng(derive_seed(spec.seed, kNullStream));
        std::vector<std::size_t> rows = rng.sample_without_replacement(total_rows, k_null);
        for (std::size_t r : rows) {
            const std::size_t ci = feature_cols[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(feature_cols.size()) - 1))];
            cols[ci].missing[r] = 1;
            if (cols[ci].is_numeric) cols[ci].numeric[r] = 0.0;
            else cols[ci].text[r].clear();
            out.log.nulls.emplace_back(static_cast<std::int64_t>(r), cols[ci].name);
        }
        std::sort(out.log.nulls.begin(), out.log.nulls.end());
    }

    const auto k_out = static_cast<std::size_t>(std::llround(spec.corruption.outlier_rate *
                                                             static_cast<double>(n_rows)));
    if (k_out > 0) {
        Rng rng(derive_seed(spec.seed, kOutlierStream));
        std::vector<std::size_t> rows = rng.sample_without_replacement(total_rows, k_out);
        std::sort(rows.begin(), rows.end());
        for (std::size_t r : rows) {
            cols[target_slot].numeric[r] *= spec.corruption.outlier_scale;
            out.log.outliers.push_back(static_cast<std::int64_t>(r));
        }
    }

    out.table = Table(std::move(cols));
    return out;
}

namespace {

nlohmann::json column_to_json(const SynthColumn& c) {
    nlohmann::json j{{"name", c.name}, {"role", to_string(c.role)}};
    if (c.std > 0 || c.mean != 0) {
        j["mean"] = c.mean;
        j["std"] = c.std;
    }
    if (c.round_to_int) j["round_to_int"] = true;
    return j;
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
                return it.key() == k;
            }) == allowed.end()) {
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
        }
    }
}

} // namespace

SynthSpec SynthSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open synth spec: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("synth spec is not valid JSON: " + std::string(e.what()));
    }
    check_keys(j, {"columns", "ground_truth", "corruption", "seed"}, "synth spec");
    SynthSpec spec;
    spec.seed = j.value("seed", std::uint64_t{0});
    for (const auto& cj : j.at("columns")) {
        check_keys(cj, {"name", "role", "mean", "std", "round_to_int"}, "synth column");
        SynthColumn c;
        c.name = cj.at("name").get<std::string>();
        c.role = role_from_string(cj.at("role").get<std::string>());
        c.mean = cj.value("mean", 0.0);
        c.std = cj.value("std", 0.0);
        c.round_to_int = cj.value("round_to_int", false);
        spec.columns.push_back(std::move(c));
    }
    if (j.contains("ground_truth")) {
        const auto& gj = j.at("ground_truth");
        check_keys(gj, {"coefficients", "noise_std", "nonlinearity"}, "ground_truth");
        for (auto it = gj.at("coefficients").begin(); it != gj.at("coefficients").end(); ++it) {
            spec.ground_truth.coefficients[it.key()] = it.value().get<double>();
        }
        spec.ground_truth.noise_std = gj.value("noise_std", 0.0);
        const std::string nl = gj.value("nonlinearity", std::string("none"));
        if (nl == "none") spec.ground_truth.nonlinearity = GroundTruth::Nonlinearity::none;
        else if (nl == "interaction") spec.ground_truth.nonlinearity = GroundTruth::Nonlinearity::interaction;
        else throw ConfigError("unknown nonlinearity: " + nl);
    }
    if (j.contains("corruption")) {
        const auto& cj = j.at("corruption");
        check_keys(cj, {"duplicate_rate", "null_rate", "outlier_rate", "outlier_scale"}, "corruption");
        spec.corruption.duplicate_rate = cj.value("duplicate_rate", 0.0);
        spec.corruption.null_rate = cj.value("null_rate", 0.0);
        spec.corruption.outlier_rate = cj.value("outlier_rate", 0.0);
        spec.corruption.outlier_scale = cj.value("outlier_scale", 5.0);
    }
    spec.validate();
    return spec;
}

void SynthSpec::save_json(const std::string& path) const {
    nlohmann::json j;
    j["seed"] = seed;
    j["columns"] = nlohmann::json::array();
    for (const SynthColumn& c : columns) j["columns"].push_back(column_to_json(c));
    j["ground_truth"] = {
        {"coefficients", ground_truth.coefficients},
        {"noise_std", ground_truth.noise_std},
        {"nonlinearity",
         ground_truth.nonlinearity == GroundTruth::Nonlinearity::none ? "none" : "interaction"},
    };
    j["corruption"] = {
        {"duplicate_rate", corruption.duplicate_rate},
        {"null_rate", corruption.null_rate},
        {"outlier_rate", corruption.outlier_rate},
        {"outlier_scale", corruption.outlier_scale},
    };
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << j.dump(2) << '\n';
}

void GenerationLog::save_json(const std::string& path) const {
    nlohmann::json j;
    j["duplicates"] = nlohmann::json::array();
    for (const auto& [row, src] : duplicates) j["duplicates"].push_back({{"row", row}, {"source", src}});
    j["nulls"] = nlohmann::json::array();
    for (const auto& [row, col] : nulls) j["nulls"].push_back({{"row", row}, {"column", col}});
    j["outliers"] = outliers;
    j["month_counts"] = month_counts;
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << j.dump(2) << '\n';
}

SynthSpec SynthSpec::bundled_default() {
    SynthSpec s;
    s.seed = 4;
    auto num = [&](const char* name, double mean, double std) {
        s.columns.push_back({name, ColumnRole::numeric_feature, mean, std, false});
    };
    s.columns.push_back({"parid", ColumnRole::identifier, 4386556, 1780110, true});
    num("aprland", 31512.52238, 22474.45819);
    num("aprbldg", 153352.0601, 65863.09319);
    s.columns.push_back({"aprtot", ColumnRole::appraisal_baseline, 184864.5824, 78255.48143, false});
    s.columns.push_back({"nbhd", ColumnRole::categorical_feature, 3553.249727, 1617.738503, false});
    s.columns.push_back({"rmbed", ColumnRole::numeric_feature, 2.940746, 0.747859, true});
    num("sfla", 1670.539912, 590.574028);
    num("total_area", 2409.546287, 817.763307);
    s.columns.push_back({"yrblt", ColumnRole::date_feature, 1988, 21, false});
    num("misc_area", 141.641915, 236.598402);
    num("ZIP21", 32394.25951, 289.84512);
    s.columns.push_back({"sale_date", ColumnRole::date_feature, 0, 0, false});
    num("sasd", 172068.0029, 75437.46026);
    num("nsasd", 171783.2722, 75619.59938);
    num("stxbl", 154036.8721, 78289.80939);
    num("nstxbl", 139935.5139, 79855.06776);
    num("cotxbl", 138761.7173, 80899.04927);
    num("citxbl", 109971.8981, 88619.63572);
    s.columns.push_back({"price", ColumnRole::target, 197912.7255, 94021.27873, false});

    s.ground_truth.coefficients = {
        {"aprland", 0.8}, {"aprbldg", 0.9}, {"sfla", 25.0},   {"total_area", 10.0},
        {"rmbed", 4000.0}, {"misc_area", 8.0}, {"sasd", 0.2},
    };
    s.ground_truth.noise_std = 15000.0;
    s.ground_truth.nonlinearity = GroundTruth::Nonlinearity::interaction;
    s.corruption = {0.01, 0.01, 0.005, 4.0};
    return s;
}

} // namespace tabreg
