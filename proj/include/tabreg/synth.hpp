#ifndef TABREG_SYNTH_HPP
#define TABREG_SYNTH_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tabreg/table.hpp"

namespace tabreg {

/// One column of the synthetic generator.
///
/// Numeric roles draw Normal(mean, std). Categorical columns draw
/// Normal(mean, std) rounded to an integer category code stored as text.
/// Date columns come in two modes: with std > 0 the column is a bare
/// calendar year (rounded normal, stored as text); with no stats it is an
/// ISO-8601 date uniform over 2015-01-01..2019-11-13, and the drawn months
/// are logged. A target column's mean/std are informational only: the target
/// is produced by the ground-truth function, not drawn.
struct SynthColumn {
    std::string name;
    ColumnRole role = ColumnRole::numeric_feature;
    double mean = 0.0;
    double std = 0.0;
    bool round_to_int = false; // e.g. bedroom counts
};

/// target = sum(coefficients[j] * column_j) (+ interaction) + Normal(0, noise_std).
/// The interaction mode adds s * z_a * z_b, where a, b are the first two
/// coefficient-bearing columns in spec order, z is the standardized column,
/// and s is the geometric mean of the two joined terms' scales
/// |c_a|*std_a and |c_b|*std_b — a nonlinear term comparable to the linear
/// terms it couples.
struct GroundTruth {
    std::map<std::string, double> coefficients; // feature name -> coefficient
    double noise_std = 0.0;
    enum class Nonlinearity { none, interaction } nonlinearity = Nonlinearity::none;
};

/// Post-generation corruption. Counts are round(rate * n_rows):
/// duplicates are exact row copies appended at the end; nulls blank one
/// feature cell in distinct rows; outliers scale the target of distinct rows
/// by outlier_scale. Every injection is logged with exact indices.
struct Corruption {
    double duplicate_rate = 0.0; // in [0, 1)
    double null_rate = 0.0;      // in [0, 1)
    double outlier_rate = 0.0;   // in [0, 1)
    double outlier_scale = 5.0;  // > 1
};

struct SynthSpec {
    std::vector<SynthColumn> columns;
    GroundTruth ground_truth;
    Corruption corruption;
    std::uint64_t seed = 0;

    /// Throws ConfigError on negative std, rates outside [0,1), scale <= 1,
    /// coefficients naming unknown or non-numeric columns, or no target.
    void validate() const;

    /// The bundled county property-sales schema with its published per-column
    /// statistics; runs the whole pipeline offline.
    static SynthSpec bundled_default();
    static SynthSpec from_json_file(const std::string& path);
    void save_json(const std::string& path) const;
};

struct GenerationLog {
    std::vector<std::pair<std::int64_t, std::int64_t>> duplicates; // (new row, source row)
    std::vector<std::pair<std::int64_t, std::string>> nulls;       // (row, column)
    std::vector<std::int64_t> outliers;                            // row indices, sorted
    std::array<std::int64_t, 12> month_counts{};                   // ISO date draws by month
    void save_json(const std::string& path) const;
};

struct SynthResult {
    Table table;
    std::vector<double> truth; // noiseless target, one per row (duplicates included)
    GenerationLog log;
};

/// Deterministic for a fixed seed. Each numeric column's sample mean lands
/// within 5*std/sqrt(n) of its spec mean (law of large numbers); the target
/// equals truth + noise before corruption.
SynthResult synthesize_dataset(const SynthSpec& spec, std::size_t n_rows);

} // namespace tabreg

#endif
