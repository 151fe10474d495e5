#ifndef TABREG_SERDE_HPP
#define TABREG_SERDE_HPP

#include <nlohmann/json.hpp>

#include "tabreg/eval.hpp"
#include "tabreg/features.hpp"
#include "tabreg/models.hpp"

// JSON forms of the fitted artifacts. Doubles are emitted in shortest
// round-trip form, so save -> load -> predict is bit-identical to the
// in-memory model.

namespace tabreg::serde {

nlohmann::json to_json(const models::RegressorSpec& spec);
models::RegressorSpec spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const models::TrainedModel& model);
models::TrainedModel model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const features::EncodingMap& map);
features::EncodingMap encoding_map_from_json(const nlohmann::json& j);

nlohmann::json to_json(const features::BinModel& model);
features::BinModel bin_model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const eval::MetricSet& m);

/// Deterministic report JSON; wall-clock timings live in per-row "timings"
/// objects so reruns are byte-identical outside them.
nlohmann::json to_json(const eval::ComparisonReport& report);

/// Aligned text rendering of the comparison grid; the baseline row prints
/// "-" in its after-binning cells.
std::string comparison_text_table(const eval::ComparisonReport& report);

} // namespace tabreg::serde

#endif
