#pragma once

#include <json.hpp>

#include "glyphforge/knowledge.hpp"
#include "glyphforge/recognition.hpp"

namespace glyphforge {

// Wire shapes shared by `classify --output json` and the HTTP API.

// {label, psi, mu, q_num, q_den, q_display}
nlohmann::json score_to_json(const LabelScore& score);

// {kind, best, scores, unscorable, threshold}
nlohmann::json decision_to_json(const Decision& decision);

// {label, teach_count, rows}
nlohmann::json weights_to_json(const Label& label, const WeightMatrix& weights);

// Accepts a JSON number (read back through its shortest decimal form, so 0.5
// stays exactly 1/2) or a string such as "0.68" or "17/25".
Quotient threshold_from_json(const nlohmann::json& value);

}  // namespace glyphforge
