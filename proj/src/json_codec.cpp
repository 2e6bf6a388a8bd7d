#include "glyphforge/json_codec.hpp"

#include <array>
#include <charconv>

#include "glyphforge/error.hpp"

namespace glyphforge {

using nlohmann::json;

json score_to_json(const LabelScore& score) {
    return json{{"label", score.label.str()},  {"psi", score.psi},         {"mu", score.mu},
                {"q_num", score.q.num()},      {"q_den", score.q.den()}, {"q_display", score.q.display()}};
}

json decision_to_json(const Decision& decision) {
    json scores = json::array();
    for (const auto& s : decision.scores) scores.push_back(score_to_json(s));
    json unscorable = json::array();
    for (const auto& l : decision.unscorable) unscorable.push_back(l.str());
    return json{
        {"kind", std::string(to_string(decision.kind))},
        {"best", decision.best ? score_to_json(*decision.best) : json(nullptr)},
        {"scores", std::move(scores)},
        {"unscorable", std::move(unscorable)},
        {"threshold",
         {{"num", decision.threshold.num()},
          {"den", decision.threshold.den()},
          {"display", decision.threshold.display()}}},
    };
}

json weights_to_json(const Label& label, const WeightMatrix& weights) {
    json rows = json::array();
    for (std::size_t r = 0; r < weights.dims().height; ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < weights.dims().width; ++c) row.push_back(weights.at(r, c));
        rows.push_back(std::move(row));
    }
    return json{{"label", label.str()}, {"teach_count", weights.teach_count()}, {"rows", std::move(rows)}};
}

Quotient threshold_from_json(const json& value) {
    if (value.is_string()) return Quotient::parse(value.get<std::string>());
    if (value.is_number_integer()) return Quotient(value.get<std::int64_t>(), 1);
    if (value.is_number_float()) {
        std::array<char, 64> buf{};
        auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value.get<double>(),
                                       std::chars_format::fixed);
        if (ec != std::errc{}) throw InvalidArgument("threshold out of range");
        return Quotient::parse(std::string_view(buf.data(), static_cast<std::size_t>(end - buf.data())));
    }
    throw InvalidArgument("threshold must be a number or a string");
}

}  // namespace glyphforge
