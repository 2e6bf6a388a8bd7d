#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glyphforge/grid.hpp"
#include "glyphforge/knowledge.hpp"

namespace glyphforge {

// Exact rational number in lowest terms with a positive denominator.
class Quotient {
public:
    Quotient(std::int64_t numerator, std::int64_t denominator);

    // Accepts "N/D", or a decimal such as "0.5", ".68", "1", "-0.25".
    static Quotient parse(std::string_view text);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    // Fixed-point decimal, rounded half away from zero ("0.68", "1.00").
    std::string display(int digits = 2) const;

    friend bool operator==(const Quotient&, const Quotient&) = default;
    friend std::strong_ordering operator<=>(const Quotient& a, const Quotient& b);

private:
    std::int64_t num_;
    std::int64_t den_;
};

inline const Quotient kDefaultThreshold{1, 2};

// Sum of weights over the input's black cells. Throws DimsMismatch.
std::int64_t candidate_score(const WeightMatrix& weights, const BinaryGrid& input);

// Sum of the strictly positive weights.
std::int64_t ideal_score(const WeightMatrix& weights);

// candidate_score / ideal_score. Throws DimsMismatch or UndefinedQuotient.
Quotient recognition_quotient(const WeightMatrix& weights, const BinaryGrid& input);

struct LabelScore {
    Label label;
    std::int64_t psi = 0;
    std::int64_t mu = 0;
    Quotient q{0, 1};

    friend bool operator==(const LabelScore&, const LabelScore&) = default;
};

enum class DecisionKind { Match, Unknown, EmptyKb };

std::string_view to_string(DecisionKind kind);

struct Decision {
    DecisionKind kind = DecisionKind::EmptyKb;
    std::optional<LabelScore> best;
    // Descending q, ties by ascending label.
    std::vector<LabelScore> scores;
    // Labels whose ideal score is zero; they cannot be ranked.
    std::vector<Label> unscorable;
    Quotient threshold = kDefaultThreshold;

    friend bool operator==(const Decision&, const Decision&) = default;
};

// Scores every label, picks the maximum quotient and compares it against
// `threshold` (inclusive). Throws DimsMismatch.
Decision classify(const KnowledgeBase& kb, const BinaryGrid& input, const Quotient& threshold = kDefaultThreshold);

}  // namespace glyphforge
