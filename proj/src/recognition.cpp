#include "glyphforge/recognition.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "glyphforge/error.hpp"

namespace glyphforge {

namespace {

void require_same_dims(const WeightMatrix& weights, const BinaryGrid& input) {
    if (weights.dims() != input.dims()) {
        throw DimsMismatch("input is " + input.dims().to_string() + ", weights are " + weights.dims().to_string());
    }
}

std::int64_t parse_digits(std::string_view digits, std::string_view whole) {
    std::int64_t value = 0;
    const auto* end = digits.data() + digits.size();
    auto [ptr, ec] = std::from_chars(digits.data(), end, value);
    if (digits.empty() || ec != std::errc{} || ptr != end || value < 0) {
        throw InvalidArgument("invalid number '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace

Quotient::Quotient(std::int64_t numerator, std::int64_t denominator) {
    if (denominator == 0) throw UndefinedQuotient();
    if (denominator < 0) {
        numerator = -numerator;
        denominator = -denominator;
    }
    const std::int64_t g = std::gcd(numerator, denominator);
    num_ = numerator / g;
    den_ = denominator / g;
}

Quotient Quotient::parse(std::string_view text) {
    const std::string_view whole = text;
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        bool negative = !text.empty() && text.front() == '-';
        std::int64_t n = parse_digits(text.substr(negative ? 1 : 0, slash - (negative ? 1 : 0)), whole);
        std::int64_t d = parse_digits(text.substr(slash + 1), whole);
        if (d == 0) throw InvalidArgument("zero denominator in '" + std::string(whole) + "'");
        return Quotient(negative ? -n : n, d);
    }
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    const auto dot = text.find('.');
    std::string_view int_part = text.substr(0, dot);
    std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (int_part.empty() && frac_part.empty()) throw InvalidArgument("invalid number '" + std::string(whole) + "'");
    if (frac_part.size() > 15) throw InvalidArgument("too many decimal places in '" + std::string(whole) + "'");
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac_part.size(); ++i) scale *= 10;
    const std::int64_t ip = int_part.empty() ? 0 : parse_digits(int_part, whole);
    const std::int64_t fp = frac_part.empty() ? 0 : parse_digits(frac_part, whole);
    if (ip > 1'000'000) throw InvalidArgument("number out of range '" + std::string(whole) + "'");
    const std::int64_t n = ip * scale + fp;
    return Quotient(negative ? -n : n, scale);
}

std::string Quotient::display(int digits) const {
    __int128 scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    const bool negative = num_ < 0;
    const __int128 magnitude = negative ? -static_cast<__int128>(num_) : static_cast<__int128>(num_);
    // round half away from zero on the magnitude
    const __int128 scaled = (2 * magnitude * scale + den_) / (2 * static_cast<__int128>(den_));
    const auto whole = static_cast<std::int64_t>(scaled / scale);
    auto frac = static_cast<std::int64_t>(scaled % scale);
    std::string out = (negative && scaled != 0) ? "-" : "";
    out += std::to_string(whole);
    if (digits > 0) {
        std::string f = std::to_string(frac);
        out += '.';
        out.append(static_cast<std::size_t>(digits) - f.size(), '0');
        out += f;
    }
    return out;
}

std::strong_ordering operator<=>(const Quotient& a, const Quotient& b) {
    const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
    const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
    return lhs <=> rhs;
}

std::int64_t candidate_score(const WeightMatrix& weights, const BinaryGrid& input) {
    require_same_dims(weights, input);
    const auto w = weights.weights();
    const auto cells = input.cells();
    std::int64_t psi = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (cells[i]) psi += w[i];
    }
    return psi;
}

std::int64_t ideal_score(const WeightMatrix& weights) {
    std::int64_t mu = 0;
    for (auto w : weights.weights()) {
        if (w > 0) mu += w;
    }
    return mu;
}

Quotient recognition_quotient(const WeightMatrix& weights, const BinaryGrid& input) {
    const std::int64_t psi = candidate_score(weights, input);
    const std::int64_t mu = ideal_score(weights);
    if (mu == 0) throw UndefinedQuotient();
    return Quotient(psi, mu);
}

std::string_view to_string(DecisionKind kind) {
    switch (kind) {
        case DecisionKind::Match: return "Match";
        case DecisionKind::Unknown: return "Unknown";
        case DecisionKind::EmptyKb: return "EmptyKb";
    }
    return "?";
}

Decision classify(const KnowledgeBase& kb, const BinaryGrid& input, const Quotient& threshold) {
    if (input.dims() != kb.dims()) {
        throw DimsMismatch("input is " + input.dims().to_string() + ", knowledge base is " + kb.dims().to_string());
    }
    Decision decision;
    decision.threshold = threshold;
    for (const auto& [label, weights] : kb.entries()) {
        const std::int64_t mu = ideal_score(weights);
        if (mu == 0) {
            decision.unscorable.push_back(label);
            continue;
        }
        const std::int64_t psi = candidate_score(weights, input);
        decision.scores.push_back(LabelScore{label, psi, mu, Quotient(psi, mu)});
    }
    std::stable_sort(decision.scores.begin(), decision.scores.end(), [](const LabelScore& a, const LabelScore& b) {
        if (a.q != b.q) return a.q > b.q;
        return a.label < b.label;
    });
    if (decision.scores.empty()) {
        decision.kind = DecisionKind::EmptyKb;
        return decision;
    }
    decision.best = decision.scores.front();
    decision.kind = decision.best->q >= threshold ? DecisionKind::Match : DecisionKind::Unknown;
    return decision;
}

}  // namespace glyphforge
