#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glyphforge/grid.hpp"

namespace glyphforge {

inline constexpr std::int64_t kMaxTeachCount = std::numeric_limits<std::int32_t>::max();

// A character label: 1-64 UTF-8 code points, no whitespace or control characters.
// Ordering is bytewise, which for UTF-8 equals code point order.
class Label {
public:
    explicit Label(std::string name);

    // Empty string if `name` is a valid label, otherwise the reason it is not.
    static std::string validate(std::string_view name);

    const std::string& str() const noexcept { return name_; }

    friend auto operator<=>(const Label&, const Label&) = default;

private:
    std::string name_;
};

// Per-label weight matrix. Invariants for teach count n and every weight w:
// |w| <= n and w = n (mod 2); n == 0 forces all weights to zero.
class WeightMatrix {
public:
    explicit WeightMatrix(GridDims dims);

    // Validating constructor for stored matrices; throws InvariantViolation.
    static WeightMatrix from_weights(GridDims dims, std::vector<std::int32_t> weights, std::int64_t teach_count);

    // Adds the bipolar form of `pattern` to every weight and bumps the teach count.
    void learn(const BinaryGrid& pattern);

    const GridDims& dims() const noexcept { return dims_; }
    std::span<const std::int32_t> weights() const noexcept { return weights_; }
    std::int32_t at(std::size_t row, std::size_t col) const { return weights_[row * dims_.width + col]; }
    std::int64_t teach_count() const noexcept { return teach_count_; }

    // Largest |w| over all cells.
    std::int32_t max_magnitude() const noexcept;

    friend bool operator==(const WeightMatrix&, const WeightMatrix&) = default;

private:
    WeightMatrix(GridDims dims, std::vector<std::int32_t> weights, std::int64_t teach_count);

    GridDims dims_;
    std::vector<std::int32_t> weights_;
    std::int64_t teach_count_ = 0;
};

// Labeled weight matrices sharing one grid size, kept in label order.
//
// Not internally synchronized: teach/forget need exclusive access, const
// members may run concurrently between mutations.
class KnowledgeBase {
public:
    using Entries = std::map<Label, WeightMatrix>;

    explicit KnowledgeBase(GridDims dims);

    const GridDims& dims() const noexcept { return dims_; }
    const Entries& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    bool contains(const Label& label) const { return entries_.contains(label); }

    std::vector<Label> labels() const;

    // Creates a zero matrix for an unseen label, then learns `pattern` into it.
    // Returns the label's new teach count. Throws DimsMismatch or TeachLimit;
    // the knowledge base is unchanged when it throws.
    std::int64_t teach(const Label& label, const BinaryGrid& pattern);

    // Throws UnknownLabel.
    void forget(const Label& label);
    const WeightMatrix& weights(const Label& label) const;

    // Inserts a stored matrix verbatim (used by loaders). Throws on dims
    // mismatch or a duplicate label.
    void insert(Label label, WeightMatrix matrix);

    friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;

private:
    GridDims dims_;
    Entries entries_;
};

}  // namespace glyphforge
