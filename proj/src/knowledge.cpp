#include "glyphforge/knowledge.hpp"

#include <algorithm>
#include <cstdlib>

#include "glyphforge/error.hpp"

namespace glyphforge {

namespace {

constexpr std::size_t kMaxLabelCodePoints = 64;

// Decodes one UTF-8 sequence starting at text[pos]; returns 0 on malformed input.
std::size_t decode_utf8(std::string_view text, std::size_t pos, char32_t& out) {
    const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
    const unsigned char lead = byte(pos);
    std::size_t len;
    char32_t cp;
    if (lead < 0x80) {
        out = lead;
        return 1;
    } else if ((lead & 0xE0) == 0xC0) {
        len = 2;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        len = 3;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        len = 4;
        cp = lead & 0x07;
    } else {
        return 0;
    }
    if (pos + len > text.size()) return 0;
    for (std::size_t i = 1; i < len; ++i) {
        if ((byte(pos + i) & 0xC0) != 0x80) return 0;
        cp = (cp << 6) | (byte(pos + i) & 0x3F);
    }
    static constexpr char32_t kMinForLength[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLength[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
    out = cp;
    return len;
}

bool is_space_or_control(char32_t cp) {
    if (cp < 0x20 || cp == 0x7F || (cp >= 0x80 && cp <= 0x9F)) return true;
    switch (cp) {
        case 0x20: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000: case 0xFEFF:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

}  // namespace

std::string Label::validate(std::string_view name) {
    if (name.empty()) return "label is empty";
    std::size_t count = 0;
    for (std::size_t pos = 0; pos < name.size();) {
        char32_t cp = 0;
        const std::size_t len = decode_utf8(name, pos, cp);
        if (len == 0) return "label is not valid UTF-8";
        if (is_space_or_control(cp)) return "label contains whitespace or a control character";
        pos += len;
        if (++count > kMaxLabelCodePoints) return "label is longer than 64 characters";
    }
    return {};
}

Label::Label(std::string name) : name_(std::move(name)) {
    if (auto reason = validate(name_); !reason.empty()) throw InvalidLabel(reason);
}

WeightMatrix::WeightMatrix(GridDims dims)
    : dims_(GridDims::checked(dims.width, dims.height)), weights_(dims.cell_count(), 0) {}

WeightMatrix::WeightMatrix(GridDims dims, std::vector<std::int32_t> weights, std::int64_t teach_count)
    : dims_(dims), weights_(std::move(weights)), teach_count_(teach_count) {}

WeightMatrix WeightMatrix::from_weights(GridDims dims, std::vector<std::int32_t> weights, std::int64_t teach_count) {
    dims = GridDims::checked(dims.width, dims.height);
    if (weights.size() != dims.cell_count()) {
        throw InvariantViolation("weight matrix expects " + std::to_string(dims.cell_count()) + " weights, got " +
                                 std::to_string(weights.size()));
    }
    if (teach_count < 0 || teach_count > kMaxTeachCount) {
        throw InvariantViolation("teach count " + std::to_string(teach_count) + " out of range");
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const std::int64_t w = weights[i];
        if (std::llabs(w) > teach_count) {
            throw InvariantViolation("weight " + std::to_string(w) + " at row " + std::to_string(i / dims.width + 1) +
                                     " exceeds teach count " + std::to_string(teach_count));
        }
        if ((w - teach_count) % 2 != 0) {
            throw InvariantViolation("weight " + std::to_string(w) + " at row " + std::to_string(i / dims.width + 1) +
                                     " has the wrong parity for teach count " + std::to_string(teach_count));
        }
    }
    return WeightMatrix(dims, std::move(weights), teach_count);
}

void WeightMatrix::learn(const BinaryGrid& pattern) {
    if (pattern.dims() != dims_) {
        throw DimsMismatch("pattern is " + pattern.dims().to_string() + ", weights are " + dims_.to_string());
    }
    if (teach_count_ >= kMaxTeachCount) throw TeachLimit("teach count limit reached");
    const auto cells = pattern.cells();
    for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] += cells[i] ? 1 : -1;
    ++teach_count_;
}

std::int32_t WeightMatrix::max_magnitude() const noexcept {
    std::int32_t best = 0;
    for (auto w : weights_) best = std::max(best, w < 0 ? -w : w);
    return best;
}

KnowledgeBase::KnowledgeBase(GridDims dims) : dims_(GridDims::checked(dims.width, dims.height)) {}

std::vector<Label> KnowledgeBase::labels() const {
    std::vector<Label> out;
    out.reserve(entries_.size());
    for (const auto& [label, _] : entries_) out.push_back(label);
    return out;
}

std::int64_t KnowledgeBase::teach(const Label& label, const BinaryGrid& pattern) {
    if (pattern.dims() != dims_) {
        throw DimsMismatch("pattern is " + pattern.dims().to_string() + ", knowledge base is " + dims_.to_string());
    }
    auto it = entries_.find(label);
    if (it == entries_.end()) {
        WeightMatrix fresh(dims_);
        fresh.learn(pattern);
        entries_.emplace(label, std::move(fresh));
        return 1;
    }
    it->second.learn(pattern);
    return it->second.teach_count();
}

void KnowledgeBase::forget(const Label& label) {
    if (entries_.erase(label) == 0) throw UnknownLabel(label.str());
}

const WeightMatrix& KnowledgeBase::weights(const Label& label) const {
    auto it = entries_.find(label);
    if (it == entries_.end()) throw UnknownLabel(label.str());
    return it->second;
}

void KnowledgeBase::insert(Label label, WeightMatrix matrix) {
    if (matrix.dims() != dims_) {
        throw DimsMismatch("matrix for '" + label.str() + "' is " + matrix.dims().to_string() +
                           ", knowledge base is " + dims_.to_string());
    }
    if (entries_.contains(label)) throw InvalidArgument("duplicate label '" + label.str() + "'");
    entries_.emplace(std::move(label), std::move(matrix));
}

}  // namespace glyphforge
