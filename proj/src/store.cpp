#include "glyphforge/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "glyphforge/error.hpp"

namespace glyphforge {

namespace {

// Splits text into LF-terminated lines. A missing final LF is tolerated.
class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    std::optional<std::string_view> next() {
        if (pos_ >= text_.size()) return std::nullopt;
        const auto eol = text_.find('\n', pos_);
        std::string_view line;
        if (eol == std::string_view::npos) {
            line = text_.substr(pos_);
            pos_ = text_.size();
        } else {
            line = text_.substr(pos_, eol - pos_);
            pos_ = eol + 1;
        }
        ++line_no_;
        return line;
    }

    // Like next(), but end of input is an error.
    std::string_view expect(const char* what) {
        auto line = next();
        if (!line) throw ParseError(std::string("unexpected end of file, expected ") + what, line_no_ + 1);
        return *line;
    }

    std::size_t line_no() const noexcept { return line_no_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_no_ = 0;
};

// Fields separated by exactly one space, no leading or trailing blanks.
std::vector<std::string_view> split_fields(std::string_view line, std::size_t line_no) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto space = line.find(' ', start);
        const auto field = line.substr(start, space == std::string_view::npos ? std::string_view::npos : space - start);
        if (field.empty()) throw ParseError("empty field or stray space", line_no, start + 1);
        fields.push_back(field);
        if (space == std::string_view::npos) break;
        start = space + 1;
    }
    return fields;
}

template <typename Int>
Int parse_int(std::string_view field, std::size_t line_no, const char* what) {
    Int value{};
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec == std::errc::result_out_of_range) throw ParseError(std::string(what) + " out of range", line_no);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError(std::string("invalid ") + what + " '" + std::string(field) + "'", line_no);
    }
    return value;
}

GridDims parse_dims_fields(std::string_view w, std::string_view h, std::size_t line_no) {
    const auto width = parse_int<std::size_t>(w, line_no, "width");
    const auto height = parse_int<std::size_t>(h, line_no, "height");
    try {
        return GridDims::checked(width, height);
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what(), line_no);
    }
}

void expect_end(LineReader& lines) {
    if (auto extra = lines.next()) throw ParseError("unexpected content after the last block", lines.line_no());
}

// Netpbm header/plain-data tokenizer with '#' comments.
class PnmScanner {
public:
    explicit PnmScanner(std::string_view bytes) : bytes_(bytes) {}

    void skip_blanks() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
            } else if (is_space(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::uint64_t number(const char* what) {
        skip_blanks();
        if (pos_ >= bytes_.size()) throw ParseError(std::string("truncated data, expected ") + what);
        std::uint64_t value = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
            value = value * 10 + static_cast<std::uint64_t>(bytes_[pos_] - '0');
            if (value > 0xFFFFFFFFull) throw ParseError(std::string(what) + " overflows");
            ++pos_;
            ++digits;
        }
        if (digits == 0) throw ParseError(std::string("expected ") + what + " at byte " + std::to_string(pos_));
        return value;
    }

    // Plain PBM samples are single '0'/'1' characters, optionally unseparated.
    bool bit() {
        skip_blanks();
        if (pos_ >= bytes_.size()) throw ParseError("truncated bitmap data");
        const char c = bytes_[pos_++];
        if (c != '0' && c != '1') throw ParseError("invalid bitmap sample '" + std::string(1, c) + "'");
        return c == '1';
    }

    // Binary payloads start after exactly one whitespace byte.
    std::string_view payload() {
        if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) throw ParseError("missing whitespace before raster data");
        return bytes_.substr(pos_ + 1);
    }

private:
    static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

    std::string_view bytes_;
    std::size_t pos_ = 2;
};

std::uint8_t to_luminance(std::uint64_t sample, std::uint64_t maxval) {
    return static_cast<std::uint8_t>((sample * 255 + maxval / 2) / maxval);
}

}  // namespace

std::string format_kb(const KnowledgeBase& kb) {
    std::ostringstream out;
    out << "vcrkb 1\n";
    out << "grid " << kb.dims().width << ' ' << kb.dims().height << '\n';
    for (const auto& [label, matrix] : kb.entries()) {
        out << "label " << label.str() << ' ' << matrix.teach_count() << '\n';
        for (std::size_t r = 0; r < kb.dims().height; ++r) {
            for (std::size_t c = 0; c < kb.dims().width; ++c) {
                if (c) out << ' ';
                out << matrix.at(r, c);
            }
            out << '\n';
        }
    }
    return out.str();
}

KnowledgeBase parse_kb(std::string_view text) {
    LineReader lines(text);
    {
        const auto header = lines.expect("'vcrkb 1' header");
        const auto fields = split_fields(header, lines.line_no());
        if (fields.size() != 2 || fields[0] != "vcrkb") throw ParseError("missing 'vcrkb' header", lines.line_no());
        if (fields[1] != "1") throw ParseError("unsupported format version '" + std::string(fields[1]) + "'", 1);
    }
    const auto grid_line = lines.expect("'grid' line");
    const auto grid_fields = split_fields(grid_line, lines.line_no());
    if (grid_fields.size() != 3 || grid_fields[0] != "grid") {
        throw ParseError("expected 'grid <width> <height>'", lines.line_no());
    }
    const GridDims dims = parse_dims_fields(grid_fields[1], grid_fields[2], lines.line_no());

    KnowledgeBase kb(dims);
    std::optional<Label> previous;
    while (auto line = lines.next()) {
        const std::size_t label_line = lines.line_no();
        const auto fields = split_fields(*line, label_line);
        if (fields.size() != 3 || fields[0] != "label") {
            throw ParseError("expected 'label <name> <teach_count>'", label_line);
        }
        if (auto reason = Label::validate(fields[1]); !reason.empty()) throw ParseError(reason, label_line);
        Label label{std::string(fields[1])};
        if (previous && !(*previous < label)) {
            throw ParseError("label '" + label.str() + "' is duplicated or out of order", label_line);
        }
        const auto teach_count = parse_int<std::int64_t>(fields[2], label_line, "teach count");

        std::vector<std::int32_t> weights;
        weights.reserve(dims.cell_count());
        for (std::size_t r = 0; r < dims.height; ++r) {
            const auto row = lines.expect("weight row");
            const auto cells = split_fields(row, lines.line_no());
            if (cells.size() != dims.width) {
                throw ParseError("weight row has " + std::to_string(cells.size()) + " values, expected " +
                                     std::to_string(dims.width),
                                 lines.line_no());
            }
            for (auto cell : cells) {
                const auto w = parse_int<std::int64_t>(cell, lines.line_no(), "weight");
                if (w < INT32_MIN || w > INT32_MAX) {
                    throw InvariantViolation("weight " + std::string(cell) + " on line " +
                                             std::to_string(lines.line_no()) + " exceeds the teach count");
                }
                weights.push_back(static_cast<std::int32_t>(w));
            }
        }
        try {
            kb.insert(label, WeightMatrix::from_weights(dims, std::move(weights), teach_count));
        } catch (const InvariantViolation& e) {
            throw InvariantViolation("label '" + label.str() + "' (line " + std::to_string(label_line) + "): " + e.what());
        }
        previous = std::move(label);
    }
    return kb;
}

void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path) {
    write_file_atomic(path, format_kb(kb));
}

KnowledgeBase load_kb(const std::filesystem::path& path) {
    return parse_kb(read_file(path));
}

std::string format_glyph(const BinaryGrid& grid) {
    std::string out = "glyph " + std::to_string(grid.dims().width) + ' ' + std::to_string(grid.dims().height) + '\n';
    for (const auto& row : grid.to_rows()) {
        out += row;
        out += '\n';
    }
    return out;
}

BinaryGrid parse_glyph(std::string_view text) {
    LineReader lines(text);
    const auto header = lines.expect("'glyph' header");
    const auto fields = split_fields(header, 1);
    if (fields.size() != 3 || fields[0] != "glyph") throw ParseError("expected 'glyph <width> <height>'", 1);
    const GridDims dims = parse_dims_fields(fields[1], fields[2], 1);

    BinaryGrid grid(dims);
    for (std::size_t r = 0; r < dims.height; ++r) {
        const auto row = lines.expect("glyph row");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (row[c] != '#' && row[c] != '.') {
                throw ParseError("unexpected character (expected '#' or '.')", lines.line_no(), c + 1);
            }
            if (c < dims.width) grid.set(r, c, row[c] == '#');
        }
        if (row.size() != dims.width) {
            throw ParseError("row has " + std::to_string(row.size()) + " cells, expected " + std::to_string(dims.width),
                             lines.line_no(), std::min(row.size(), dims.width) + 1);
        }
    }
    expect_end(lines);
    return grid;
}

void save_glyph(const BinaryGrid& grid, const std::filesystem::path& path) {
    write_file_atomic(path, format_glyph(grid));
}

BinaryGrid load_glyph(const std::filesystem::path& path) {
    return parse_glyph(read_file(path));
}

Raster parse_raster(std::string_view bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P') throw ParseError("not a PBM/PGM file (bad magic)");
    const char kind = bytes[1];
    if (kind != '1' && kind != '2' && kind != '4' && kind != '5') {
        throw ParseError("unsupported Netpbm magic 'P" + std::string(1, kind) + "'");
    }
    PnmScanner scan(bytes);
    const auto width = scan.number("width");
    const auto height = scan.number("height");
    if (width < 1 || height < 1 || width > kMaxRasterSide || height > kMaxRasterSide) {
        throw ParseError("raster dimensions " + std::to_string(width) + "x" + std::to_string(height) +
                         " outside 1.." + std::to_string(kMaxRasterSide));
    }
    std::uint64_t maxval = 1;
    if (kind == '2' || kind == '5') {
        maxval = scan.number("maxval");
        if (maxval < 1 || maxval > 65535) throw ParseError("maxval must lie in 1..65535");
    }
    const std::uint64_t count = width * height;

    std::vector<std::uint8_t> pixels;
    switch (kind) {
        case '1':
            pixels.reserve(std::min<std::uint64_t>(count, bytes.size()));
            for (std::uint64_t i = 0; i < count; ++i) pixels.push_back(scan.bit() ? 0 : 255);
            break;
        case '2':
            pixels.reserve(std::min<std::uint64_t>(count, bytes.size()));
            for (std::uint64_t i = 0; i < count; ++i) {
                const auto v = scan.number("gray sample");
                if (v > maxval) throw ParseError("gray sample exceeds maxval");
                pixels.push_back(to_luminance(v, maxval));
            }
            break;
        case '4': {
            const auto data = scan.payload();
            const std::uint64_t stride = (width + 7) / 8;
            if (data.size() < stride * height) throw ParseError("truncated PBM raster data");
            pixels.resize(count);
            for (std::uint64_t r = 0; r < height; ++r) {
                for (std::uint64_t c = 0; c < width; ++c) {
                    const auto byte = static_cast<unsigned char>(data[r * stride + c / 8]);
                    const bool black = (byte >> (7 - c % 8)) & 1;
                    pixels[r * width + c] = black ? 0 : 255;
                }
            }
            break;
        }
        case '5': {
            const auto data = scan.payload();
            const std::uint64_t sample_bytes = maxval < 256 ? 1 : 2;
            if (data.size() < count * sample_bytes) throw ParseError("truncated PGM raster data");
            pixels.resize(count);
            for (std::uint64_t i = 0; i < count; ++i) {
                std::uint64_t v = static_cast<unsigned char>(data[i * sample_bytes]);
                if (sample_bytes == 2) v = (v << 8) | static_cast<unsigned char>(data[i * 2 + 1]);
                if (v > maxval) throw ParseError("gray sample exceeds maxval");
                pixels[i] = to_luminance(v, maxval);
            }
            break;
        }
    }
    return Raster(width, height, std::move(pixels));
}

Raster load_raster(const std::filesystem::path& path) {
    return parse_raster(read_file(path));
}

std::string format_pbm(const Raster& raster) {
    std::string out = "P1\n" + std::to_string(raster.width()) + ' ' + std::to_string(raster.height()) + '\n';
    for (std::size_t r = 0; r < raster.height(); ++r) {
        for (std::size_t c = 0; c < raster.width(); ++c) {
            if (c) out += ' ';
            out += raster.at(r, c) == 0 ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

BinaryGrid load_pattern(const std::filesystem::path& path, GridDims dims, const DigitizeOptions& options) {
    const std::string bytes = read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '1' && bytes[1] <= '6') {
        return digitize(parse_raster(bytes), dims, options);
    }
    BinaryGrid grid = parse_glyph(bytes);
    if (grid.dims() != dims) {
        throw DimsMismatch(path.string() + " is " + grid.dims().to_string() + ", expected " + dims.to_string());
    }
    return grid;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IoError("error reading " + path.string());
    return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    std::random_device rd;
    const auto tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(rd()));

    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
    if (fd < 0) throw IoError("cannot create " + tmp.string() + ": " + std::strerror(errno));
    const auto fail = [&](const std::string& what) {
        const int saved = errno;
        ::close(fd);
        ::unlink(tmp.c_str());
        throw IoError(what + " " + tmp.string() + ": " + std::strerror(saved));
    };
    std::size_t written = 0;
    while (written < content.size()) {
        const auto n = ::write(fd, content.data() + written, content.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail("cannot write");
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) fail("cannot sync");
    if (::close(fd) != 0) {
        const int saved = errno;
        ::unlink(tmp.c_str());
        throw IoError("cannot close " + tmp.string() + ": " + std::strerror(saved));
    }
    if (::rename(tmp.c_str(), path.c_str()) != 0) {
        const int saved = errno;
        ::unlink(tmp.c_str());
        throw IoError("cannot replace " + path.string() + ": " + std::strerror(saved));
    }
}

}  // namespace glyphforge
