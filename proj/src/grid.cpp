#include "glyphforge/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "glyphforge/error.hpp"

namespace glyphforge {

namespace {

// Index of the destination slot (out of `slots`) holding the center of source
// element `index` out of `count`. A center landing exactly on a boundary
// belongs to the lower slot.
std::size_t slot_of_center(std::size_t index, std::size_t count, std::size_t slots) {
    const std::uint64_t scaled = (2 * static_cast<std::uint64_t>(index) + 1) * slots;
    const std::uint64_t denom = 2 * static_cast<std::uint64_t>(count);
    std::uint64_t slot = scaled / denom;
    if (scaled % denom == 0 && slot > 0) --slot;
    return static_cast<std::size_t>(std::min<std::uint64_t>(slot, slots - 1));
}

std::size_t parse_side(std::string_view text) {
    std::size_t value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        throw InvalidArgument("invalid grid side '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace

GridDims GridDims::checked(std::size_t width, std::size_t height) {
    if (width < 1 || height < 1 || width > kMaxGridSide || height > kMaxGridSide) {
        throw InvalidArgument("grid dimensions must lie in 1.." + std::to_string(kMaxGridSide) + ", got " +
                              std::to_string(width) + "x" + std::to_string(height));
    }
    return GridDims{width, height};
}

GridDims GridDims::parse(std::string_view text) {
    const auto x = text.find_first_of("xX");
    if (x == std::string_view::npos) {
        throw InvalidArgument("grid must be given as WxH, got '" + std::string(text) + "'");
    }
    return checked(parse_side(text.substr(0, x)), parse_side(text.substr(x + 1)));
}

std::string GridDims::to_string() const {
    return std::to_string(width) + "x" + std::to_string(height);
}

BinaryGrid::BinaryGrid(GridDims dims) : dims_(GridDims::checked(dims.width, dims.height)), cells_(dims.cell_count(), 0) {}

BinaryGrid::BinaryGrid(GridDims dims, std::vector<std::uint8_t> cells)
    : dims_(GridDims::checked(dims.width, dims.height)), cells_(std::move(cells)) {
    if (cells_.size() != dims_.cell_count()) {
        throw InvalidArgument("binary grid expects " + std::to_string(dims_.cell_count()) + " cells, got " +
                              std::to_string(cells_.size()));
    }
    if (std::any_of(cells_.begin(), cells_.end(), [](std::uint8_t c) { return c > 1; })) {
        throw InvalidArgument("binary grid cells must be 0 or 1");
    }
}

BinaryGrid BinaryGrid::from_rows(std::span<const std::string> rows) {
    if (rows.empty()) throw InvalidArgument("pattern has no rows");
    const std::size_t width = rows.front().size();
    const GridDims dims = GridDims::checked(width, rows.size());
    std::vector<std::uint8_t> cells;
    cells.reserve(dims.cell_count());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != width) {
            throw InvalidArgument("row " + std::to_string(r + 1) + " has width " + std::to_string(rows[r].size()) +
                                  ", expected " + std::to_string(width));
        }
        for (char c : rows[r]) {
            if (c == '#') {
                cells.push_back(1);
            } else if (c == '.') {
                cells.push_back(0);
            } else {
                throw InvalidArgument("row " + std::to_string(r + 1) + " contains a character other than '#' or '.'");
            }
        }
    }
    return BinaryGrid(dims, std::move(cells));
}

std::vector<std::string> BinaryGrid::to_rows() const {
    std::vector<std::string> rows;
    rows.reserve(dims_.height);
    for (std::size_t r = 0; r < dims_.height; ++r) {
        std::string line(dims_.width, '.');
        for (std::size_t c = 0; c < dims_.width; ++c) {
            if (at(r, c)) line[c] = '#';
        }
        rows.push_back(std::move(line));
    }
    return rows;
}

BipolarGrid::BipolarGrid(GridDims dims, std::vector<std::int8_t> cells)
    : dims_(GridDims::checked(dims.width, dims.height)), cells_(std::move(cells)) {
    if (cells_.size() != dims_.cell_count()) {
        throw InvalidArgument("bipolar grid expects " + std::to_string(dims_.cell_count()) + " cells");
    }
    if (std::any_of(cells_.begin(), cells_.end(), [](std::int8_t c) { return c != 1 && c != -1; })) {
        throw InvalidArgument("bipolar grid cells must be -1 or +1");
    }
}

Raster::Raster(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width_ < 1 || height_ < 1) throw InvalidArgument("raster must be at least 1x1");
    if (pixels_.size() != width_ * height_) {
        throw InvalidArgument("raster expects " + std::to_string(width_ * height_) + " pixels, got " +
                              std::to_string(pixels_.size()));
    }
}

BinaryGrid digitize(const Raster& raster, GridDims dims, const DigitizeOptions& options) {
    dims = GridDims::checked(dims.width, dims.height);
    if (options.ink_threshold < 0 || options.ink_threshold > 255) {
        throw InvalidArgument("ink threshold must lie in 0..255");
    }
    if (!(options.coverage > 0.0 && options.coverage <= 1.0)) {
        throw InvalidArgument("coverage must lie in (0, 1]");
    }

    const auto is_ink = [&](std::size_t row, std::size_t col) {
        return raster.at(row, col) <= options.ink_threshold;
    };

    std::size_t top = raster.height(), bottom = 0, left = raster.width(), right = 0;
    bool any = false;
    for (std::size_t r = 0; r < raster.height(); ++r) {
        for (std::size_t c = 0; c < raster.width(); ++c) {
            if (!is_ink(r, c)) continue;
            any = true;
            top = std::min(top, r);
            bottom = std::max(bottom, r);
            left = std::min(left, c);
            right = std::max(right, c);
        }
    }
    if (!any) throw EmptyRaster();

    const std::size_t box_w = right - left + 1;
    const std::size_t box_h = bottom - top + 1;

    std::vector<std::size_t> col_cell(box_w), row_cell(box_h);
    for (std::size_t c = 0; c < box_w; ++c) col_cell[c] = slot_of_center(c, box_w, dims.width);
    for (std::size_t r = 0; r < box_h; ++r) row_cell[r] = slot_of_center(r, box_h, dims.height);

    std::vector<std::uint64_t> ink(dims.cell_count(), 0), total(dims.cell_count(), 0);
    for (std::size_t r = 0; r < box_h; ++r) {
        const std::size_t base = row_cell[r] * dims.width;
        for (std::size_t c = 0; c < box_w; ++c) {
            const std::size_t cell = base + col_cell[c];
            ++total[cell];
            if (is_ink(top + r, left + c)) ++ink[cell];
        }
    }

    BinaryGrid grid(dims);
    for (std::size_t r = 0; r < dims.height; ++r) {
        for (std::size_t c = 0; c < dims.width; ++c) {
            const std::size_t cell = r * dims.width + c;
            bool black;
            if (total[cell] == 0) {
                black = is_ink(top + slot_of_center(r, dims.height, box_h), left + slot_of_center(c, dims.width, box_w));
            } else {
                black = static_cast<double>(ink[cell]) >= options.coverage * static_cast<double>(total[cell]);
            }
            grid.set(r, c, black);
        }
    }
    return grid;
}

BipolarGrid to_bipolar(const BinaryGrid& grid) {
    std::vector<std::int8_t> cells;
    cells.reserve(grid.cells().size());
    for (auto c : grid.cells()) cells.push_back(c ? 1 : -1);
    return BipolarGrid(grid.dims(), std::move(cells));
}

BinaryGrid to_binary(const BipolarGrid& grid) {
    std::vector<std::uint8_t> cells;
    cells.reserve(grid.cells().size());
    for (auto c : grid.cells()) cells.push_back(c > 0 ? 1 : 0);
    return BinaryGrid(grid.dims(), std::move(cells));
}

std::size_t black_count(const BinaryGrid& grid) {
    return static_cast<std::size_t>(std::count(grid.cells().begin(), grid.cells().end(), std::uint8_t{1}));
}

Raster render(const BinaryGrid& grid, std::size_t scale) {
    if (scale < 1) throw InvalidArgument("render scale must be >= 1");
    const std::size_t w = grid.dims().width * scale;
    const std::size_t h = grid.dims().height * scale;
    std::vector<std::uint8_t> pixels(w * h, 255);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            if (grid.at(r / scale, c / scale)) pixels[r * w + c] = 0;
        }
    }
    return Raster(w, h, std::move(pixels));
}

}  // namespace glyphforge
