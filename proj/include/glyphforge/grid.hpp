#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace glyphforge {

inline constexpr std::size_t kMaxGridSide = 1024;

// Grid extent in cells. width counts columns, height counts rows.
struct GridDims {
    std::size_t width = 0;
    std::size_t height = 0;

    // Throws InvalidArgument unless 1 <= side <= kMaxGridSide.
    static GridDims checked(std::size_t width, std::size_t height);

    // Parses "WxH" (e.g. "32x32").
    static GridDims parse(std::string_view text);

    std::size_t cell_count() const noexcept { return width * height; }
    std::string to_string() const;

    friend bool operator==(const GridDims&, const GridDims&) = default;
};

inline constexpr GridDims kDefaultDims{32, 32};

// Binary image matrix: 1 = black (ink), 0 = white. Row-major.
class BinaryGrid {
public:
    explicit BinaryGrid(GridDims dims);
    BinaryGrid(GridDims dims, std::vector<std::uint8_t> cells);

    // Rows of '#' (1) and '.' (0); every row must have the same width.
    static BinaryGrid from_rows(std::span<const std::string> rows);

    const GridDims& dims() const noexcept { return dims_; }
    std::span<const std::uint8_t> cells() const noexcept { return cells_; }

    std::uint8_t at(std::size_t row, std::size_t col) const { return cells_[row * dims_.width + col]; }
    void set(std::size_t row, std::size_t col, bool ink) { cells_[row * dims_.width + col] = ink ? 1 : 0; }

    std::vector<std::string> to_rows() const;

    friend bool operator==(const BinaryGrid&, const BinaryGrid&) = default;

private:
    GridDims dims_;
    std::vector<std::uint8_t> cells_;
};

// Bipolar training matrix: every cell is -1 or +1. Row-major.
class BipolarGrid {
public:
    BipolarGrid(GridDims dims, std::vector<std::int8_t> cells);

    const GridDims& dims() const noexcept { return dims_; }
    std::span<const std::int8_t> cells() const noexcept { return cells_; }
    std::int8_t at(std::size_t row, std::size_t col) const { return cells_[row * dims_.width + col]; }

    friend bool operator==(const BipolarGrid&, const BipolarGrid&) = default;

private:
    GridDims dims_;
    std::vector<std::int8_t> cells_;
};

// 8-bit luminance image, 0 = black ink, 255 = white background. Row-major.
class Raster {
public:
    Raster(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    std::uint8_t at(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<std::uint8_t> pixels_;
};

struct DigitizeOptions {
    // A pixel is ink iff its luminance <= ink_threshold.
    int ink_threshold = 127;
    // A cell is black iff its ink fraction >= coverage. Must lie in (0, 1].
    double coverage = 0.5;
};

// Samples a raster into a fixed grid: binarize, crop to the ink bounding box,
// map each source pixel center proportionally onto a cell (exact boundaries go
// to the lower cell), then vote per cell by ink coverage. A cell that receives
// no pixel center (upsampling) copies the pixel under its own center.
// Throws EmptyRaster when no pixel is ink.
BinaryGrid digitize(const Raster& raster, GridDims dims, const DigitizeOptions& options = {});

BipolarGrid to_bipolar(const BinaryGrid& grid);
BinaryGrid to_binary(const BipolarGrid& grid);
std::size_t black_count(const BinaryGrid& grid);

// Renders a grid as a bilevel raster with each cell blown up to scale x scale pixels.
Raster render(const BinaryGrid& grid, std::size_t scale);

}  // namespace glyphforge
