#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "glyphforge/grid.hpp"
#include "glyphforge/knowledge.hpp"

namespace glyphforge {

inline constexpr std::size_t kMaxRasterSide = 65535;

// Knowledge base text format (UTF-8, LF):
//
//   vcrkb 1
//   grid <width> <height>
//   label <name> <teach_count>      (one block per label, ascending label order)
//   <height> lines of <width> space-separated integers
//
// Parsing throws ParseError for grammar violations and InvariantViolation for
// weights that break the range or parity law.
std::string format_kb(const KnowledgeBase& kb);
KnowledgeBase parse_kb(std::string_view text);

void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path);
KnowledgeBase load_kb(const std::filesystem::path& path);

// Glyph text format: "glyph <width> <height>" then <height> rows of '#'/'.'.
std::string format_glyph(const BinaryGrid& grid);
BinaryGrid parse_glyph(std::string_view text);

void save_glyph(const BinaryGrid& grid, const std::filesystem::path& path);
BinaryGrid load_glyph(const std::filesystem::path& path);

// Netpbm P1/P4 (bitmap, 1 = black) and P2/P5 (graymap, scaled to 0..255).
Raster parse_raster(std::string_view bytes);
Raster load_raster(const std::filesystem::path& path);

// Plain PBM (P1) encoding of a bilevel raster: luminance 0 becomes 1.
std::string format_pbm(const Raster& raster);

// Loads either a glyph file or a PBM/PGM raster digitized to `dims`,
// chosen by the file's leading bytes. A glyph must already be `dims`.
BinaryGrid load_pattern(const std::filesystem::path& path, GridDims dims, const DigitizeOptions& options = {});

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file, flushes it to disk, then renames over
// `path`, so readers see either the old or the new content.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace glyphforge
