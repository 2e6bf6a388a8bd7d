#include <doctest.h>

#include <fstream>

#include "glyphforge/error.hpp"
#include "glyphforge/store.hpp"
#include "test_support.hpp"

using namespace glyphforge;
using namespace glyphforge::testing;

namespace {

KnowledgeBase random_kb(std::mt19937_64& rng) {
    const GridDims dims = random_dims(rng, 9);
    KnowledgeBase kb(dims);
    std::uniform_int_distribution<int> labels(0, 5), teachings(1, 6);
    for (int l = labels(rng); l > 0; --l) {
        const Label label("L" + std::to_string(rng() % 1000));
        for (int t = teachings(rng); t > 0; --t) kb.teach(label, random_grid(rng, dims));
    }
    return kb;
}

std::string worked_s_text() {
    return read_file(fixture("worked_s.vcrkb"));
}

}  // namespace

TEST_CASE("empty kb serializes to the two header lines") {
    CHECK(format_kb(KnowledgeBase(GridDims{6, 8})) == "vcrkb 1\ngrid 6 8\n");
}

TEST_CASE("kb entries serialize in label order") {
    KnowledgeBase kb(GridDims{2, 1});
    kb.teach(Label("B"), grid_of({"#."}));
    kb.teach(Label("A"), grid_of({".#"}));
    CHECK(format_kb(kb) == "vcrkb 1\ngrid 2 1\nlabel A 1\n-1 1\nlabel B 1\n1 -1\n");
}

TEST_CASE("worked S fixture loads") {
    const KnowledgeBase kb = parse_kb(worked_s_text());
    CHECK(kb.dims() == GridDims{6, 8});
    const auto& w = kb.weights(Label("S"));
    CHECK(w.teach_count() == 3);
    for (std::size_t c = 0; c < 6; ++c) CHECK(w.at(0, c) == kWorkedS[0][c]);
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 6; ++c) CHECK(w.at(r, c) == kWorkedS[r][c]);
    CHECK(format_kb(kb) == worked_s_text());
}

TEST_CASE("kb parse errors") {
    const auto parse_error_line = [](const std::string& text) -> std::size_t {
        try {
            parse_kb(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        FAIL("expected ParseError");
        return 0;
    };
    CHECK_THROWS_AS(parse_kb(""), ParseError);
    CHECK_THROWS_AS(parse_kb("vcrkb 2\ngrid 2 2\n"), ParseError);
    CHECK_THROWS_AS(parse_kb("vcrkb  1\ngrid 2 2\n"), ParseError);
    CHECK_THROWS_AS(parse_kb("vcrkb 1\r\ngrid 2 2\n"), ParseError);
    CHECK_THROWS_AS(parse_kb("vcrkb 1\ngrid 0 2\n"), ParseError);
    CHECK_THROWS_AS(parse_kb("vcrkb 1\ngrid 2\n"), ParseError);
    CHECK_THROWS_AS(parse_kb("vcrkb 1\ngrid 2 2\n\n"), ParseError);
    CHECK_THROWS_AS(parse_kb("vcrkb 1\ngrid 2 1\nlabel A 1\n1\n"), ParseError);
    CHECK_THROWS_AS(parse_kb("vcrkb 1\ngrid 2 1\nlabel A 1\n1 x\n"), ParseError);
    CHECK_THROWS_AS(parse_kb("vcrkb 1\ngrid 2 1\nlabel A 1\n1 -1 \n"), ParseError);
    CHECK_THROWS_AS(parse_kb("vcrkb 1\ngrid 2 1\nlabel A 1\n1 -1\nlabel A 1\n1 -1\n"), ParseError);
    CHECK_THROWS_AS(parse_kb("vcrkb 1\ngrid 2 1\nlabel B 1\n1 -1\nlabel A 1\n1 -1\n"), ParseError);
    CHECK_THROWS_AS(parse_kb("vcrkb 1\ngrid 2 1\nlabel A\n1 -1\n"), ParseError);
    CHECK_THROWS_AS(parse_kb("vcrkb 1\ngrid 2 1\nlabel A x\n1 -1\n"), ParseError);
    CHECK_THROWS_AS(parse_kb("vcrkb 1\ngrid 2 1\nlabel A 1\n+1 -1\n"), ParseError);

    // Five rows for an eight-row grid: the sixth row read is the next label or EOF.
    std::string short_rows = "vcrkb 1\ngrid 6 8\nlabel S 3\n";
    for (int i = 0; i < 5; ++i) short_rows += "1 3 3 3 3 1\n";
    CHECK(parse_error_line(short_rows) == 9);
}

TEST_CASE("kb invariant violations") {
    std::string text = worked_s_text();
    // Replace the first weight (1) with 4: wrong parity for teach count 3.
    const auto pos = text.find("label S 3\n1 ") + std::string("label S 3\n").size();
    text[pos] = '4';
    CHECK_THROWS_AS(parse_kb(text), InvariantViolation);
    CHECK_THROWS_AS(parse_kb("vcrkb 1\ngrid 2 1\nlabel A 1\n3 -1\n"), InvariantViolation);
    CHECK_THROWS_AS(parse_kb("vcrkb 1\ngrid 2 1\nlabel A 0\n0 2\n"), InvariantViolation);
    CHECK_THROWS_AS(parse_kb("vcrkb 1\ngrid 2 1\nlabel A 1\n99999999999 1\n"), InvariantViolation);
}

TEST_CASE("kb without trailing newline still parses") {
    CHECK(parse_kb("vcrkb 1\ngrid 2 1\nlabel A 1\n1 -1") == parse_kb("vcrkb 1\ngrid 2 1\nlabel A 1\n1 -1\n"));
}

TEST_CASE("kb round trip and canonical bytes") {
    std::mt19937_64 rng(3);
    TempDir dir;
    for (int i = 0; i < 50; ++i) {
        const KnowledgeBase kb = random_kb(rng);
        save_kb(kb, dir / "kb.vcrkb");
        const KnowledgeBase back = load_kb(dir / "kb.vcrkb");
        CHECK(back == kb);
        CHECK(format_kb(back) == format_kb(kb));
    }
}

TEST_CASE("atomic save leaves no temporary files") {
    TempDir dir;
    KnowledgeBase kb(GridDims{2, 2});
    kb.teach(Label("A"), grid_of({"#.", ".#"}));
    save_kb(kb, dir / "u.vcrkb");
    save_kb(kb, dir / "u.vcrkb");
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++files;
    CHECK(files == 1);
    CHECK_THROWS_AS(save_kb(kb, dir / "missing" / "u.vcrkb"), IoError);
    CHECK_THROWS_AS(load_kb(dir / "nope.vcrkb"), IoError);
}

TEST_CASE("glyph format") {
    const auto g = grid_of({"#.", ".#"});
    CHECK(format_glyph(g) == "glyph 2 2\n#.\n.#\n");
    CHECK(parse_glyph("glyph 2 2\n#.\n.#\n") == g);

    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
        const auto r = random_grid(rng, random_dims(rng, 20));
        CHECK(parse_glyph(format_glyph(r)) == r);
    }
}

TEST_CASE("glyph parse errors carry line and column") {
    const auto where = [](const std::string& text) {
        try {
            parse_glyph(text);
        } catch (const ParseError& e) {
            return std::pair{e.line(), e.column()};
        }
        FAIL("expected ParseError");
        return std::pair<std::size_t, std::size_t>{0, 0};
    };
    CHECK(where("glyph 2 2\n#.\n.x\n") == std::pair<std::size_t, std::size_t>{3, 2});
    CHECK(where("glyph 2 2\n#..\n.#\n") == std::pair<std::size_t, std::size_t>{2, 3});
    CHECK(where("glyph 2 2\n#\n.#\n").first == 2);
    CHECK(where("glyph 2 2\n#.\n").first == 3);
    CHECK(where("glyph 2 2\n#.\n.#\n##\n").first == 4);
    CHECK(where("glyph 2\n").first == 1);
    CHECK(where("glyph 2 2\n#.\r\n.#\n").first == 2);
}

TEST_CASE("raster: plain PBM") {
    const Raster r = parse_raster("P1\n2 2\n1 0 0 1");
    CHECK(r.width() == 2);
    CHECK(r.height() == 2);
    CHECK(std::vector<std::uint8_t>(r.pixels().begin(), r.pixels().end()) == std::vector<std::uint8_t>{0, 255, 255, 0});
    // Samples may be unseparated; comments are allowed.
    CHECK(parse_raster("P1 # comment\n2 2\n1001\n") == r);
    CHECK_THROWS_AS(parse_raster("P1\n2 2\n1 0 0"), ParseError);
    CHECK_THROWS_AS(parse_raster("P1\n2 2\n1 0 0 2"), ParseError);
}

TEST_CASE("raster: binary PBM") {
    // 10 pixels wide: two bytes per row, MSB first, padded.
    std::string data = "P4\n10 2\n";
    data += static_cast<char>(0b10000000);
    data += static_cast<char>(0b01000000);
    data += static_cast<char>(0b00000000);
    data += static_cast<char>(0b00000000);
    const Raster r = parse_raster(data);
    CHECK(r.at(0, 0) == 0);
    CHECK(r.at(0, 1) == 255);
    CHECK(r.at(0, 9) == 0);
    CHECK(r.at(1, 9) == 255);
    CHECK_THROWS_AS(parse_raster(data.substr(0, data.size() - 1)), ParseError);
}

TEST_CASE("raster: PGM") {
    const Raster white = parse_raster("P2\n3 1\n255\n255 255 255\n");
    for (auto p : white.pixels()) CHECK(p == 255);
    const Raster scaled = parse_raster("P2\n3 1\n4\n0 2 4\n");
    CHECK(scaled.at(0, 0) == 0);
    CHECK(scaled.at(0, 1) == 128);
    CHECK(scaled.at(0, 2) == 255);
    CHECK_THROWS_AS(parse_raster("P2\n2 1\n4\n0 5\n"), ParseError);

    std::string p5 = "P5\n2 1\n255\n";
    p5 += static_cast<char>(10);
    p5 += static_cast<char>(200);
    const Raster r5 = parse_raster(p5);
    CHECK(r5.at(0, 0) == 10);
    CHECK(r5.at(0, 1) == 200);
    CHECK_THROWS_AS(parse_raster(p5.substr(0, p5.size() - 1)), ParseError);

    std::string wide = "P5\n1 1\n65535\n";
    wide += static_cast<char>(0xFF);
    wide += static_cast<char>(0xFF);
    CHECK(parse_raster(wide).at(0, 0) == 255);
}

TEST_CASE("raster: header errors") {
    CHECK_THROWS_AS(parse_raster(""), ParseError);
    CHECK_THROWS_AS(parse_raster("P3\n1 1\n255\n0 0 0\n"), ParseError);
    CHECK_THROWS_AS(parse_raster("GIF89a"), ParseError);
    CHECK_THROWS_AS(parse_raster("P1\n0 2\n"), ParseError);
    CHECK_THROWS_AS(parse_raster("P1\n65536 1\n"), ParseError);
    CHECK_THROWS_AS(parse_raster("P1\n99999999999999999999 1\n"), ParseError);
    CHECK_THROWS_AS(parse_raster("P2\n1 1\n0\n0\n"), ParseError);
    CHECK_THROWS_AS(parse_raster("P2\n1 1\n70000\n0\n"), ParseError);
    CHECK_THROWS_AS(parse_raster("P5\n1 1\n255"), ParseError);
}

TEST_CASE("format_pbm round trips through the parser") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 20; ++i) {
        const Raster r = render(random_grid(rng, random_dims(rng, 8)), 2);
        CHECK(parse_raster(format_pbm(r)) == r);
    }
}

TEST_CASE("load_pattern sniffs glyphs and rasters") {
    TempDir dir;
    const auto g = grid_of({".##.", "#..#", "####", "#..#"});
    save_glyph(g, dir / "a.glyph");
    {
        std::ofstream(dir / "a.pbm") << format_pbm(render(g, 3));
    }
    CHECK(load_pattern(dir / "a.glyph", GridDims{4, 4}) == g);
    CHECK(load_pattern(dir / "a.pbm", GridDims{4, 4}) == g);
    CHECK_THROWS_AS(load_pattern(dir / "a.glyph", GridDims{5, 4}), DimsMismatch);
    CHECK(load_glyph(dir / "a.glyph") == g);
    CHECK(load_raster(dir / "a.pbm") == render(g, 3));
}
