#include <doctest.h>

#include <algorithm>

#include "glyphforge/error.hpp"
#include "glyphforge/knowledge.hpp"
#include "test_support.hpp"

using namespace glyphforge;
using namespace glyphforge::testing;

namespace {

// Brute-force oracle for repeated teaching: 2 * (#patterns black at cell) - n.
std::vector<std::int32_t> counted_weights(const std::vector<BinaryGrid>& patterns, GridDims dims) {
    std::vector<std::int32_t> out(dims.cell_count(), 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int black = 0;
        for (const auto& p : patterns) black += p.cells()[i];
        out[i] = 2 * black - static_cast<int>(patterns.size());
    }
    return out;
}

void check_parity_range(const WeightMatrix& w) {
    for (auto v : w.weights()) {
        CHECK(std::abs(static_cast<std::int64_t>(v)) <= w.teach_count());
        CHECK((static_cast<std::int64_t>(v) - w.teach_count()) % 2 == 0);
    }
}

}  // namespace

TEST_CASE("label validation") {
    CHECK(Label("S").str() == "S");
    CHECK(Label("alpha_1").str() == "alpha_1");
    CHECK(Label("\xCE\xA3").str() == "\xCE\xA3");  // Greek capital sigma
    CHECK(Label(std::string(64, 'a')).str().size() == 64);
    CHECK_THROWS_AS(Label(std::string(65, 'a')), InvalidLabel);
    CHECK_THROWS_AS(Label(""), InvalidLabel);
    CHECK_THROWS_AS(Label("a b"), InvalidLabel);
    CHECK_THROWS_AS(Label("a\tb"), InvalidLabel);
    CHECK_THROWS_AS(Label("a\x01"), InvalidLabel);
    CHECK_THROWS_AS(Label("\xC3"), InvalidLabel);          // truncated UTF-8
    CHECK_THROWS_AS(Label("a\xC2\xA0"), InvalidLabel);     // no-break space
    // 64 two-byte code points are still 64 characters.
    std::string sigmas;
    for (int i = 0; i < 64; ++i) sigmas += "\xCE\xA3";
    CHECK(Label(sigmas).str().size() == 128);
    CHECK(Label("a") < Label("b"));
    CHECK(Label("B") < Label("a"));  // case-sensitive bytewise order
}

TEST_CASE("kb_new is empty") {
    KnowledgeBase kb(GridDims{6, 8});
    CHECK(kb.size() == 0);
    CHECK(kb.dims() == GridDims{6, 8});
    CHECK(kb.labels().empty());
    CHECK(KnowledgeBase(kDefaultDims).empty());
}

TEST_CASE("teach once gives the bipolar pattern") {
    KnowledgeBase kb(GridDims{3, 2});
    const auto p = grid_of({"#.#", ".##"});
    CHECK(kb.teach(Label("S"), p) == 1);
    const auto& w = kb.weights(Label("S"));
    CHECK(w.teach_count() == 1);
    const auto m = to_bipolar(p);
    for (std::size_t i = 0; i < 6; ++i) CHECK(w.weights()[i] == m.cells()[i]);
}

TEST_CASE("three teachings follow the counting closed form") {
    KnowledgeBase kb(GridDims{3, 3});
    const std::vector<BinaryGrid> ps = {grid_of({"###", "#..", "###"}), grid_of({"###", "#..", "##."}),
                                        grid_of({".##", "#..", "###"})};
    for (const auto& p : ps) kb.teach(Label("S"), p);
    const auto& w = kb.weights(Label("S"));
    CHECK(w.teach_count() == 3);
    const auto expected = counted_weights(ps, GridDims{3, 3});
    CHECK(std::equal(expected.begin(), expected.end(), w.weights().begin()));
    for (auto v : w.weights()) CHECK((v == -3 || v == -1 || v == 1 || v == 3));
}

TEST_CASE("teach rejects dims mismatch and leaves the kb unchanged") {
    KnowledgeBase kb(GridDims{2, 2});
    kb.teach(Label("A"), grid_of({"#.", ".#"}));
    const KnowledgeBase before = kb;
    CHECK_THROWS_AS(kb.teach(Label("A"), grid_of({"#.#"})), DimsMismatch);
    CHECK_THROWS_AS(kb.teach(Label("B"), grid_of({"#.#"})), DimsMismatch);
    CHECK(kb == before);
}

TEST_CASE("forget") {
    KnowledgeBase kb(GridDims{2, 2});
    CHECK_THROWS_AS(kb.forget(Label("A")), UnknownLabel);
    kb.teach(Label("A"), grid_of({"#.", ".#"}));
    kb.teach(Label("B"), grid_of({"##", ".."}));
    const WeightMatrix b_before = kb.weights(Label("B"));
    kb.forget(Label("A"));
    CHECK_FALSE(kb.contains(Label("A")));
    CHECK(kb.weights(Label("B")) == b_before);
    CHECK_THROWS_AS(kb.forget(Label("A")), UnknownLabel);
}

TEST_CASE("get_weights on an unknown label") {
    KnowledgeBase kb(GridDims{2, 2});
    CHECK_THROWS_AS(kb.weights(Label("nope")), UnknownLabel);
}

TEST_CASE("labels come out in lexicographic order") {
    KnowledgeBase kb(GridDims{1, 1});
    for (const char* name : {"b", "A", "a", "B"}) kb.teach(Label(name), grid_of({"#"}));
    std::vector<std::string> names;
    for (const auto& l : kb.labels()) names.push_back(l.str());
    CHECK(names == std::vector<std::string>{"A", "B", "a", "b"});
}

TEST_CASE("from_weights enforces range and parity") {
    const GridDims d{2, 1};
    CHECK_NOTHROW(WeightMatrix::from_weights(d, {3, -1}, 3));
    CHECK_THROWS_AS(WeightMatrix::from_weights(d, {4, 1}, 3), InvariantViolation);
    CHECK_THROWS_AS(WeightMatrix::from_weights(d, {5, 1}, 3), InvariantViolation);
    CHECK_THROWS_AS(WeightMatrix::from_weights(d, {1, 0}, 0), InvariantViolation);
    CHECK_THROWS_AS(WeightMatrix::from_weights(d, {1}, 1), InvariantViolation);
    CHECK_THROWS_AS(WeightMatrix::from_weights(d, {1, 1}, -1), InvariantViolation);
    CHECK_THROWS_AS(WeightMatrix::from_weights(d, {1, 1}, kMaxTeachCount + 2), InvariantViolation);
}

TEST_CASE("worked S matrix satisfies the n = 3 invariants") {
    std::vector<std::int32_t> flat;
    for (const auto& row : kWorkedS) flat.insert(flat.end(), row.begin(), row.end());
    const auto w = WeightMatrix::from_weights(GridDims{6, 8}, flat, 3);
    CHECK(w.weights().size() == 48);
    check_parity_range(w);
    CHECK(w.max_magnitude() == 3);
}

TEST_CASE("teach count limit") {
    const auto w = WeightMatrix::from_weights(GridDims{1, 1}, {static_cast<std::int32_t>(kMaxTeachCount)},
                                              kMaxTeachCount);
    WeightMatrix copy = w;
    CHECK_THROWS_AS(copy.learn(grid_of({"#"})), TeachLimit);
    CHECK(copy == w);
}

TEST_CASE("property: closed form, parity, order and cross-label independence") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const GridDims dims = random_dims(rng, 8);
        std::uniform_int_distribution<int> count(1, 12);
        std::vector<BinaryGrid> a, b;
        for (int i = count(rng); i > 0; --i) a.push_back(random_grid(rng, dims));
        for (int i = count(rng); i > 0; --i) b.push_back(random_grid(rng, dims));

        // Interleaved, shuffled teaching of two labels.
        std::vector<std::pair<char, BinaryGrid>> schedule;
        for (const auto& p : a) schedule.emplace_back('a', p);
        for (const auto& p : b) schedule.emplace_back('b', p);
        std::shuffle(schedule.begin(), schedule.end(), rng);
        KnowledgeBase mixed(dims);
        for (const auto& [which, p] : schedule) {
            mixed.teach(Label(std::string(1, which)), p);
            check_parity_range(mixed.weights(Label(std::string(1, which))));
        }

        // Each label taught alone, in original order.
        KnowledgeBase only_a(dims), only_b(dims);
        for (const auto& p : a) only_a.teach(Label("a"), p);
        for (const auto& p : b) only_b.teach(Label("b"), p);

        CHECK(mixed.weights(Label("a")) == only_a.weights(Label("a")));
        CHECK(mixed.weights(Label("b")) == only_b.weights(Label("b")));

        const auto expected = counted_weights(a, dims);
        const auto& got = mixed.weights(Label("a")).weights();
        CHECK(std::equal(expected.begin(), expected.end(), got.begin()));
    }
}
