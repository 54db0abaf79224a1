#include <doctest.h>

#include <map>
#include <set>

#include "helpers.hpp"
#include "kgxrec/error.hpp"
#include "kgxrec/text.hpp"

using namespace kgxrec;
using namespace testing;

TEST_CASE("two purchases and one triple give five components with the expected edges") {
    auto user = user_of({"The Lord of the Rings", "The Little Prince"});
    auto kg = kg_of("Harry Potter", {{"author", "J.K. Rowling"}});
    auto g = UserItemGraph::build(user, kg);

    REQUIRE(g.num_components() == 5);
    // 0,1 purchases; 2 center; 3 relation; 4 tail
    CHECK(g.adjacent(0, 1));  // purchases mutually adjacent
    CHECK(g.adjacent(0, 2));  // purchases adjacent to the center
    CHECK(g.adjacent(1, 2));
    CHECK(g.adjacent(2, 3));  // author - Harry Potter
    CHECK(g.adjacent(3, 4));  // author - J.K. Rowling
    CHECK_FALSE(g.adjacent(0, 3));
    CHECK_FALSE(g.adjacent(0, 4));
    CHECK_FALSE(g.adjacent(2, 4));  // tail connects through its relation only
}

TEST_CASE("minimal graph: one purchase, one triple") {
    auto g = UserItemGraph::build(user_of({"A"}), kg_of("B", {{"r", "C"}}));
    REQUIRE(g.num_components() == 4);
    std::set<std::pair<size_t, size_t>> edges;
    for (size_t i = 0; i < 4; ++i)
        for (size_t j = i + 1; j < 4; ++j)
            if (g.adjacent(i, j)) edges.insert({i, j});
    CHECK(edges == std::set<std::pair<size_t, size_t>>{{0, 1}, {1, 2}, {2, 3}});
}

TEST_CASE("three purchases and two triples match the brute-force adjacency oracle") {
    auto g = UserItemGraph::build(user_of({"p one", "p two", "p three"}),
                                  kg_of("center", {{"r1", "t1"}, {"r2", "t2"}}));
    REQUIRE(g.num_components() == 8);  // 3 + 1 + 2*2
    for (size_t i = 0; i < 8; ++i)
        for (size_t j = 0; j < 8; ++j) CHECK(g.adjacent(i, j) == oracle_adjacent(g, i, j));
    // Purchase block forms a clique together with the center.
    for (size_t i = 0; i <= 3; ++i)
        for (size_t j = 0; j <= 3; ++j)
            if (i != j) CHECK(g.adjacent(i, j));
}

TEST_CASE("random graphs satisfy the structural invariants") {
    nn::Rng rng(271828);
    for (int round = 0; round < 30; ++round) {
        auto g = random_graph(rng);
        const size_t m = g.num_components();
        REQUIRE(m == g.num_purchases() + 1 + 2 * g.num_triples());
        for (size_t i = 0; i < m; ++i) {
            CHECK_FALSE(g.adjacent(i, i));
            for (size_t j = 0; j < m; ++j) {
                CHECK(g.adjacent(i, j) == g.adjacent(j, i));
                CHECK(g.adjacent(i, j) == oracle_adjacent(g, i, j));
            }
        }
        // Relation degree is exactly 2: the center and its tail.
        for (size_t t = 0; t < g.num_triples(); ++t) {
            const size_t rel = g.num_purchases() + 1 + 2 * t;
            size_t degree = 0;
            for (size_t j = 0; j < m; ++j) degree += g.adjacent(rel, j) ? 1 : 0;
            CHECK(degree == 2);
        }
    }
}

TEST_CASE("construction rejects the documented error cases") {
    CHECK_THROWS_AS(make_user_history("u", {}), DataError);
    CHECK_THROWS_AS(make_item("x", {}), DataError);
    CHECK_THROWS_AS(kg_of("center", {}), DataError);
    CHECK_THROWS_AS(make_interaction("u", "v", 0.5, "text"), DataError);
    CHECK_THROWS_AS(make_interaction("u", "v", 5.5, "text"), DataError);
    CHECK_THROWS_AS(make_interaction("u", "v", 3.0, ""), DataError);
    CHECK_NOTHROW(make_interaction("u", "v", 3.0, "", /*require_explanation=*/false));

    std::vector<std::string> long_name;
    for (int i = 0; i < 61; ++i) long_name.push_back("w");
    CHECK_THROWS_AS(make_item_kg(item_of("c", "c"), {Triple{{"r"}, long_name}}, Limits{}), DataError);
}

TEST_CASE("user history truncates to the most recent purchases") {
    Limits limits;
    limits.max_user_size = 2;
    auto user = user_of({"one", "two", "three"}, limits);
    REQUIRE(user.purchases.size() == 2);
    CHECK(user.purchases[0].name == std::vector<std::string>{"two"});
    CHECK(user.purchases[1].name == std::vector<std::string>{"three"});
}

TEST_CASE("item KG drops trailing triples to fit the token budget") {
    Limits limits;
    limits.max_kg_size = 5;  // center(1) + 2 per triple -> keeps 2 triples
    auto kg = kg_of("c", {{"r1", "t1"}, {"r2", "t2"}, {"r3", "t3"}}, limits);
    REQUIRE(kg.triples.size() == 2);
    CHECK(kg.triples[0].relation == std::vector<std::string>{"r1"});
    CHECK(kg.triples[1].relation == std::vector<std::string>{"r2"});
}

// --- linearization ---

TEST_CASE("linearized token text follows the purchase, center, relation, tail order") {
    auto user = user_of({"The Lord of the Rings", "The Little Prince"});
    auto kg = kg_of("Harry Potter", {{"author", "J.K. Rowling"}});
    auto g = UserItemGraph::build(user, kg);
    auto vocab = vocab_for(g);
    auto seq = linearize(g, vocab);

    Tokenizer tok;
    std::vector<std::string> expected;
    for (const auto& name : {"The Lord of the Rings", "The Little Prince", "Harry Potter", "author",
                             "J.K. Rowling"}) {
        for (const auto& t : tok.tokenize(name)) expected.push_back(t);
    }
    std::vector<std::string> got;
    for (size_t i = 0; i < seq.length(); ++i)
        if (seq.component_of[i] >= 0) got.push_back(vocab.token(seq.token_ids[i]));
    CHECK(got == expected);

    // Markers interleave: [user] x2, [graph], [head], [relation], [tail].
    std::map<int32_t, int> marker_counts;
    for (size_t i = 0; i < seq.length(); ++i)
        if (seq.component_of[i] < 0) ++marker_counts[seq.token_ids[i]];
    CHECK(marker_counts[Vocabulary::kUserMarker] == 2);
    CHECK(marker_counts[Vocabulary::kGraphMarker] == 1);
    CHECK(marker_counts[Vocabulary::kHeadMarker] == 1);
    CHECK(marker_counts[Vocabulary::kRelationMarker] == 1);
    CHECK(marker_counts[Vocabulary::kTailMarker] == 1);
}

TEST_CASE("spans partition exactly the non-marker positions") {
    auto g = UserItemGraph::build(user_of({"single purchase"}), kg_of("center item", {{"rel", "tail"}}));
    auto seq = linearize(g, vocab_for(g));

    std::vector<int> covered(seq.length(), 0);
    for (const Span& s : seq.spans)
        for (size_t t = s.begin; t < s.end; ++t) ++covered[t];
    for (size_t i = 0; i < seq.length(); ++i) {
        const bool is_marker = seq.component_of[i] < 0;
        CHECK(covered[i] == (is_marker ? 0 : 1));
        const bool in_selectors = seq.user_mask[i] != 0 || seq.item_mask[i] != 0;
        CHECK(in_selectors == !is_marker);
        const bool in_both = seq.user_mask[i] != 0 && seq.item_mask[i] != 0;
        CHECK_FALSE(in_both);
    }
}

TEST_CASE("round trip: per-component tokens equal the source names") {
    nn::Rng rng(1234);
    for (int round = 0; round < 25; ++round) {
        auto g = random_graph(rng, 4, 3, 5);
        auto vocab = vocab_for(g);
        auto seq = linearize(g, vocab);
        REQUIRE(seq.num_components() == g.num_components());
        for (size_t c = 0; c < seq.num_components(); ++c) {
            std::vector<std::string> got;
            for (size_t t = seq.spans[c].begin; t < seq.spans[c].end; ++t)
                got.push_back(vocab.token(seq.token_ids[t]));
            CHECK(got == g.components()[c].tokens);
            CHECK(seq.component_kinds[c] == g.components()[c].kind);
        }
    }
}

TEST_CASE("linearization is deterministic") {
    auto g = UserItemGraph::build(user_of({"alpha beta", "gamma"}),
                                  kg_of("delta", {{"rel one", "tail one"}, {"rel two", "tail two"}}));
    auto vocab = vocab_for(g);
    auto a = linearize(g, vocab);
    auto b = linearize(g, vocab);
    CHECK(a.token_ids == b.token_ids);
    CHECK(a.component_of == b.component_of);
    CHECK(a.adjacency == b.adjacency);
}

TEST_CASE("over-length input truncates triples first, then oldest purchases, never the center") {
    Limits limits;
    limits.max_kg_size = 3;    // center(1) + one (rel, tail) pair
    limits.max_user_size = 2;  // two single-token purchases
    auto g = UserItemGraph::build(
        user_of({"one", "two", "three"}),
        kg_of("center", {{"r1", "t1"}, {"r2", "t2"}}, Limits{}));  // no caps at KG build
    auto vocab = vocab_for(g);
    auto seq = linearize(g, vocab, limits);

    CHECK(seq.num_triples == 1);
    CHECK(seq.num_purchases == 2);
    REQUIRE(seq.num_components() == 5);
    // Oldest purchase dropped; the first kept component is "two".
    CHECK(vocab.token(seq.token_ids[seq.spans[0].begin]) == "two");
    // The center survives and keeps its kind.
    CHECK(seq.component_kinds[2] == ComponentKind::Center);
    CHECK(vocab.token(seq.token_ids[seq.spans[2].begin]) == "center");
    // Adjacency matches the truncated component count.
    CHECK(seq.adjacency == component_adjacency(2, 1));
}

TEST_CASE("unknown tokens map to the reserved unk id") {
    auto g = UserItemGraph::build(user_of({"known"}), kg_of("center", {{"rel", "tail"}}));
    Vocabulary tiny;  // reserved ids only
    auto seq = linearize(g, tiny);
    for (size_t i = 0; i < seq.length(); ++i)
        if (seq.component_of[i] >= 0) CHECK(seq.token_ids[i] == Vocabulary::kUnk);
}
