#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here
// re-derive expected values with plain loops and never call the code paths
// they check.

#include <string>
#include <vector>

#include "kgxrec/dataset.hpp"
#include "kgxrec/encode.hpp"
#include "kgxrec/graph.hpp"
#include "kgxrec/rng.hpp"
#include "kgxrec/tensor.hpp"
#include "kgxrec/vocab.hpp"

namespace testing {

using namespace kgxrec;

inline Item item_of(const std::string& id, const std::string& name_text) {
    Tokenizer tok;
    return make_item(id, tok.tokenize(name_text));
}

inline UserHistory user_of(const std::vector<std::string>& purchase_names, const Limits& limits = {}) {
    std::vector<Item> items;
    for (const auto& n : purchase_names) items.push_back(item_of(n, n));
    return make_user_history("u", std::move(items), limits);
}

inline ItemKG kg_of(const std::string& center,
                    const std::vector<std::pair<std::string, std::string>>& rel_tail,
                    const Limits& limits = {}) {
    Tokenizer tok;
    std::vector<Triple> triples;
    for (const auto& [r, t] : rel_tail) triples.push_back({tok.tokenize(r), tok.tokenize(t)});
    return make_item_kg(item_of(center, center), std::move(triples), limits);
}

// Adjacency re-derived pairwise from the construction rule, using only
// component kinds and triple pairing.
inline bool oracle_adjacent(const UserItemGraph& g, size_t i, size_t j) {
    if (i == j) return false;
    const auto& comps = g.components();
    const size_t center = g.num_purchases();
    auto kind = [&](size_t k) { return comps[k].kind; };
    auto triple_of = [&](size_t k) { return (k - center - 1) / 2; };
    if (kind(i) > kind(j)) std::swap(i, j);
    if (kind(i) == ComponentKind::Purchase && kind(j) == ComponentKind::Purchase) return true;
    if (kind(i) == ComponentKind::Purchase && kind(j) == ComponentKind::Center) return true;
    if (kind(i) == ComponentKind::Center && kind(j) == ComponentKind::Relation) return true;
    if (kind(i) == ComponentKind::Relation && kind(j) == ComponentKind::Tail)
        return triple_of(i) == triple_of(j);
    return false;
}

// Deterministic pseudo-word pool for randomized fixtures.
inline std::string nth_word(size_t n) {
    static const char* syllables[] = {"ka", "lo", "mi", "ra", "tu", "ve", "zo", "ne"};
    std::string w;
    w += syllables[n % 8];
    w += syllables[(n / 8) % 8];
    w += static_cast<char>('a' + (n / 64) % 26);
    return w;
}

inline std::string random_name(kgxrec::nn::Rng& rng, size_t min_tokens, size_t max_tokens) {
    const size_t len = min_tokens + rng.index(max_tokens - min_tokens + 1);
    std::string out;
    for (size_t i = 0; i < len; ++i) {
        if (i > 0) out += ' ';
        out += nth_word(rng.index(300));
    }
    return out;
}

inline UserItemGraph random_graph(kgxrec::nn::Rng& rng, size_t max_purchases = 4,
                                  size_t max_triples = 3, size_t max_name_tokens = 3) {
    const size_t purchases = 1 + rng.index(max_purchases);
    const size_t triples = 1 + rng.index(max_triples);
    std::vector<std::string> names;
    for (size_t i = 0; i < purchases; ++i) names.push_back(random_name(rng, 1, max_name_tokens));
    std::vector<std::pair<std::string, std::string>> rel_tail;
    for (size_t i = 0; i < triples; ++i)
        rel_tail.emplace_back(random_name(rng, 1, max_name_tokens),
                              random_name(rng, 1, max_name_tokens));
    return UserItemGraph::build(user_of(names), kg_of(random_name(rng, 1, max_name_tokens), rel_tail));
}

// A vocabulary that covers every token in the graph (plus reserved ids).
inline Vocabulary vocab_for(const UserItemGraph& g) {
    std::vector<std::vector<std::string>> streams;
    for (const auto& c : g.components()) streams.push_back(c.tokens);
    return Vocabulary::build(streams);
}

// Relative error with a small-magnitude floor, as used for gradient checks.
inline double rel_err(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-6});
    return std::abs(a - b) / scale;
}

// Small synthetic corpus: n items with two-triple KGs whose explanations
// mention every KG entity, users assigned round-robin (4 items each) so no
// user is cold. Deterministic.
inline std::vector<DatasetRecord> make_synthetic_records(size_t n) {
    std::vector<DatasetRecord> records;
    for (size_t i = 0; i < n; ++i) {
        DatasetRecord r;
        r.user_id = "user" + std::to_string(i / 4);
        r.item_id = "item" + std::to_string(i);
        r.rating = 1.0 + 0.5 * static_cast<double>((3 * i) % 9);
        const std::string name = "book " + nth_word(i);
        const std::string genre = nth_word(60 + i) + " saga";
        const std::string author = nth_word(130 + i) + " writer";
        r.explanation = name + " is a " + genre + " by " + author;
        r.triples = {{name, "genre", genre}, {name, "author", author}};
        records.push_back(std::move(r));
    }
    return records;
}

struct PreparedCorpus {
    std::vector<Example> examples;
    Vocabulary vocab;
    std::vector<EncodedExample> encoded;
};

inline PreparedCorpus prepare_corpus(const std::vector<DatasetRecord>& records,
                                     size_t max_explanation_len = 24, const Limits& limits = {}) {
    PreparedCorpus out;
    Tokenizer tok;
    out.examples = assemble_examples(records, records, tok, limits);
    out.vocab = build_vocabulary(out.examples, tok);
    out.encoded = encode_examples(out.examples, out.vocab, tok, limits, max_explanation_len);
    return out;
}

}  // namespace testing
