#include "kgxrec/encode.hpp"

#include "kgxrec/error.hpp"

namespace kgxrec {

EncodedSequence linearize(const UserItemGraph& graph, const Vocabulary& vocab, const Limits& limits) {
    const auto& comps = graph.components();
    const size_t center_index = graph.num_purchases();

    // Truncation: drop trailing triples until the KG section fits, then drop
    // oldest purchases until the user section fits. At least one purchase and
    // the center always survive.
    size_t kept_triples = graph.num_triples();
    size_t kg_tokens = comps[center_index].tokens.size();
    for (size_t t = 0; t < graph.num_triples(); ++t) {
        kg_tokens += comps[center_index + 1 + 2 * t].tokens.size();
        kg_tokens += comps[center_index + 2 + 2 * t].tokens.size();
    }
    while (kg_tokens > limits.max_kg_size && kept_triples > 0) {
        kg_tokens -= comps[center_index + 2 * kept_triples].tokens.size();      // tail
        kg_tokens -= comps[center_index + 2 * kept_triples - 1].tokens.size();  // relation
        --kept_triples;
    }

    size_t first_purchase = 0;
    size_t user_tokens = 0;
    for (size_t p = 0; p < graph.num_purchases(); ++p) user_tokens += comps[p].tokens.size();
    while (user_tokens > limits.max_user_size && first_purchase + 1 < graph.num_purchases()) {
        user_tokens -= comps[first_purchase].tokens.size();
        ++first_purchase;
    }

    const size_t kept_purchases = graph.num_purchases() - first_purchase;
    const size_t m = kept_purchases + 1 + 2 * kept_triples;

    EncodedSequence seq;
    seq.num_purchases = kept_purchases;
    seq.num_triples = kept_triples;
    seq.spans.reserve(m);
    seq.component_kinds.reserve(m);

    auto push_marker = [&](int32_t marker_id) {
        seq.token_ids.push_back(marker_id);
        seq.component_of.push_back(-1);
        seq.user_mask.push_back(0);
        seq.item_mask.push_back(0);
    };
    auto push_component = [&](const Component& c, bool is_user) {
        Span span{seq.token_ids.size(), seq.token_ids.size() + c.tokens.size()};
        int32_t comp_index = static_cast<int32_t>(seq.spans.size());
        for (const std::string& tok : c.tokens) {
            seq.token_ids.push_back(vocab.id(tok));
            seq.component_of.push_back(comp_index);
            seq.user_mask.push_back(is_user ? 1 : 0);
            seq.item_mask.push_back(is_user ? 0 : 1);
        }
        seq.spans.push_back(span);
        seq.component_kinds.push_back(c.kind);
    };

    for (size_t p = first_purchase; p < graph.num_purchases(); ++p) {
        push_marker(Vocabulary::kUserMarker);
        push_component(comps[p], true);
    }
    push_marker(Vocabulary::kGraphMarker);
    push_marker(Vocabulary::kHeadMarker);
    push_component(comps[center_index], false);
    for (size_t t = 0; t < kept_triples; ++t) {
        push_marker(Vocabulary::kRelationMarker);
        push_component(comps[center_index + 1 + 2 * t], false);
        push_marker(Vocabulary::kTailMarker);
        push_component(comps[center_index + 2 + 2 * t], false);
    }

    seq.adjacency = component_adjacency(kept_purchases, kept_triples);
    return seq;
}

}  // namespace kgxrec
