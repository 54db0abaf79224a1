#pragma once

#include <cstdint>
#include <vector>

#include "kgxrec/graph.hpp"
#include "kgxrec/span.hpp"
#include "kgxrec/vocab.hpp"

namespace kgxrec {

// Linearized user-item graph: marker-delimited token ids plus the component
// bookkeeping the encoder needs. Spans are disjoint and cover exactly the
// non-marker positions; the adjacency matches the (possibly truncated)
// component list.
struct EncodedSequence {
    std::vector<int32_t> token_ids;
    std::vector<int32_t> component_of;        // per token; -1 for markers
    std::vector<Span> spans;                  // per component
    std::vector<ComponentKind> component_kinds;
    std::vector<uint8_t> user_mask;           // m_u: purchase name tokens
    std::vector<uint8_t> item_mask;           // m_v: center/relation/tail tokens
    std::vector<uint8_t> adjacency;           // m*m, no self loops
    size_t num_purchases = 0;
    size_t num_triples = 0;

    size_t length() const { return token_ids.size(); }
    size_t num_components() const { return spans.size(); }
};

// Marker layout:
//   [user] p1 ... [user] pk [graph] [head] center ([relation] r [tail] t)*
// Over-length inputs are truncated deterministically: trailing triples first
// (down to the KG token budget), then oldest purchases (down to the user token
// budget). The center is never truncated.
EncodedSequence linearize(const UserItemGraph& graph, const Vocabulary& vocab, const Limits& limits = {});

}  // namespace kgxrec
