#pragma once

#include <vector>

#include "kgxrec/graph.hpp"
#include "kgxrec/tensor.hpp"

namespace kgxrec::attn {

// -inf realized as a large negative additive penalty; subtracting the row max
// in the softmax would turn true -inf into NaN for fully masked entries.
constexpr double kMaskNegInf = -1e9;

// m x m additive mask: 0 where components are connected or i == j, -inf
// elsewhere. Symmetric, zero diagonal.
struct ComponentMask {
    size_t size = 0;
    std::vector<double> entries;  // row-major size*size

    double at(size_t i, size_t j) const { return entries[i * size + j]; }
    bool blocked(size_t i, size_t j) const { return at(i, j) != 0.0; }
};

ComponentMask mask_from_adjacency(const std::vector<uint8_t>& adjacency, size_t m);
ComponentMask build_component_mask(const UserItemGraph& graph);

// One attention block's projections. Global and graph attention keep separate
// parameter sets per layer.
struct AttentionParams {
    nn::Tensor wq, wk, wv, wo;  // each d x d
    size_t heads = 1;
};

AttentionParams make_attention_params(size_t d, size_t heads, double init_std, nn::Rng& rng);

// Multi-head scaled dot-product attention. `add_mask`, when given, is an
// nq x nk additive matrix applied to every head's scores before the softmax.
// `attn_out`, when given, receives each head's attention probabilities.
nn::Tensor multihead_attention(const nn::Tensor& queries_in, const nn::Tensor& keys_in,
                               const AttentionParams& params,
                               const std::vector<double>* add_mask = nullptr,
                               std::vector<std::vector<double>>* attn_out = nullptr);

// Token-level self-attention over the linearized sequence. Rejects non-finite
// input.
nn::Tensor global_attention(const nn::Tensor& x, const AttentionParams& params,
                            std::vector<std::vector<double>>* attn_out = nullptr);

// Component-level self-attention restricted by the graph topology mask.
nn::Tensor graph_attention(const nn::Tensor& pooled, const ComponentMask& mask,
                           const AttentionParams& params,
                           std::vector<std::vector<double>>* attn_out = nullptr);

// Mean of the token vectors inside each component span.
nn::Tensor pool_components(const nn::Tensor& x, const std::vector<Span>& spans);

// Broadcasts each component vector back over its tokens and adds the result to
// the token stream; marker positions pass through unchanged.
nn::Tensor gather_combine(const nn::Tensor& components, const nn::Tensor& x,
                          const std::vector<Span>& spans);

}  // namespace kgxrec::attn
