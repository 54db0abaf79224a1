#include "kgxrec/attention.hpp"

#include <cmath>

#include "kgxrec/error.hpp"

namespace kgxrec::attn {

ComponentMask mask_from_adjacency(const std::vector<uint8_t>& adjacency, size_t m) {
    if (adjacency.size() != m * m) throw NumericError("mask_from_adjacency: adjacency size mismatch");
    ComponentMask mask;
    mask.size = m;
    mask.entries.assign(m * m, kMaskNegInf);
    for (size_t i = 0; i < m; ++i) {
        mask.entries[i * m + i] = 0.0;
        for (size_t j = 0; j < m; ++j)
            if (adjacency[i * m + j] != 0) mask.entries[i * m + j] = 0.0;
    }
    return mask;
}

ComponentMask build_component_mask(const UserItemGraph& graph) {
    return mask_from_adjacency(graph.adjacency(), graph.num_components());
}

AttentionParams make_attention_params(size_t d, size_t heads, double init_std, nn::Rng& rng) {
    if (heads == 0 || d % heads != 0) throw ConfigError("attention: embedding size must divide by heads");
    AttentionParams p;
    p.heads = heads;
    p.wq = nn::Tensor::randn(d, d, init_std, rng);
    p.wk = nn::Tensor::randn(d, d, init_std, rng);
    p.wv = nn::Tensor::randn(d, d, init_std, rng);
    p.wo = nn::Tensor::randn(d, d, init_std, rng);
    return p;
}

nn::Tensor multihead_attention(const nn::Tensor& queries_in, const nn::Tensor& keys_in,
                               const AttentionParams& params, const std::vector<double>* add_mask,
                               std::vector<std::vector<double>>* attn_out) {
    const size_t d = params.wq.rows();
    if (queries_in.cols() != d || keys_in.cols() != d)
        throw NumericError("attention: input width does not match projections");
    if (add_mask != nullptr && add_mask->size() != queries_in.rows() * keys_in.rows())
        throw NumericError("attention: mask shape mismatch");

    const size_t dk = d / params.heads;
    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dk));

    nn::Tensor q = nn::matmul(queries_in, params.wq);
    nn::Tensor k = nn::matmul(keys_in, params.wk);
    nn::Tensor v = nn::matmul(keys_in, params.wv);

    if (attn_out != nullptr) attn_out->clear();
    std::vector<nn::Tensor> head_outputs;
    head_outputs.reserve(params.heads);
    for (size_t h = 0; h < params.heads; ++h) {
        nn::Tensor qh = nn::slice_cols(q, h * dk, (h + 1) * dk);
        nn::Tensor kh = nn::slice_cols(k, h * dk, (h + 1) * dk);
        nn::Tensor vh = nn::slice_cols(v, h * dk, (h + 1) * dk);
        nn::Tensor scores = nn::scale(nn::matmul(qh, nn::transpose(kh)), inv_scale);
        nn::Tensor probs = nn::softmax_rows(scores, add_mask);
        if (attn_out != nullptr) attn_out->push_back(probs.value());
        head_outputs.push_back(nn::matmul(probs, vh));
    }
    nn::Tensor concat = params.heads == 1 ? head_outputs[0] : nn::concat_cols(head_outputs);
    return nn::matmul(concat, params.wo);
}

nn::Tensor global_attention(const nn::Tensor& x, const AttentionParams& params,
                            std::vector<std::vector<double>>* attn_out) {
    if (x.rows() == 0) throw NumericError("global_attention: empty input");
    if (!nn::all_finite(x)) throw NumericError("global_attention: non-finite input");
    return multihead_attention(x, x, params, nullptr, attn_out);
}

nn::Tensor graph_attention(const nn::Tensor& pooled, const ComponentMask& mask,
                           const AttentionParams& params,
                           std::vector<std::vector<double>>* attn_out) {
    if (mask.size != pooled.rows()) throw NumericError("graph_attention: mask size mismatch");
    return multihead_attention(pooled, pooled, params, &mask.entries, attn_out);
}

nn::Tensor pool_components(const nn::Tensor& x, const std::vector<Span>& spans) {
    return nn::pool_spans(x, spans);
}

nn::Tensor gather_combine(const nn::Tensor& components, const nn::Tensor& x,
                          const std::vector<Span>& spans) {
    return nn::add(x, nn::broadcast_spans(components, spans, x.rows()));
}

}  // namespace kgxrec::attn
