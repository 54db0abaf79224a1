#include "kgxrec/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kgxrec/beam.hpp"
#include "kgxrec/error.hpp"
#include "kgxrec/vocab.hpp"

namespace kgxrec {

void ModelConfig::validate() const {
    if (d == 0 || heads == 0 || d % heads != 0)
        throw ConfigError("model: embedding size must be a positive multiple of heads");
    if (vocab_size == 0) throw ConfigError("model: vocabulary size not set");
    if (lambda_r < 0.0 || lambda_e < 0.0) throw ConfigError("model: lambda weights must be >= 0");
    if (max_explanation_len == 0 || max_input_len == 0)
        throw ConfigError("model: sequence length caps must be positive");
}

namespace {

LayerNormParams make_layer_norm(size_t d) {
    return LayerNormParams{nn::Tensor::full(1, d, 1.0, true), nn::Tensor::zeros(1, d, true)};
}

FeedForward make_ffn(size_t d, size_t hidden, double std, nn::Rng& rng) {
    FeedForward f;
    f.w1 = nn::Tensor::randn(d, hidden, std, rng);
    f.b1 = nn::Tensor::zeros(1, hidden, true);
    f.w2 = nn::Tensor::randn(hidden, d, std, rng);
    f.b2 = nn::Tensor::zeros(1, d, true);
    return f;
}

nn::Tensor apply_ffn(const FeedForward& f, const nn::Tensor& x) {
    nn::Tensor h = nn::gelu(nn::add_rowvec(nn::matmul(x, f.w1), f.b1));
    return nn::add_rowvec(nn::matmul(h, f.w2), f.b2);
}

nn::Tensor apply_ln(const LayerNormParams& ln, const nn::Tensor& x) {
    return nn::layer_norm(x, ln.gain, ln.bias);
}

std::vector<double> causal_mask(size_t n) {
    std::vector<double> m(n * n, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) m[i * n + j] = attn::kMaskNegInf;
    return m;
}

std::vector<int32_t> iota_ids(size_t n) {
    std::vector<int32_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
}

void push_attention(std::vector<std::pair<std::string, nn::Tensor>>& out, const std::string& prefix,
                    const attn::AttentionParams& p) {
    out.emplace_back(prefix + ".wq", p.wq);
    out.emplace_back(prefix + ".wk", p.wk);
    out.emplace_back(prefix + ".wv", p.wv);
    out.emplace_back(prefix + ".wo", p.wo);
}

void push_ln(std::vector<std::pair<std::string, nn::Tensor>>& out, const std::string& prefix,
             const LayerNormParams& ln) {
    out.emplace_back(prefix + ".gain", ln.gain);
    out.emplace_back(prefix + ".bias", ln.bias);
}

void push_ffn(std::vector<std::pair<std::string, nn::Tensor>>& out, const std::string& prefix,
              const FeedForward& f) {
    out.emplace_back(prefix + ".w1", f.w1);
    out.emplace_back(prefix + ".b1", f.b1);
    out.emplace_back(prefix + ".w2", f.w2);
    out.emplace_back(prefix + ".b2", f.b2);
}

}  // namespace

Model::Model(ModelConfig cfg, uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    nn::Rng rng(seed);
    const size_t d = cfg_.d;
    const double std = cfg_.init_std;
    const size_t hidden = cfg_.resolved_ffn_hidden();

    tok_embed_ = nn::Tensor::randn(cfg_.vocab_size, d, std, rng);
    pos_enc_ = nn::Tensor::randn(cfg_.max_input_len, d, std, rng);
    pos_dec_ = nn::Tensor::randn(cfg_.max_explanation_len + 1, d, std, rng);

    for (size_t l = 0; l < cfg_.encoder_layers; ++l) {
        EncoderLayerParams layer;
        layer.global = attn::make_attention_params(d, cfg_.heads, std, rng);
        layer.ln_attn = make_layer_norm(d);
        layer.ln_ffn = make_layer_norm(d);
        layer.ffn = make_ffn(d, hidden, std, rng);
        layer.graph = attn::make_attention_params(d, cfg_.heads, std, rng);
        enc_layers_.push_back(std::move(layer));
    }

    rating_wu_ = nn::Tensor::randn(d, d, std, rng);
    rating_wv_ = nn::Tensor::randn(d, d, std, rng);
    enc2dec_w_ = nn::Tensor::randn(d, d, std, rng);
    enc2dec_b_ = nn::Tensor::zeros(1, d, true);

    for (size_t l = 0; l < cfg_.decoder_layers; ++l) {
        DecoderLayerParams layer;
        layer.self_attn = attn::make_attention_params(d, cfg_.heads, std, rng);
        layer.cross_attn = attn::make_attention_params(d, cfg_.heads, std, rng);
        layer.ln_self = make_layer_norm(d);
        layer.ln_cross = make_layer_norm(d);
        layer.ln_ffn = make_layer_norm(d);
        layer.ffn = make_ffn(d, hidden, std, rng);
        dec_layers_.push_back(std::move(layer));
    }

    final_ln_ = make_layer_norm(d);
    out_w_ = nn::Tensor::randn(d, cfg_.vocab_size, std, rng);
    out_b_ = nn::Tensor::zeros(1, cfg_.vocab_size, true);
}

std::vector<std::pair<std::string, nn::Tensor>> Model::named_parameters() const {
    std::vector<std::pair<std::string, nn::Tensor>> out;
    out.emplace_back("tok_embed", tok_embed_);
    out.emplace_back("pos_enc", pos_enc_);
    out.emplace_back("pos_dec", pos_dec_);
    for (size_t l = 0; l < enc_layers_.size(); ++l) {
        const std::string p = "enc." + std::to_string(l);
        push_attention(out, p + ".global", enc_layers_[l].global);
        push_ln(out, p + ".ln_attn", enc_layers_[l].ln_attn);
        push_ln(out, p + ".ln_ffn", enc_layers_[l].ln_ffn);
        push_ffn(out, p + ".ffn", enc_layers_[l].ffn);
        push_attention(out, p + ".graph", enc_layers_[l].graph);
    }
    out.emplace_back("rating.wu", rating_wu_);
    out.emplace_back("rating.wv", rating_wv_);
    out.emplace_back("enc2dec.w", enc2dec_w_);
    out.emplace_back("enc2dec.b", enc2dec_b_);
    for (size_t l = 0; l < dec_layers_.size(); ++l) {
        const std::string p = "dec." + std::to_string(l);
        push_attention(out, p + ".self", dec_layers_[l].self_attn);
        push_attention(out, p + ".cross", dec_layers_[l].cross_attn);
        push_ln(out, p + ".ln_self", dec_layers_[l].ln_self);
        push_ln(out, p + ".ln_cross", dec_layers_[l].ln_cross);
        push_ln(out, p + ".ln_ffn", dec_layers_[l].ln_ffn);
        push_ffn(out, p + ".ffn", dec_layers_[l].ffn);
    }
    push_ln(out, "final_ln", final_ln_);
    out.emplace_back("out.w", out_w_);
    out.emplace_back("out.b", out_b_);
    return out;
}

std::vector<nn::Tensor> Model::parameters() const {
    std::vector<nn::Tensor> out;
    for (auto& [name, t] : named_parameters()) out.push_back(t);
    return out;
}

size_t Model::parameter_count() const {
    size_t n = 0;
    for (const auto& t : parameters()) n += t.size();
    return n;
}

nn::Tensor Model::embed(const std::vector<int32_t>& ids) const {
    if (ids.empty()) throw DataError("embed: empty token sequence");
    if (ids.size() > cfg_.max_input_len)
        throw DataError("embed: sequence longer than max_input_len");
    nn::Tensor tok = nn::embedding_rows(tok_embed_, ids);
    nn::Tensor pos = nn::embedding_rows(pos_enc_, iota_ids(ids.size()));
    return nn::add(tok, pos);
}

EncodedState Model::encode(const EncodedSequence& seq) const {
    nn::Tensor x = embed(seq.token_ids);
    const attn::ComponentMask mask = attn::mask_from_adjacency(seq.adjacency, seq.num_components());
    for (const EncoderLayerParams& layer : enc_layers_) {
        // Global branch: pre-norm transformer block over tokens.
        nn::Tensor attn_out = attn::global_attention(apply_ln(layer.ln_attn, x), layer.global);
        nn::Tensor x1 = nn::add(x, attn_out);
        nn::Tensor x_global = nn::add(x1, apply_ffn(layer.ffn, apply_ln(layer.ln_ffn, x1)));
        // Graph branch: pool the layer input, run masked component attention,
        // gather back over the tokens.
        nn::Tensor pooled = attn::pool_components(x, seq.spans);
        nn::Tensor comp = attn::graph_attention(pooled, mask, layer.graph);
        x = attn::gather_combine(comp, x_global, seq.spans);
    }
    return EncodedState{x, &seq};
}

nn::Tensor Model::predict_rating(const EncodedState& state) const {
    const EncodedSequence& seq = *state.seq;
    nn::Tensor user_vec = nn::matmul(nn::masked_mean_rows(state.x, seq.user_mask), rating_wu_);
    nn::Tensor item_vec = nn::matmul(nn::masked_mean_rows(state.x, seq.item_mask), rating_wv_);
    return nn::dot_rows(user_vec, item_vec);
}

nn::Tensor Model::decode_stack(const nn::Tensor& enc_hidden, const std::vector<int32_t>& input) const {
    if (input.empty()) throw DataError("decoder: empty input");
    if (input.size() > cfg_.max_explanation_len + 1)
        throw DataError("decoder: input longer than max_explanation_len + 1");
    nn::Tensor y = nn::add(nn::embedding_rows(tok_embed_, input),
                           nn::embedding_rows(pos_dec_, iota_ids(input.size())));
    const std::vector<double> causal = causal_mask(input.size());
    for (const DecoderLayerParams& layer : dec_layers_) {
        nn::Tensor y_norm = apply_ln(layer.ln_self, y);
        nn::Tensor self_out = attn::multihead_attention(y_norm, y_norm, layer.self_attn, &causal);
        y = nn::add(y, self_out);
        nn::Tensor cross_out =
            attn::multihead_attention(apply_ln(layer.ln_cross, y), enc_hidden, layer.cross_attn);
        y = nn::add(y, cross_out);
        y = nn::add(y, apply_ffn(layer.ffn, apply_ln(layer.ln_ffn, y)));
    }
    return apply_ln(final_ln_, y);
}

nn::Tensor Model::decoder_logits(const EncodedState& state, const std::vector<int32_t>& decoder_input) const {
    nn::Tensor enc_hidden = nn::add_rowvec(nn::matmul(state.x, enc2dec_w_), enc2dec_b_);
    nn::Tensor y = decode_stack(enc_hidden, decoder_input);
    return nn::add_rowvec(nn::matmul(y, out_w_), out_b_);
}

Model::SampleLoss Model::sample_loss(const EncodedSequence& seq, double rating,
                                     const std::vector<int32_t>& expl_ids) const {
    if (expl_ids.empty()) throw DataError("sample_loss: empty explanation");
    EncodedState state = encode(seq);

    nn::Tensor r_hat = predict_rating(state);
    nn::Tensor diff = nn::sub(r_hat, nn::Tensor::full(1, 1, rating));
    nn::Tensor rating_loss = nn::mul(diff, diff);

    std::vector<int32_t> dec_input;
    dec_input.reserve(expl_ids.size() + 1);
    dec_input.push_back(Vocabulary::kBos);
    dec_input.insert(dec_input.end(), expl_ids.begin(), expl_ids.end());
    std::vector<int32_t> targets(expl_ids.begin(), expl_ids.end());
    targets.push_back(Vocabulary::kEos);

    nn::Tensor logp = nn::log_softmax_rows(decoder_logits(state, dec_input));
    nn::Tensor picked = nn::gather_cols(logp, targets);
    nn::Tensor expl_loss = nn::scale(nn::mean_all(picked), -1.0);

    nn::Tensor total =
        nn::add(nn::scale(rating_loss, cfg_.lambda_r), nn::scale(expl_loss, cfg_.lambda_e));
    SampleLoss out;
    out.loss = total;
    out.rating_sq = rating_loss.scalar();
    out.expl_nll = expl_loss.scalar();
    out.rating_pred = r_hat.scalar();
    return out;
}

std::vector<int32_t> Model::generate(const EncodedSequence& seq, size_t beam_size, size_t max_len) const {
    return decode_beam(encode(seq), beam_size, max_len);
}

std::vector<int32_t> Model::decode_beam(const EncodedState& state, size_t beam_size,
                                        size_t max_len) const {
    if (max_len == 0) max_len = cfg_.max_explanation_len;
    max_len = std::min(max_len, cfg_.max_explanation_len);
    nn::Tensor enc_hidden = nn::add_rowvec(nn::matmul(state.x, enc2dec_w_), enc2dec_b_);

    StepFn step = [&](const std::vector<int32_t>& prefix) {
        std::vector<int32_t> input;
        input.reserve(prefix.size() + 1);
        input.push_back(Vocabulary::kBos);
        input.insert(input.end(), prefix.begin(), prefix.end());
        nn::Tensor y = decode_stack(enc_hidden, input);
        nn::Tensor logits = nn::add_rowvec(nn::matmul(y, out_w_), out_b_);
        nn::Tensor logp = nn::log_softmax_rows(logits);
        const size_t last = input.size() - 1;
        const double* row = logp.value().data() + last * cfg_.vocab_size;
        return std::vector<double>(row, row + cfg_.vocab_size);
    };
    return beam_search(step, cfg_.vocab_size, beam_size, max_len, Vocabulary::kEos);
}

double Model::rate(const EncodedSequence& seq) const {
    EncodedState state = encode(seq);
    return predict_rating(state).scalar();
}

RatedExplanation Model::rate_and_explain(const EncodedSequence& seq, size_t beam_size) const {
    EncodedState state = encode(seq);
    RatedExplanation out;
    out.rating = predict_rating(state).scalar();
    out.explanation = decode_beam(state, beam_size, 0);
    return out;
}

double clamp_rating(double r) { return std::min(5.0, std::max(1.0, r)); }

}  // namespace kgxrec
