#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kgxrec/attention.hpp"
#include "kgxrec/encode.hpp"
#include "kgxrec/tensor.hpp"

namespace kgxrec {

// Desk-scale defaults; full-scale values (d=512 etc.) stay reachable through
// the config file.
struct ModelConfig {
    size_t d = 64;
    size_t encoder_layers = 2;
    size_t decoder_layers = 2;
    size_t heads = 4;
    size_t ffn_hidden = 0;  // 0 -> 4*d
    size_t vocab_size = 0;  // set from the built vocabulary
    size_t max_explanation_len = 128;
    size_t max_input_len = 512;
    double lambda_r = 0.01;
    double lambda_e = 1.0;
    double init_std = 0.02;

    size_t resolved_ffn_hidden() const { return ffn_hidden == 0 ? 4 * d : ffn_hidden; }
    void validate() const;
};

struct LayerNormParams {
    nn::Tensor gain, bias;  // 1 x d each
};

struct FeedForward {
    nn::Tensor w1, b1, w2, b2;
};

// One encoder layer: a pre-norm transformer block on the token stream (global
// attention) running in parallel with a masked attention kernel on the pooled
// components; the component output is gathered back and added to the token
// stream.
struct EncoderLayerParams {
    attn::AttentionParams global;
    LayerNormParams ln_attn, ln_ffn;
    FeedForward ffn;
    attn::AttentionParams graph;
};

struct DecoderLayerParams {
    attn::AttentionParams self_attn;
    attn::AttentionParams cross_attn;
    LayerNormParams ln_self, ln_cross, ln_ffn;
    FeedForward ffn;
};

struct EncodedState {
    nn::Tensor x;                 // n x d final encoder output
    const EncodedSequence* seq = nullptr;
};

// Joint output for one user-item pair.
struct RatedExplanation {
    double rating = 0.0;               // raw prediction; clamp for reporting
    std::vector<int32_t> explanation;  // token ids, <= max_explanation_len, eos stripped
};

class Model {
public:
    Model(ModelConfig cfg, uint64_t seed);

    const ModelConfig& config() const { return cfg_; }

    // Stable-ordered parameter registry; drives the optimizer, the gradient
    // check, and checkpoint serialization.
    std::vector<std::pair<std::string, nn::Tensor>> named_parameters() const;
    std::vector<nn::Tensor> parameters() const;
    size_t parameter_count() const;

    // Token embedding plus learned absolute positions.
    nn::Tensor embed(const std::vector<int32_t>& ids) const;

    EncodedState encode(const EncodedSequence& seq) const;

    nn::Tensor predict_rating(const EncodedState& state) const;  // 1x1, unclamped

    // Teacher-forced decoder logits (T x vocab) for <bos>-shifted input ids.
    nn::Tensor decoder_logits(const EncodedState& state, const std::vector<int32_t>& decoder_input) const;

    struct SampleLoss {
        nn::Tensor loss;      // lambda_r * (r - r_hat)^2 + lambda_e * mean token NLL
        double rating_sq = 0.0;
        double expl_nll = 0.0;
        double rating_pred = 0.0;
    };
    SampleLoss sample_loss(const EncodedSequence& seq, double rating,
                           const std::vector<int32_t>& expl_ids) const;

    // Length-normalized beam search over the decoder; deterministic given
    // parameters and input.
    std::vector<int32_t> generate(const EncodedSequence& seq, size_t beam_size,
                                  size_t max_len = 0) const;

    double rate(const EncodedSequence& seq) const;  // forward-only, unclamped

    // One encoder pass feeding both heads.
    RatedExplanation rate_and_explain(const EncodedSequence& seq, size_t beam_size) const;

    // Direct access for tests that rig specific weights.
    nn::Tensor& token_embedding() { return tok_embed_; }
    std::vector<EncoderLayerParams>& encoder_layers() { return enc_layers_; }
    std::vector<DecoderLayerParams>& decoder_layers() { return dec_layers_; }
    nn::Tensor& rating_user_proj() { return rating_wu_; }
    nn::Tensor& rating_item_proj() { return rating_wv_; }
    nn::Tensor& output_proj() { return out_w_; }
    nn::Tensor& output_bias() { return out_b_; }

private:
    ModelConfig cfg_;
    nn::Tensor tok_embed_;  // vocab x d
    nn::Tensor pos_enc_;    // max_input_len x d
    nn::Tensor pos_dec_;    // (max_explanation_len + 1) x d
    std::vector<EncoderLayerParams> enc_layers_;
    nn::Tensor rating_wu_, rating_wv_;  // d x d
    nn::Tensor enc2dec_w_, enc2dec_b_;  // d x d, 1 x d
    std::vector<DecoderLayerParams> dec_layers_;
    LayerNormParams final_ln_;
    nn::Tensor out_w_, out_b_;  // d x vocab, 1 x vocab

    nn::Tensor decode_stack(const nn::Tensor& enc_hidden, const std::vector<int32_t>& decoder_input) const;
    std::vector<int32_t> decode_beam(const EncodedState& state, size_t beam_size, size_t max_len) const;
};

// Evaluation-time clamp; training always uses the raw prediction.
double clamp_rating(double r);

}  // namespace kgxrec
