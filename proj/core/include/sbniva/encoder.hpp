#pragma once

#include <map>
#include <span>
#include <vector>

#include "sbniva/autodiff.hpp"
#include "sbniva/embedding.hpp"
#include "sbniva/keyframes.hpp"

namespace sbniva {

struct EncoderConfig {
    std::size_t hidden_dim = 64;  // per direction; sentence vectors are 2x this
    std::size_t attn_dim = 0;     // 0 -> 2 * hidden_dim
    std::size_t max_tokens = 50;  // comments are truncated beyond this

    std::size_t attention_dim() const { return attn_dim == 0 ? 2 * hidden_dim : attn_dim; }
};

// One direction of the LSTM: gate weights over the input (d_h x d_in),
// recurrent weights (d_h x d_h) and biases (d_h x 1), for the input, forget,
// output and candidate gates.
struct LstmDirParams {
    Mat w_i, w_f, w_o, w_c;
    Mat u_i, u_f, u_o, u_c;
    Mat b_i, b_f, b_o, b_c;
};

struct EncoderParams {
    LstmDirParams fwd, bwd;
    Mat attn_w;  // attention_dim x 2*hidden_dim
    Mat attn_u;  // attention_dim x 1 context vector
    std::size_t hidden_dim() const { return fwd.w_i.rows; }
};

struct ModelParams {
    EmbeddingMatrix embedding;
    EncoderParams encoder;
};

// Xavier-uniform matrices, zero biases, forget-gate bias +1.
EncoderParams init_encoder_params(std::size_t emb_dim, const EncoderConfig& cfg, Rng& rng);

// Canonical tensor enumeration; the order here fixes the optimizer update
// order and the checkpoint key list.
template <class Params, class Fn>
void for_each_encoder_tensor(Params& p, Fn&& fn) {
    fn("lstm_fwd.w_i", p.fwd.w_i);
    fn("lstm_fwd.w_f", p.fwd.w_f);
    fn("lstm_fwd.w_o", p.fwd.w_o);
    fn("lstm_fwd.w_c", p.fwd.w_c);
    fn("lstm_fwd.u_i", p.fwd.u_i);
    fn("lstm_fwd.u_f", p.fwd.u_f);
    fn("lstm_fwd.u_o", p.fwd.u_o);
    fn("lstm_fwd.u_c", p.fwd.u_c);
    fn("lstm_fwd.b_i", p.fwd.b_i);
    fn("lstm_fwd.b_f", p.fwd.b_f);
    fn("lstm_fwd.b_o", p.fwd.b_o);
    fn("lstm_fwd.b_c", p.fwd.b_c);
    fn("lstm_bwd.w_i", p.bwd.w_i);
    fn("lstm_bwd.w_f", p.bwd.w_f);
    fn("lstm_bwd.w_o", p.bwd.w_o);
    fn("lstm_bwd.w_c", p.bwd.w_c);
    fn("lstm_bwd.u_i", p.bwd.u_i);
    fn("lstm_bwd.u_f", p.bwd.u_f);
    fn("lstm_bwd.u_o", p.bwd.u_o);
    fn("lstm_bwd.u_c", p.bwd.u_c);
    fn("lstm_bwd.b_i", p.bwd.b_i);
    fn("lstm_bwd.b_f", p.bwd.b_f);
    fn("lstm_bwd.b_o", p.bwd.b_o);
    fn("lstm_bwd.b_c", p.bwd.b_c);
    fn("attn.w", p.attn_w);
    fn("attn.u", p.attn_u);
}

template <class Params, class Fn>
void for_each_model_tensor(Params& m, bool include_embedding, Fn&& fn) {
    if (include_embedding) fn("embedding", m.embedding.weights);
    for_each_encoder_tensor(m.encoder, fn);
}

// Parameter leaves of one tape. Create one binding per forward/backward pass;
// embedding rows are bound lazily and cached per token id.
class ModelBinding {
  public:
    struct LstmLeaves {
        ad::Value w_i, w_f, w_o, w_c, u_i, u_f, u_o, u_c, b_i, b_f, b_o, b_c;
    };

    ModelBinding(ad::Tape& tape, const ModelParams& params, bool trainable,
                 bool train_embeddings);

    ad::Value embed(int token_id);
    const LstmLeaves& fwd() const { return fwd_; }
    const LstmLeaves& bwd() const { return bwd_; }
    const ad::Value& attn_w() const { return attn_w_; }
    const ad::Value& attn_u() const { return attn_u_; }
    ad::Tape& tape() const { return *tape_; }
    bool trainable() const { return trainable_; }

    // After Tape::backward: add the leaves' gradients into a gradient store
    // shaped like ModelParams (embedding rows only if train_embeddings).
    void accumulate_grads(ModelParams& grads) const;

  private:
    ad::Tape* tape_;
    const ModelParams* params_;
    bool trainable_;
    bool train_embeddings_;
    LstmLeaves fwd_, bwd_;
    ad::Value attn_w_, attn_u_;
    std::map<int, ad::Value> emb_cache_;
};

struct EncodeResult {
    ad::Value sentence;                  // 2 * hidden_dim
    ad::Value word_weights;              // attention distribution over tokens
    std::vector<ad::Value> states;       // per-token concatenated hidden states
};

struct AttentionPooled {
    ad::Value pooled;
    ad::Value weights;
};

// Softmax attention over hidden states with context vector u:
// score_k = tanh(W h_k) . u, output = sum_k softmax(score)_k h_k.
AttentionPooled attention_pool(std::span<const ad::Value> states, const ad::Value& attn_w,
                               const ad::Value& attn_u);

// Full word-level encoder: embeds tokens, runs both LSTM directions from zero
// initial states, concatenates per-token states and attention-pools them.
EncodeResult encode(std::span<const int> token_ids, ModelBinding& binding,
                    const EncoderConfig& cfg);

// Arithmetic mean of already-encoded sentence vectors.
ad::Value mean_vectors(std::span<const ad::Value> vectors);

// Mean sentence vector over a keyframe's member comments.
ad::Value encode_keyframe(const Keyframe& kf,
                          const std::vector<std::vector<int>>& video_token_ids,
                          ModelBinding& binding, const EncoderConfig& cfg);

// Zeroed ModelParams-shaped gradient accumulator (embedding included only
// when it is trainable).
ModelParams make_grad_store(const ModelParams& like, bool include_embedding);
void zero_grad_store(ModelParams& store, bool include_embedding);

}  // namespace sbniva
