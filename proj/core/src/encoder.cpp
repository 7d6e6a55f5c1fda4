#include "sbniva/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace sbniva {

namespace {

Mat xavier(std::size_t rows, std::size_t cols, Rng& rng) {
    Mat m(rows, cols);
    double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (double& v : m.data) v = uniform_real(rng, -limit, limit);
    return m;
}

LstmDirParams init_direction(std::size_t d_in, std::size_t d_h, Rng& rng) {
    LstmDirParams p;
    p.w_i = xavier(d_h, d_in, rng);
    p.w_f = xavier(d_h, d_in, rng);
    p.w_o = xavier(d_h, d_in, rng);
    p.w_c = xavier(d_h, d_in, rng);
    p.u_i = xavier(d_h, d_h, rng);
    p.u_f = xavier(d_h, d_h, rng);
    p.u_o = xavier(d_h, d_h, rng);
    p.u_c = xavier(d_h, d_h, rng);
    p.b_i = Mat(d_h, 1, 0.0);
    p.b_f = Mat(d_h, 1, 1.0);  // forget gate open at init
    p.b_o = Mat(d_h, 1, 0.0);
    p.b_c = Mat(d_h, 1, 0.0);
    return p;
}

}  // namespace

EncoderParams init_encoder_params(std::size_t emb_dim, const EncoderConfig& cfg, Rng& rng) {
    EncoderParams p;
    p.fwd = init_direction(emb_dim, cfg.hidden_dim, rng);
    p.bwd = init_direction(emb_dim, cfg.hidden_dim, rng);
    p.attn_w = xavier(cfg.attention_dim(), 2 * cfg.hidden_dim, rng);
    p.attn_u = xavier(cfg.attention_dim(), 1, rng);
    return p;
}

ModelBinding::ModelBinding(ad::Tape& tape, const ModelParams& params, bool trainable,
                           bool train_embeddings)
    : tape_(&tape),
      params_(&params),
      trainable_(trainable),
      train_embeddings_(trainable && train_embeddings) {
    auto bind_dir = [&](const LstmDirParams& d) {
        LstmLeaves l;
        l.w_i = tape.matrix(d.w_i, trainable);
        l.w_f = tape.matrix(d.w_f, trainable);
        l.w_o = tape.matrix(d.w_o, trainable);
        l.w_c = tape.matrix(d.w_c, trainable);
        l.u_i = tape.matrix(d.u_i, trainable);
        l.u_f = tape.matrix(d.u_f, trainable);
        l.u_o = tape.matrix(d.u_o, trainable);
        l.u_c = tape.matrix(d.u_c, trainable);
        l.b_i = tape.matrix(d.b_i, trainable);
        l.b_f = tape.matrix(d.b_f, trainable);
        l.b_o = tape.matrix(d.b_o, trainable);
        l.b_c = tape.matrix(d.b_c, trainable);
        return l;
    };
    fwd_ = bind_dir(params.encoder.fwd);
    bwd_ = bind_dir(params.encoder.bwd);
    attn_w_ = tape.matrix(params.encoder.attn_w, trainable);
    attn_u_ = tape.matrix(params.encoder.attn_u, trainable);
}

ad::Value ModelBinding::embed(int token_id) {
    auto it = emb_cache_.find(token_id);
    if (it != emb_cache_.end()) return it->second;
    auto row = params_->embedding.row(token_id);
    ad::Value v = tape_->vector(row, train_embeddings_);
    emb_cache_.emplace(token_id, v);
    return v;
}

namespace {

void add_grad(const ad::Value& leaf, Mat& target) {
    const Vec& g = leaf.grad();
    if (g.empty()) return;
    for (std::size_t i = 0; i < g.size(); ++i) target.data[i] += g[i];
}

}  // namespace

void ModelBinding::accumulate_grads(ModelParams& grads) const {
    auto dir = [&](const LstmLeaves& l, LstmDirParams& g) {
        add_grad(l.w_i, g.w_i);
        add_grad(l.w_f, g.w_f);
        add_grad(l.w_o, g.w_o);
        add_grad(l.w_c, g.w_c);
        add_grad(l.u_i, g.u_i);
        add_grad(l.u_f, g.u_f);
        add_grad(l.u_o, g.u_o);
        add_grad(l.u_c, g.u_c);
        add_grad(l.b_i, g.b_i);
        add_grad(l.b_f, g.b_f);
        add_grad(l.b_o, g.b_o);
        add_grad(l.b_c, g.b_c);
    };
    dir(fwd_, grads.encoder.fwd);
    dir(bwd_, grads.encoder.bwd);
    add_grad(attn_w_, grads.encoder.attn_w);
    add_grad(attn_u_, grads.encoder.attn_u);

    if (train_embeddings_ && grads.embedding.weights.rows > 0) {
        // std::map keeps this iteration order (and so the accumulation order)
        // independent of lookup order.
        for (const auto& [id, leaf] : emb_cache_) {
            const Vec& g = leaf.grad();
            if (g.empty()) continue;
            double* row = grads.embedding.weights.data.data() +
                          static_cast<std::size_t>(id) * grads.embedding.weights.cols;
            for (std::size_t k = 0; k < g.size(); ++k) row[k] += g[k];
        }
    }
}

AttentionPooled attention_pool(std::span<const ad::Value> states, const ad::Value& attn_w,
                               const ad::Value& attn_u) {
    if (states.empty()) throw std::invalid_argument("attention_pool: no states");
    std::vector<ad::Value> scores;
    scores.reserve(states.size());
    for (const auto& h : states)
        scores.push_back(ad::dot(ad::tanh(ad::matvec(attn_w, h)), attn_u));
    ad::Value weights = ad::softmax(ad::stack(scores));
    ad::Value pooled = ad::weighted_sum(weights, states);
    return {pooled, weights};
}

namespace {

ad::Value lstm_gate(const ad::Value& w, const ad::Value& u, const ad::Value& b,
                    const ad::Value& x, const ad::Value& h_prev) {
    return ad::add(ad::add(ad::matvec(w, x), ad::matvec(u, h_prev)), b);
}

// One LSTM step; returns (h, c).
std::pair<ad::Value, ad::Value> lstm_step(const ModelBinding::LstmLeaves& p, const ad::Value& x,
                                          const ad::Value& h_prev, const ad::Value& c_prev) {
    ad::Value i = ad::sigmoid(lstm_gate(p.w_i, p.u_i, p.b_i, x, h_prev));
    ad::Value f = ad::sigmoid(lstm_gate(p.w_f, p.u_f, p.b_f, x, h_prev));
    ad::Value o = ad::sigmoid(lstm_gate(p.w_o, p.u_o, p.b_o, x, h_prev));
    ad::Value g = ad::tanh(lstm_gate(p.w_c, p.u_c, p.b_c, x, h_prev));
    ad::Value c = ad::add(ad::mul(f, c_prev), ad::mul(i, g));
    ad::Value h = ad::mul(o, ad::tanh(c));
    return {h, c};
}

}  // namespace

EncodeResult encode(std::span<const int> token_ids, ModelBinding& binding,
                    const EncoderConfig& cfg) {
    if (token_ids.empty()) throw std::invalid_argument("encode: empty token list");
    std::size_t n = std::min(token_ids.size(), cfg.max_tokens);
    ad::Tape& tape = binding.tape();

    std::vector<ad::Value> inputs;
    inputs.reserve(n);
    for (std::size_t k = 0; k < n; ++k) inputs.push_back(binding.embed(token_ids[k]));

    std::size_t d_h = binding.fwd().u_i.rows();
    ad::Value h0 = tape.zeros(d_h);
    ad::Value c0 = tape.zeros(d_h);

    std::vector<ad::Value> forward(n), backward(n);
    {
        ad::Value h = h0, c = c0;
        for (std::size_t k = 0; k < n; ++k) {
            auto [nh, nc] = lstm_step(binding.fwd(), inputs[k], h, c);
            forward[k] = nh;
            h = nh;
            c = nc;
        }
    }
    {
        ad::Value h = h0, c = c0;
        for (std::size_t k = n; k-- > 0;) {
            auto [nh, nc] = lstm_step(binding.bwd(), inputs[k], h, c);
            backward[k] = nh;
            h = nh;
            c = nc;
        }
    }

    EncodeResult result;
    result.states.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
        result.states.push_back(ad::concat(forward[k], backward[k]));
    auto pooled = attention_pool(result.states, binding.attn_w(), binding.attn_u());
    result.sentence = pooled.pooled;
    result.word_weights = pooled.weights;
    return result;
}

ad::Value mean_vectors(std::span<const ad::Value> vectors) {
    if (vectors.empty()) throw std::invalid_argument("mean_vectors: empty input");
    ad::Value acc = vectors[0];
    for (std::size_t i = 1; i < vectors.size(); ++i) acc = ad::add(acc, vectors[i]);
    return ad::scale(acc, 1.0 / static_cast<double>(vectors.size()));
}

ad::Value encode_keyframe(const Keyframe& kf,
                          const std::vector<std::vector<int>>& video_token_ids,
                          ModelBinding& binding, const EncoderConfig& cfg) {
    if (kf.member_indices.empty()) throw std::invalid_argument("encode_keyframe: empty keyframe");
    std::vector<ad::Value> members;
    members.reserve(kf.member_indices.size());
    for (std::size_t idx : kf.member_indices)
        members.push_back(encode(video_token_ids.at(idx), binding, cfg).sentence);
    return mean_vectors(members);
}

ModelParams make_grad_store(const ModelParams& like, bool include_embedding) {
    ModelParams store;
    if (include_embedding)
        store.embedding.weights =
            Mat(like.embedding.weights.rows, like.embedding.weights.cols, 0.0);
    store.encoder = like.encoder;
    zero_grad_store(store, include_embedding);
    return store;
}

void zero_grad_store(ModelParams& store, bool include_embedding) {
    if (include_embedding)
        std::fill(store.embedding.weights.data.begin(), store.embedding.weights.data.end(), 0.0);
    for_each_encoder_tensor(store.encoder, []([[maybe_unused]] std::string_view name, Mat& m) {
        std::fill(m.data.begin(), m.data.end(), 0.0);
    });
}

}  // namespace sbniva
