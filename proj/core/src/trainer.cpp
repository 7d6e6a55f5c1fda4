#include "sbniva/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <stdexcept>

#include "sbniva/evaluator.hpp"

namespace sbniva {

SbnConfig TrainConfig::sbn() const {
    SbnConfig c;
    c.use_iva = use_iva;
    c.use_decay = use_decay;
    c.beta = beta;
    c.decay_exponent_sign = decay_exponent_sign;
    c.renormalize_iva = renormalize_iva;
    return c;
}

EncoderConfig TrainConfig::encoder() const {
    EncoderConfig c;
    c.hidden_dim = hidden_dim;
    c.max_tokens = max_tokens;
    return c;
}

void TrainConfig::validate() const {
    if (lr <= 0.0) throw ValidationError("config: lr must be > 0");
    if (r < 1) throw ValidationError("config: r must be >= 1");
    if (p < 1) throw ValidationError("config: p must be >= 1");
    if (use_iva && r < 2) throw ValidationError("config: variance attention requires r >= 2");
    if (batch_size < 1) throw ValidationError("config: batch_size must be >= 1");
    if (frame_len <= 0.0) throw ValidationError("config: frame_len must be > 0");
    if (beta < 0.0) throw ValidationError("config: beta must be >= 0");
    if (hidden_dim < 1) throw ValidationError("config: hidden_dim must be >= 1");
    if (threshold < 0.0 || threshold > 1.0) throw ValidationError("config: threshold in [0,1]");
    if (decay_exponent_sign != -1 && decay_exponent_sign != 1)
        throw ValidationError("config: decay_exponent_sign must be -1 or +1");
}

std::vector<std::string> Dataset::example_video_ids() const {
    std::vector<std::string> ids;
    ids.reserve(examples.size());
    for (const auto& e : examples) ids.push_back(videos[e.video].video_id);
    return ids;
}

Dataset build_dataset(const std::vector<VideoStream>& videos, const Vocabulary& vocab,
                      const TrainConfig& config,
                      const std::map<std::string, std::string>* categories) {
    config.validate();
    Dataset data;
    for (const auto& v : videos) {
        if (v.records.empty()) continue;
        std::vector<Keyframe> kfs;
        if (v.duration > 0.0) kfs = extract_keyframes(v, config.p, config.frame_len);
        if (kfs.empty()) {
            data.skipped_videos.push_back(v.video_id);
            continue;
        }
        VideoData vd;
        vd.video_id = v.video_id;
        vd.duration = v.duration;
        if (categories) {
            auto it = categories->find(v.video_id);
            if (it != categories->end()) vd.category = it->second;
        }
        vd.times.reserve(v.records.size());
        vd.labels.reserve(v.records.size());
        vd.token_ids.reserve(v.records.size());
        vd.tokens.reserve(v.records.size());
        for (const auto& rec : v.records) {
            vd.times.push_back(rec.timestamp);
            vd.labels.push_back(rec.label ? *rec.label : -1);
            vd.token_ids.push_back(vocab.ids_for(rec.tokens));
            vd.tokens.push_back(rec.tokens);
        }
        vd.keyframes = std::move(kfs);
        data.videos.push_back(std::move(vd));
    }
    for (std::size_t vi = 0; vi < data.videos.size(); ++vi) {
        const auto& vd = data.videos[vi];
        for (std::size_t ri = 1; ri < vd.labels.size(); ++ri) {
            if (vd.labels[ri] >= 0) data.examples.push_back({vi, ri});
        }
    }
    return data;
}

namespace {

// Per-video encode cache living on one tape.
struct VideoGraph {
    std::vector<std::optional<EncodeResult>> encoded;
    std::vector<ad::Value> keyframes;

    VideoGraph(const VideoData& video, ModelBinding& binding, const EncoderConfig& cfg)
        : encoded(video.token_ids.size()) {
        binding_ = &binding;
        video_ = &video;
        cfg_ = cfg;
    }

    const EncodeResult& encode_record(std::size_t idx) {
        if (!encoded[idx]) encoded[idx] = encode(video_->token_ids[idx], *binding_, cfg_);
        return *encoded[idx];
    }

    void build_keyframes() {
        if (!keyframes.empty()) return;
        for (const auto& kf : video_->keyframes) {
            std::vector<ad::Value> members;
            members.reserve(kf.member_indices.size());
            for (std::size_t idx : kf.member_indices)
                members.push_back(encode_record(idx).sentence);
            keyframes.push_back(mean_vectors(members));
        }
    }

  private:
    ModelBinding* binding_ = nullptr;
    const VideoData* video_ = nullptr;
    EncoderConfig cfg_;
};

ScoreGraphInputs make_inputs(VideoGraph& vg, const VideoData& video, std::size_t record,
                             std::size_t r) {
    ScoreGraphInputs in;
    in.target = vg.encode_record(record).sentence;
    in.target_time = video.times[record];
    for (std::size_t nb : former_neighbor_indices(record, r)) {
        in.neighbors.push_back(vg.encode_record(nb).sentence);
        in.neighbor_times.push_back(video.times[nb]);
    }
    vg.build_keyframes();
    in.keyframes = vg.keyframes;
    return in;
}

std::vector<LabeledPrediction> to_predictions(const std::vector<ScoredExample>& scored) {
    std::vector<LabeledPrediction> preds;
    preds.reserve(scored.size());
    for (const auto& s : scored)
        if (s.label >= 0) preds.push_back({s.score.probability, s.label, s.category});
    return preds;
}

}  // namespace

std::vector<ScoredExample> score_examples(const ModelParams& params, const Dataset& data,
                                          std::span<const std::size_t> example_indices,
                                          const TrainConfig& config) {
    std::vector<std::size_t> order(example_indices.begin(), example_indices.end());
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Example& ea = data.examples[a];
        const Example& eb = data.examples[b];
        if (ea.video != eb.video) return ea.video < eb.video;
        return ea.record < eb.record;
    });

    std::vector<ScoredExample> out;
    out.reserve(order.size());
    EncoderConfig ecfg = config.encoder();
    SbnConfig scfg = config.sbn();

    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t video_idx = data.examples[order[i]].video;
        const VideoData& video = data.videos[video_idx];
        ad::Tape tape;
        ModelBinding binding(tape, params, /*trainable=*/false, /*train_embeddings=*/false);
        VideoGraph vg(video, binding, ecfg);
        for (; i < order.size() && data.examples[order[i]].video == video_idx; ++i) {
            std::size_t record = data.examples[order[i]].record;
            ScoreGraphInputs in = make_inputs(vg, video, record, config.r);
            ScoreGraph g = build_score_graph(tape, in, scfg);
            ScoredExample se;
            se.video = video_idx;
            se.record = record;
            se.score = score_from_graph(g);
            se.label = video.labels[record];
            se.category = video.category;
            se.word_attention = vg.encode_record(record).word_weights.data();
            out.push_back(std::move(se));
        }
    }
    return out;
}

std::vector<ScoredExample> score_all_records(const ModelParams& params, const Dataset& data,
                                             const TrainConfig& config) {
    std::vector<ScoredExample> out;
    EncoderConfig ecfg = config.encoder();
    SbnConfig scfg = config.sbn();
    for (std::size_t vi = 0; vi < data.videos.size(); ++vi) {
        const VideoData& video = data.videos[vi];
        ad::Tape tape;
        ModelBinding binding(tape, params, false, false);
        VideoGraph vg(video, binding, ecfg);
        for (std::size_t ri = 0; ri < video.token_ids.size(); ++ri) {
            ScoreGraphInputs in = make_inputs(vg, video, ri, config.r);
            ScoreGraph g = build_score_graph(tape, in, scfg);
            ScoredExample se;
            se.video = vi;
            se.record = ri;
            se.score = score_from_graph(g);
            se.label = video.labels[ri];
            se.category = video.category;
            se.word_attention = vg.encode_record(ri).word_weights.data();
            out.push_back(std::move(se));
        }
    }
    return out;
}

void AdamOptimizer::step(ModelParams& params, const ModelParams& grads, bool include_embedding) {
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));

    std::vector<std::pair<std::string, Mat*>> ps;
    std::vector<std::pair<std::string, const Mat*>> gs;
    for_each_model_tensor(params, include_embedding,
                          [&](std::string_view name, Mat& m) { ps.emplace_back(std::string(name), &m); });
    for_each_model_tensor(const_cast<ModelParams&>(grads), include_embedding,
                          [&](std::string_view name, Mat& m) { gs.emplace_back(std::string(name), &m); });

    for (std::size_t i = 0; i < ps.size(); ++i) {
        Mat& p = *ps[i].second;
        const Mat& g = *gs[i].second;
        Moments& mom = moments_[ps[i].first];
        if (mom.m.empty()) {
            mom.m.assign(p.size(), 0.0);
            mom.v.assign(p.size(), 0.0);
        }
        for (std::size_t k = 0; k < p.size(); ++k) {
            double gk = g.data[k];
            mom.m[k] = beta1_ * mom.m[k] + (1.0 - beta1_) * gk;
            mom.v[k] = beta2_ * mom.v[k] + (1.0 - beta2_) * gk * gk;
            double mhat = mom.m[k] / bc1;
            double vhat = mom.v[k] / bc2;
            p.data[k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

namespace {

std::vector<std::vector<std::size_t>> make_batches(const Dataset& data,
                                                   std::span<const std::size_t> train_idx,
                                                   std::size_t batch_size, Rng& rng) {
    // Per-video pools; batches never span videos so per-batch encodings and
    // keyframe vectors can be shared. Batches take contiguous stream runs
    // (neighbors overlap, so most encodings are reused); a per-epoch rotation
    // offset varies batch composition and batch order is shuffled.
    std::map<std::size_t, std::vector<std::size_t>> pools;
    for (std::size_t idx : train_idx) pools[data.examples[idx].video].push_back(idx);

    std::vector<std::vector<std::size_t>> batches;
    for (auto& [vid, pool] : pools) {
        std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
            return data.examples[a].record < data.examples[b].record;
        });
        auto offset = static_cast<std::size_t>(
            uniform_int(rng, 0, static_cast<std::int64_t>(batch_size) - 1));
        offset = std::min(offset, pool.size());
        if (offset > 0) batches.emplace_back(pool.begin(), pool.begin() + offset);
        for (std::size_t start = offset; start < pool.size(); start += batch_size) {
            std::size_t end = std::min(pool.size(), start + batch_size);
            batches.emplace_back(pool.begin() + start, pool.begin() + end);
        }
    }
    for (std::size_t i = batches.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1));
        std::swap(batches[i - 1], batches[j]);
    }
    return batches;
}

}  // namespace

Checkpoint train(const Dataset& data, const DatasetSplit& split, const Vocabulary& vocab,
                 const EmbeddingMatrix& embeddings, const TrainConfig& config, bool verbose) {
    config.validate();
    if (split.train.empty()) throw ValidationError("train: empty training set");
    if (vocab.size() != embeddings.vocab_size())
        throw ValidationError("train: vocabulary and embedding matrix disagree on |V|");

    Rng init_rng(config.seed);
    ModelParams params;
    params.embedding = embeddings;
    params.encoder = init_encoder_params(embeddings.dim(), config.encoder(), init_rng);

    bool update_embeddings = !config.freeze_embeddings;
    ModelParams grads = make_grad_store(params, update_embeddings);
    AdamOptimizer adam(config.lr, config.adam_beta1, config.adam_beta2, config.adam_eps);

    EncoderConfig ecfg = config.encoder();
    SbnConfig scfg = config.sbn();

    Checkpoint best;
    best.vocab = vocab;
    best.config = config;
    best.params = params;
    best.best_epoch = 0;
    double best_f1 = -1.0;
    bool has_val = !split.validation.empty();
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        Rng epoch_rng(config.seed * 0x9e3779b97f4a7c15ULL + epoch + 1);
        auto batches = make_batches(data, split.train, config.batch_size, epoch_rng);

        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        for (const auto& batch : batches) {
            ad::Tape tape;
            ModelBinding binding(tape, params, /*trainable=*/true, update_embeddings);
            const VideoData& video = data.videos[data.examples[batch[0]].video];
            VideoGraph vg(video, binding, ecfg);

            ad::Value total;
            for (std::size_t idx : batch) {
                const Example& ex = data.examples[idx];
                ScoreGraphInputs in = make_inputs(vg, video, ex.record, config.r);
                ScoreGraph g = build_score_graph(tape, in, scfg);
                ad::Value loss = bce_loss_graph(g.probability, video.labels[ex.record]);
                total = total.valid() ? ad::add(total, loss) : loss;
            }
            ad::Value batch_loss = ad::scale(total, 1.0 / static_cast<double>(batch.size()));
            double lv = batch_loss.scalar();
            if (!std::isfinite(lv))
                throw std::runtime_error("train: loss diverged (not finite) at epoch " +
                                         std::to_string(epoch) + "; reduce the learning rate");
            loss_sum += lv * static_cast<double>(batch.size());
            loss_count += batch.size();

            tape.backward(batch_loss);
            zero_grad_store(grads, update_embeddings);
            binding.accumulate_grads(grads);
            adam.step(params, grads, update_embeddings);
        }

        EpochStats stats;
        stats.train_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
        if (has_val) {
            auto scored = score_examples(params, data, split.validation, config);
            auto preds = to_predictions(scored);
            MetricsReport report = compute_metrics(preds, config.threshold);
            stats.val_precision = report.overall.precision();
            stats.val_recall = report.overall.recall();
            stats.val_f1 = report.overall.f1();
        }
        best.history.push_back(stats);
        if (verbose) {
            std::cout << "epoch " << epoch << " loss " << stats.train_loss;
            if (has_val)
                std::cout << " val_p " << stats.val_precision << " val_r " << stats.val_recall
                          << " val_f1 " << stats.val_f1;
            std::cout << "\n";
        }

        double epoch_f1 = has_val ? stats.val_f1 : static_cast<double>(epoch);
        if (epoch_f1 > best_f1) {
            best_f1 = epoch_f1;
            best.params = params;
            best.best_epoch = epoch;
            since_best = 0;
        } else {
            ++since_best;
            if (has_val && since_best >= config.patience) break;
        }
    }
    return best;
}

BetaSweepResult sweep_beta(const Dataset& data, const DatasetSplit& split, const Vocabulary& vocab,
                           const EmbeddingMatrix& embeddings, std::vector<double> betas,
                           const TrainConfig& config, bool verbose) {
    if (betas.empty()) throw ValidationError("sweep_beta: no beta values given");
    std::vector<double> unique;
    for (double b : betas)
        if (std::find(unique.begin(), unique.end(), b) == unique.end()) unique.push_back(b);

    BetaSweepResult result;
    double best = -1.0;
    for (double b : unique) {
        TrainConfig c = config;
        c.beta = b;
        Checkpoint ck = train(data, split, vocab, embeddings, c, verbose);
        double f1 = ck.history.empty() ? 0.0 : ck.history[ck.best_epoch].val_f1;
        result.curve.push_back({b, f1});
        if (f1 > best) {
            best = f1;
            result.best_beta = b;
        }
        if (verbose) std::cout << "beta " << b << " val_f1 " << f1 << "\n";
    }
    return result;
}

}  // namespace sbniva
