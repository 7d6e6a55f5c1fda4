#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "sbniva/corpus.hpp"
#include "sbniva/embedding.hpp"
#include "sbniva/encoder.hpp"
#include "sbniva/keyframes.hpp"
#include "sbniva/sbn.hpp"

namespace sbniva {

struct TrainConfig {
    double lr = 0.001;
    std::size_t epochs = 30;
    std::size_t batch_size = 64;
    double beta = 0.15;
    std::size_t r = 5;  // former neighbors per target
    std::size_t p = 3;  // keyframes per video
    double frame_len = 10.0;
    bool use_iva = true;
    bool use_decay = true;
    std::uint64_t seed = 42;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    bool freeze_embeddings = true;
    std::size_t hidden_dim = 64;
    std::size_t patience = 5;  // early stop after this many epochs without a new best F1
    double threshold = 0.5;
    int decay_exponent_sign = -1;
    bool renormalize_iva = false;
    std::size_t max_tokens = 50;

    SbnConfig sbn() const;
    EncoderConfig encoder() const;
    void validate() const;
};

// Model-ready view of one video: per-record timestamps, labels (-1 when
// unlabeled), token ids, raw tokens (kept for keyword matching) and the
// extracted keyframes.
struct VideoData {
    std::string video_id;
    std::string category;
    double duration = 0.0;
    std::vector<double> times;
    std::vector<int> labels;
    std::vector<std::vector<int>> token_ids;
    std::vector<std::vector<std::string>> tokens;
    std::vector<Keyframe> keyframes;
};

struct Example {
    std::size_t video = 0;
    std::size_t record = 0;
};

struct Dataset {
    std::vector<VideoData> videos;
    // Labeled records with at least one predecessor, in (video, record) order.
    std::vector<Example> examples;
    std::vector<std::string> skipped_videos;  // no keyframes (or zero duration)

    std::vector<std::string> example_video_ids() const;
};

Dataset build_dataset(const std::vector<VideoStream>& videos, const Vocabulary& vocab,
                      const TrainConfig& config,
                      const std::map<std::string, std::string>* categories = nullptr);

struct EpochStats {
    double train_loss = 0.0;
    double val_precision = 0.0;
    double val_recall = 0.0;
    double val_f1 = 0.0;
};

struct Checkpoint {
    ModelParams params;
    Vocabulary vocab;
    TrainConfig config;
    std::size_t best_epoch = 0;
    std::vector<EpochStats> history;
    std::string corpus_hash;  // hash of the preprocessed corpus trained on
};

struct ScoredExample {
    std::size_t video = 0;
    std::size_t record = 0;
    SpoilerScore score;
    int label = -1;
    std::string category;
    std::vector<double> word_attention;
};

// Scores the given examples (indices into data.examples) with frozen
// parameters. Results come back sorted by (video, record).
std::vector<ScoredExample> score_examples(const ModelParams& params, const Dataset& data,
                                          std::span<const std::size_t> example_indices,
                                          const TrainConfig& config);

// Scores every record of every video, including unlabeled records and records
// without predecessors (whose neighbor term is 0).
std::vector<ScoredExample> score_all_records(const ModelParams& params, const Dataset& data,
                                             const TrainConfig& config);

// Mini-batch Adam on mean binary cross-entropy. Batches never mix videos, so
// keyframe and neighbor encodings are shared within a batch. Keeps the
// parameters of the best validation-F1 epoch (the last epoch when the
// validation set is empty). Deterministic for a fixed seed.
Checkpoint train(const Dataset& data, const DatasetSplit& split, const Vocabulary& vocab,
                 const EmbeddingMatrix& embeddings, const TrainConfig& config,
                 bool verbose = false);

struct BetaSweepPoint {
    double beta = 0.0;
    double f1 = 0.0;
};
struct BetaSweepResult {
    double best_beta = 0.0;
    std::vector<BetaSweepPoint> curve;
};

// One full training run per beta (duplicates dropped); returns the beta with
// the highest validation F1 plus the whole curve.
BetaSweepResult sweep_beta(const Dataset& data, const DatasetSplit& split, const Vocabulary& vocab,
                           const EmbeddingMatrix& embeddings, std::vector<double> betas,
                           const TrainConfig& config, bool verbose = false);

class AdamOptimizer {
  public:
    AdamOptimizer(double lr, double beta1, double beta2, double eps)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(ModelParams& params, const ModelParams& grads, bool include_embedding);
    std::size_t steps() const { return t_; }

  private:
    struct Moments {
        Vec m, v;
    };
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
    std::map<std::string, Moments> moments_;
};

}  // namespace sbniva
