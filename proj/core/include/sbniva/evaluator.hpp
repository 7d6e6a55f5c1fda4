#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sbniva/trainer.hpp"

namespace sbniva {

struct ConfusionCounts {
    long long tp = 0, fp = 0, fn = 0, tn = 0;

    double precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }
    double recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }
    double f1() const {
        double p = precision(), r = recall();
        return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    }
};

struct LabeledPrediction {
    double probability = 0.0;
    int label = 0;
    std::string category;  // optional corpus tag (e.g. tv/movie/sport)
};

struct MetricsReport {
    ConfusionCounts overall;
    std::map<std::string, ConfusionCounts> by_category;
};

// Positive class is spoiler (label 1); a prediction counts as positive when
// probability >= threshold. Throws on an empty list.
MetricsReport compute_metrics(std::span<const LabeledPrediction> predictions,
                              double threshold = 0.5);

struct KeywordList {
    std::vector<std::string> keywords;

    // One keyword per line, '#' comments ignored.
    static KeywordList from_stream(std::istream& in);
    static KeywordList from_file(const std::string& path);
};

// 1 iff any keyword appears in the comment's token list (exact token match).
std::vector<int> km_baseline(const VideoStream& video, const KeywordList& keywords);
std::vector<int> km_baseline(const VideoData& video, const KeywordList& keywords);

MetricsReport evaluate_model(const ModelParams& params, const Dataset& data,
                             std::span<const std::size_t> example_indices,
                             const TrainConfig& config);
MetricsReport evaluate_km(const Dataset& data, std::span<const std::size_t> example_indices,
                          const KeywordList& keywords);

struct AblationMethod {
    std::string name;
    enum Kind { kModel, kKeywordMatch } kind = kModel;
    TrainConfig config;              // kModel: trained fresh unless checkpoint_path is set
    KeywordList keywords;            // kKeywordMatch
    std::string checkpoint_path;     // optional pre-trained model
};

struct AblationRow {
    std::string method;
    MetricsReport report;
    std::string error;  // non-empty when this row failed; other rows proceed
};

// Evaluates every method on the split's test partition, one row per method.
std::vector<AblationRow> run_ablation(const Dataset& data, const DatasetSplit& split,
                                      const Vocabulary& vocab, const EmbeddingMatrix& embeddings,
                                      std::span<const AblationMethod> methods);

void write_metrics_csv(std::ostream& out, std::span<const AblationRow> rows);
void write_metrics_json(std::ostream& out, std::span<const AblationRow> rows);

// Word-level and sentence-level attention for one target comment, shaped for
// plotting. Sentence weights carry the variance-attention score, the decay
// weight and their product separately.
struct AttentionDump {
    std::string video_id;
    std::size_t target_index = 0;
    double probability = 0.0;
    double g_nsim = 0.0;
    double g_ksim = 0.0;

    struct Comment {
        std::size_t record_index = 0;
        double timestamp = 0.0;
        std::vector<std::string> tokens;
        std::vector<double> word_attention;
    };
    Comment target;

    struct NeighborEntry {
        Comment comment;
        double nsim = 0.0;
        double decay_weight = 0.0;
        double iva_weight = 0.0;      // 0 when IVA is off
        double combined_weight = 0.0;  // iva * decay (decay alone when IVA off)
    };
    std::vector<NeighborEntry> neighbors;

    struct KeyframeEntry {
        double start = 0.0;
        double end = 0.0;
        double ksim = 0.0;
    };
    std::vector<KeyframeEntry> keyframes;
};

// Requires the target to have at least one predecessor.
AttentionDump export_attention(const Checkpoint& ckpt, const Dataset& data,
                               std::size_t video_index, std::size_t record_index);
void write_attention_json(std::ostream& out, const AttentionDump& dump);

}  // namespace sbniva
