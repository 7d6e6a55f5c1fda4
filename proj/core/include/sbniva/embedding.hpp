#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sbniva/common.hpp"
#include "sbniva/corpus.hpp"

namespace sbniva {

// Token ids are dense in [0, size()). Id 0 is <pad>, id 1 is <unk>; the rest
// are assigned by descending corpus frequency, then lexicographically.
class Vocabulary {
  public:
    static constexpr int kPadId = 0;
    static constexpr int kUnkId = 1;

    Vocabulary();
    explicit Vocabulary(std::vector<std::string> tokens);  // order defines ids

    int id_for(const std::string& token) const;  // kUnkId when unknown
    const std::string& token_for(int id) const;
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    std::vector<int> ids_for(std::span<const std::string> tokens) const;

  private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

struct EmbeddingMatrix {
    Mat weights;  // |V| x d, row per token id
    std::size_t dim() const { return weights.cols; }
    std::size_t vocab_size() const { return weights.rows; }
    std::span<const double> row(int id) const {
        return {weights.data.data() + static_cast<std::size_t>(id) * weights.cols, weights.cols};
    }
};

// Tokens appearing fewer than min_freq times map to <unk>.
Vocabulary build_vocab(const std::vector<VideoStream>& videos, std::size_t min_freq = 1);

struct SkipgramConfig {
    std::size_t dim = 128;
    std::size_t window = 5;
    std::size_t negatives = 5;
    std::size_t epochs = 5;
    double lr = 0.025;
    std::uint64_t seed = 1;
};

struct SkipgramResult {
    EmbeddingMatrix embeddings;
    std::vector<double> epoch_loss;  // mean loss per epoch, before each update
};

// Skip-gram with negative sampling (unigram^0.75 noise distribution) over the
// per-comment token sequences. epochs == 0 returns the seeded initialization.
SkipgramResult train_skipgram(const std::vector<VideoStream>& videos, const Vocabulary& vocab,
                              const SkipgramConfig& config);

// Text format: first line "|V| d", then one line per token id:
// "token v_1 ... v_d". Values round-trip bit-exactly.
void save_embeddings(std::ostream& out, const Vocabulary& vocab, const EmbeddingMatrix& emb);
std::pair<Vocabulary, EmbeddingMatrix> load_embeddings(std::istream& in);
std::pair<Vocabulary, EmbeddingMatrix> load_embeddings_file(const std::string& path);

}  // namespace sbniva
