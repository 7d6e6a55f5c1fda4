#include "sbniva/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace sbniva {

namespace {
const std::string kPadToken = "<pad>";
const std::string kUnkToken = "<unk>";
}  // namespace

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{kPadToken, kUnkToken}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.size() < 2 || tokens_[0] != kPadToken || tokens_[1] != kUnkToken)
        throw ValidationError("vocabulary must start with " + kPadToken + ", " + kUnkToken);
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (!index_.emplace(tokens_[i], static_cast<int>(i)).second)
            throw ValidationError("duplicate vocabulary token: " + tokens_[i]);
    }
}

int Vocabulary::id_for(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token_for(int id) const {
    return tokens_.at(static_cast<std::size_t>(id));
}

std::vector<int> Vocabulary::ids_for(std::span<const std::string> tokens) const {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(id_for(t));
    return ids;
}

Vocabulary build_vocab(const std::vector<VideoStream>& videos, std::size_t min_freq) {
    std::map<std::string, std::size_t> counts;
    for (const auto& v : videos)
        for (const auto& r : v.records)
            for (const auto& t : r.tokens) ++counts[t];

    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [tok, cnt] : counts)
        if (cnt >= min_freq && tok != kPadToken && tok != kUnkToken) kept.emplace_back(tok, cnt);
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::vector<std::string> tokens{kPadToken, kUnkToken};
    tokens.reserve(kept.size() + 2);
    for (auto& [tok, cnt] : kept) tokens.push_back(tok);
    return Vocabulary(std::move(tokens));
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Cumulative unigram^0.75 table for negative sampling.
struct NoiseTable {
    std::vector<double> cdf;  // over token ids

    explicit NoiseTable(const std::vector<double>& weights) {
        cdf.resize(weights.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            cdf[i] = acc;
        }
    }

    int sample(Rng& rng) const {
        double u = uniform_real(rng, 0.0, cdf.back());
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        return static_cast<int>(it - cdf.begin());
    }
};

}  // namespace

SkipgramResult train_skipgram(const std::vector<VideoStream>& videos, const Vocabulary& vocab,
                              const SkipgramConfig& config) {
    if (config.dim == 0) throw ValidationError("skip-gram: dimension must be > 0");
    if (config.window == 0) throw ValidationError("skip-gram: window must be > 0");

    const std::size_t vsize = vocab.size();
    const std::size_t d = config.dim;
    Rng rng(config.seed);

    SkipgramResult result;
    result.embeddings.weights = Mat(vsize, d);
    Mat context(vsize, d, 0.0);
    {
        double lim = 0.5 / static_cast<double>(d);
        for (double& w : result.embeddings.weights.data) w = uniform_real(rng, -lim, lim);
    }

    // Token id sequences, one per comment.
    std::vector<std::vector<int>> sentences;
    std::vector<double> freq(vsize, 0.0);
    for (const auto& v : videos) {
        for (const auto& r : v.records) {
            auto ids = vocab.ids_for(r.tokens);
            for (int id : ids) freq[static_cast<std::size_t>(id)] += 1.0;
            sentences.push_back(std::move(ids));
        }
    }

    std::vector<double> noise_weights(vsize, 0.0);
    for (std::size_t i = 2; i < vsize; ++i) noise_weights[i] = std::pow(freq[i], 0.75);
    noise_weights[Vocabulary::kUnkId] = std::pow(freq[Vocabulary::kUnkId], 0.75);
    double total_noise = 0.0;
    for (double w : noise_weights) total_noise += w;
    bool can_sample = total_noise > 0.0;
    NoiseTable noise(can_sample ? noise_weights : std::vector<double>(vsize, 1.0));

    Mat& input = result.embeddings.weights;
    Vec grad_in(d);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double loss = 0.0;
        std::size_t pairs = 0;
        for (const auto& sent : sentences) {
            for (std::size_t i = 0; i < sent.size(); ++i) {
                auto center = static_cast<std::size_t>(sent[i]);
                double* v = input.data.data() + center * d;
                std::size_t lo = i >= config.window ? i - config.window : 0;
                std::size_t hi = std::min(sent.size() - 1, i + config.window);
                for (std::size_t j = lo; j <= hi; ++j) {
                    if (j == i) continue;
                    auto ctx = static_cast<std::size_t>(sent[j]);
                    std::fill(grad_in.begin(), grad_in.end(), 0.0);

                    double* u = context.data.data() + ctx * d;
                    double f = 0.0;
                    for (std::size_t k = 0; k < d; ++k) f += v[k] * u[k];
                    double s = sigmoid(f);
                    loss += -std::log(std::max(s, 1e-12));
                    double g = (1.0 - s) * config.lr;
                    for (std::size_t k = 0; k < d; ++k) {
                        grad_in[k] += g * u[k];
                        u[k] += g * v[k];
                    }

                    for (std::size_t neg = 0; neg < config.negatives; ++neg) {
                        auto nid = static_cast<std::size_t>(noise.sample(rng));
                        if (nid == ctx) continue;
                        double* un = context.data.data() + nid * d;
                        double fn = 0.0;
                        for (std::size_t k = 0; k < d; ++k) fn += v[k] * un[k];
                        double sn = sigmoid(fn);
                        loss += -std::log(std::max(1.0 - sn, 1e-12));
                        double gn = -sn * config.lr;
                        for (std::size_t k = 0; k < d; ++k) {
                            grad_in[k] += gn * un[k];
                            un[k] += gn * v[k];
                        }
                    }

                    for (std::size_t k = 0; k < d; ++k) v[k] += grad_in[k];
                    ++pairs;
                }
            }
        }
        result.epoch_loss.push_back(pairs > 0 ? loss / static_cast<double>(pairs) : 0.0);
    }
    return result;
}

void save_embeddings(std::ostream& out, const Vocabulary& vocab, const EmbeddingMatrix& emb) {
    if (vocab.size() != emb.vocab_size())
        throw ValidationError("save_embeddings: vocabulary/matrix row count mismatch");
    out << emb.vocab_size() << ' ' << emb.dim() << '\n';
    for (std::size_t i = 0; i < emb.vocab_size(); ++i) {
        out << vocab.token_for(static_cast<int>(i));
        auto row = emb.row(static_cast<int>(i));
        for (double v : row) out << ' ' << format_double(v);
        out << '\n';
    }
}

std::pair<Vocabulary, EmbeddingMatrix> load_embeddings(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("embedding file: empty file");
    std::istringstream header(line);
    std::size_t vsize = 0, d = 0;
    if (!(header >> vsize >> d) || vsize == 0 || d == 0)
        throw ValidationError("embedding file: bad header, expected '|V| d'");

    std::vector<std::string> tokens;
    tokens.reserve(vsize);
    EmbeddingMatrix emb;
    emb.weights = Mat(vsize, d);
    for (std::size_t i = 0; i < vsize; ++i) {
        if (!std::getline(in, line))
            throw ValidationError("embedding file: expected " + std::to_string(vsize) +
                                  " rows, got " + std::to_string(i));
        std::istringstream row(line);
        std::string token;
        if (!(row >> token)) throw ValidationError("embedding file: empty row " + std::to_string(i));
        tokens.push_back(token);
        for (std::size_t k = 0; k < d; ++k) {
            double v = 0.0;
            if (!(row >> v))
                throw ValidationError("embedding file: row " + std::to_string(i) +
                                      " has fewer than " + std::to_string(d) + " values");
            emb.weights.at(i, k) = v;
        }
        double extra;
        if (row >> extra)
            throw ValidationError("embedding file: row " + std::to_string(i) +
                                  " has more than " + std::to_string(d) + " values");
    }
    return {Vocabulary(std::move(tokens)), std::move(emb)};
}

std::pair<Vocabulary, EmbeddingMatrix> load_embeddings_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open embedding file: " + path);
    return load_embeddings(in);
}

}  // namespace sbniva
