#pragma once

// Hand-built tiny corpus with ideal embedding clusters: spoilers use the
// "end*" tokens that also fill the last-quarter burst, ordinary comments use
// the "cur*" tokens of their moment, noise uses a disjoint cluster. With
// these embeddings the task is separable, which keeps trainer tests fast and
// deterministic.

#include <string>
#include <vector>

#include "sbniva/corpus.hpp"
#include "sbniva/embedding.hpp"
#include "sbniva/trainer.hpp"
#include "support/testutil.hpp"

namespace fixtures {

using namespace sbniva;

struct TinyCorpus {
    std::vector<VideoStream> videos;
    Vocabulary vocab;
    EmbeddingMatrix embeddings;
};

inline TinyCorpus make_tiny_corpus(std::uint64_t seed, std::size_t n_videos = 2,
                                   std::size_t labeled_per_video = 24,
                                   double noise_rate = 0.2) {
    Rng rng(seed);
    const std::vector<std::string> ending{"end0", "end1", "end2", "end3"};
    const std::vector<std::string> current{"cur0", "cur1", "cur2", "cur3"};
    const std::vector<std::string> noise{"nz0", "nz1", "nz2"};

    TinyCorpus out;
    for (std::size_t v = 0; v < n_videos; ++v) {
        VideoStream vs;
        vs.video_id = "tiny" + std::to_string(v);
        vs.duration = 100.0;
        auto push = [&](double t, const std::vector<std::string>& pool, int label) {
            TscRecord r;
            r.video_id = vs.video_id;
            r.timestamp = t;
            for (int k = 0; k < 3; ++k)
                r.tokens.push_back(pool[static_cast<std::size_t>(
                    uniform_int(rng, 0, static_cast<std::int64_t>(pool.size()) - 1))]);
            if (label >= 0) r.label = label;
            vs.records.push_back(std::move(r));
        };
        for (std::size_t i = 0; i < labeled_per_video; ++i) {
            double t = uniform_real(rng, 0.0, 74.0);
            double u = uniform_real(rng, 0.0, 1.0);
            if (u < noise_rate)
                push(t, noise, 0);
            else if (u < noise_rate + 0.3)
                push(t, ending, 1);
            else
                push(t, current, 0);
        }
        // one dense burst in [80, 90) -> the keyframe
        for (int i = 0; i < 10; ++i) push(uniform_real(rng, 80.0, 89.9), ending, -1);
        // thin tail elsewhere in the last quarter
        push(uniform_real(rng, 76.0, 79.0), current, -1);
        push(uniform_real(rng, 91.0, 99.0), current, -1);
        std::stable_sort(vs.records.begin(), vs.records.end(),
                         [](const TscRecord& a, const TscRecord& b) { return a.timestamp < b.timestamp; });
        out.videos.push_back(std::move(vs));
    }

    out.vocab = build_vocab(out.videos, 1);
    // Cluster embeddings around three orthogonal directions with jitter.
    std::size_t dim = 6;
    out.embeddings.weights = Mat(out.vocab.size(), dim);
    for (std::size_t id = 0; id < out.vocab.size(); ++id) {
        const std::string& tok = out.vocab.token_for(static_cast<int>(id));
        std::size_t axis = 3;  // specials
        if (tok.rfind("end", 0) == 0) axis = 0;
        else if (tok.rfind("cur", 0) == 0) axis = 1;
        else if (tok.rfind("nz", 0) == 0) axis = 2;
        for (std::size_t k = 0; k < dim; ++k)
            out.embeddings.weights.at(id, k) = 0.05 * uniform_real(rng, -1.0, 1.0);
        if (axis < 3) out.embeddings.weights.at(id, axis) += 1.0;
    }
    return out;
}

inline TrainConfig tiny_config() {
    TrainConfig c;
    c.lr = 0.02;
    c.epochs = 8;
    c.batch_size = 16;
    c.r = 3;
    c.p = 2;
    c.hidden_dim = 4;
    c.seed = 11;
    c.patience = 50;
    return c;
}

}  // namespace fixtures
