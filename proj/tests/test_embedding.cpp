#include <doctest.h>

#include <sstream>

#include "sbniva/embedding.hpp"
#include "support/testutil.hpp"

using namespace sbniva;

namespace {

std::vector<VideoStream> corpus_of(const std::vector<std::vector<std::string>>& sentences) {
    VideoStream v;
    v.video_id = "v1";
    double t = 0.0;
    for (const auto& s : sentences) {
        TscRecord r;
        r.video_id = "v1";
        r.timestamp = t;
        t += 1.0;
        r.tokens = s;
        v.records.push_back(std::move(r));
    }
    v.duration = t;
    return {v};
}

double cos_rows(const EmbeddingMatrix& emb, int a, int b) {
    auto ra = emb.row(a);
    auto rb = emb.row(b);
    double na = 0.0, nb = 0.0, d = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        na += ra[i] * ra[i];
        nb += rb[i] * rb[i];
        d += ra[i] * rb[i];
    }
    return d / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

TEST_SUITE_BEGIN("embedding");

TEST_CASE("vocabulary thresholds, specials and determinism") {
    auto videos = corpus_of({{"a", "a", "b"}, {"a", "a", "a"}});
    Vocabulary v = build_vocab(videos, 2);
    CHECK(v.size() == 3);  // pad, unk, a
    CHECK(v.id_for("a") == 2);
    CHECK(v.id_for("b") == Vocabulary::kUnkId);
    CHECK(v.token_for(Vocabulary::kPadId) == "<pad>");
    CHECK(v.token_for(Vocabulary::kUnkId) == "<unk>");

    Vocabulary empty = build_vocab({}, 1);
    CHECK(empty.size() == 2);

    Vocabulary again = build_vocab(videos, 2);
    CHECK(again.tokens() == v.tokens());

    // frequency-desc then lexicographic
    auto more = corpus_of({{"zz", "zz", "mm", "mm", "aa"}});
    Vocabulary order = build_vocab(more, 1);
    CHECK(order.id_for("mm") == 2);
    CHECK(order.id_for("zz") == 3);
    CHECK(order.id_for("aa") == 4);
}

TEST_CASE("skip-gram separates co-occurring tokens from unrelated ones") {
    // a,b only ever co-occur with each other; likewise c,d; the pairs never mix.
    Rng rng(19);
    std::vector<std::vector<std::string>> sentences;
    auto sample = [&](const char* x, const char* y) {
        std::vector<std::string> s;
        for (int k = 0; k < 3; ++k) s.push_back(uniform_int(rng, 0, 1) ? x : y);
        return s;
    };
    for (int i = 0; i < 80; ++i) {
        sentences.push_back(sample("a", "b"));
        sentences.push_back(sample("c", "d"));
    }
    auto videos = corpus_of(sentences);
    Vocabulary vocab = build_vocab(videos, 1);

    SkipgramConfig cfg;
    cfg.dim = 12;
    cfg.window = 2;
    cfg.negatives = 4;
    cfg.epochs = 60;
    cfg.lr = 0.05;
    cfg.seed = 5;
    auto result = train_skipgram(videos, vocab, cfg);

    double together = cos_rows(result.embeddings, vocab.id_for("a"), vocab.id_for("b"));
    double apart = cos_rows(result.embeddings, vocab.id_for("a"), vocab.id_for("c"));
    CHECK(together > apart);
}

TEST_CASE("planted clusters: intra-cluster cosine beats inter-cluster") {
    Rng rng(31);
    std::vector<std::string> left{"l0", "l1", "l2", "l3"};
    std::vector<std::string> right{"r0", "r1", "r2", "r3"};
    std::vector<std::vector<std::string>> sentences;
    for (int i = 0; i < 150; ++i) {
        auto pick = [&](const std::vector<std::string>& pool) {
            std::vector<std::string> s;
            for (int k = 0; k < 3; ++k)
                s.push_back(pool[static_cast<std::size_t>(uniform_int(rng, 0, 3))]);
            return s;
        };
        sentences.push_back(pick(left));
        sentences.push_back(pick(right));
    }
    auto videos = corpus_of(sentences);
    Vocabulary vocab = build_vocab(videos, 1);
    SkipgramConfig cfg;
    cfg.dim = 16;
    cfg.window = 3;
    cfg.negatives = 5;
    cfg.epochs = 25;
    cfg.lr = 0.05;
    cfg.seed = 9;
    auto emb = train_skipgram(videos, vocab, cfg).embeddings;

    double intra = 0.0, inter = 0.0;
    int n_intra = 0, n_inter = 0;
    for (const auto& x : left)
        for (const auto& y : left)
            if (x != y) {
                intra += cos_rows(emb, vocab.id_for(x), vocab.id_for(y));
                ++n_intra;
            }
    for (const auto& x : left)
        for (const auto& y : right) {
            inter += cos_rows(emb, vocab.id_for(x), vocab.id_for(y));
            ++n_inter;
        }
    CHECK(intra / n_intra > inter / n_inter);
}

TEST_CASE("loss trend decreases on a stationary corpus") {
    std::vector<std::vector<std::string>> sentences;
    for (int i = 0; i < 40; ++i) {
        sentences.push_back({"a", "b", "c"});
        sentences.push_back({"d", "e", "f"});
    }
    auto videos = corpus_of(sentences);
    Vocabulary vocab = build_vocab(videos, 1);
    SkipgramConfig cfg;
    cfg.dim = 8;
    cfg.window = 2;
    cfg.negatives = 3;
    cfg.epochs = 12;
    cfg.lr = 0.02;
    cfg.seed = 3;
    auto result = train_skipgram(videos, vocab, cfg);
    REQUIRE(result.epoch_loss.size() == 12);
    CHECK(result.epoch_loss.back() < result.epoch_loss.front());
}

TEST_CASE("zero epochs returns the seeded initialization; same seed is bitwise equal") {
    auto videos = corpus_of({{"a", "b"}, {"b", "c"}});
    Vocabulary vocab = build_vocab(videos, 1);
    SkipgramConfig cfg;
    cfg.dim = 6;
    cfg.seed = 77;

    SkipgramConfig zero = cfg;
    zero.epochs = 0;
    auto a = train_skipgram(videos, vocab, zero);
    CHECK(a.epoch_loss.empty());
    auto b = train_skipgram(videos, vocab, zero);
    CHECK(a.embeddings.weights.data == b.embeddings.weights.data);
    double lim = 0.5 / 6.0;
    for (double w : a.embeddings.weights.data) {
        CHECK(w <= lim);
        CHECK(w >= -lim);
    }

    SkipgramConfig two = cfg;
    two.epochs = 2;
    auto c = train_skipgram(videos, vocab, two);
    auto d = train_skipgram(videos, vocab, two);
    CHECK(c.embeddings.weights.data == d.embeddings.weights.data);
    CHECK(c.epoch_loss == d.epoch_loss);
}

TEST_CASE("bad hyperparameters are rejected") {
    auto videos = corpus_of({{"a", "b"}});
    Vocabulary vocab = build_vocab(videos, 1);
    SkipgramConfig cfg;
    cfg.dim = 0;
    CHECK_THROWS_AS(train_skipgram(videos, vocab, cfg), ValidationError);
    cfg.dim = 4;
    cfg.window = 0;
    CHECK_THROWS_AS(train_skipgram(videos, vocab, cfg), ValidationError);
}

TEST_CASE("embedding file round-trips bitwise") {
    auto videos = corpus_of({{"alpha", "beta"}, {"beta", "gamma"}});
    Vocabulary vocab = build_vocab(videos, 1);
    SkipgramConfig cfg;
    cfg.dim = 5;
    cfg.epochs = 2;
    cfg.seed = 13;
    auto result = train_skipgram(videos, vocab, cfg);

    std::ostringstream out;
    save_embeddings(out, vocab, result.embeddings);
    std::istringstream in(out.str());
    auto [vocab2, emb2] = load_embeddings(in);
    CHECK(vocab2.tokens() == vocab.tokens());
    CHECK(emb2.weights.data == result.embeddings.weights.data);
    CHECK(emb2.weights.rows == result.embeddings.weights.rows);
    CHECK(emb2.weights.cols == result.embeddings.weights.cols);
}

TEST_CASE("embedding file validation") {
    {
        std::istringstream in("");
        CHECK_THROWS_AS(load_embeddings(in), ValidationError);
    }
    {
        std::istringstream in("2 3\n<pad> 1 2 3\n<unk> 1 2\n");  // short row
        CHECK_THROWS_AS(load_embeddings(in), ValidationError);
    }
    {
        std::istringstream in("2 2\n<pad> 1 2\n<unk> 1 2 3\n");  // long row
        CHECK_THROWS_AS(load_embeddings(in), ValidationError);
    }
    {
        std::istringstream in("3 2\n<pad> 1 2\n<unk> 1 2\n");  // missing row
        CHECK_THROWS_AS(load_embeddings(in), ValidationError);
    }
}

TEST_SUITE_END();
