#include <doctest.h>

#include <cmath>

#include "sbniva/sbn.hpp"
#include "sbniva/encoder.hpp"
#include "support/constructions.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

using namespace sbniva;
using testutil::grad_close;
using testutil::normalize;
using testutil::random_vec;

namespace {

NeighborContext simple_context(Vec target, std::vector<Vec> neighbors, std::vector<Vec> keyframes,
                               double t = 100.0) {
    NeighborContext ctx;
    ctx.target = std::move(target);
    ctx.target_time = t;
    ctx.neighbors = std::move(neighbors);
    for (std::size_t i = 0; i < ctx.neighbors.size(); ++i)
        ctx.neighbor_times.push_back(t - 1.0 - static_cast<double>(ctx.neighbors.size() - i));
    ctx.keyframes = std::move(keyframes);
    return ctx;
}

}  // namespace

TEST_SUITE_BEGIN("sbn");

TEST_CASE("decay weights: uniform cases and the frozen two-neighbor example") {
    // beta = 0 -> uniform
    auto w0 = decay_weights(Vec{10.0, 50.0, 90.0}, 100.0, 0.0);
    for (double w : w0) CHECK(w == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // equal gaps -> uniform
    auto weq = decay_weights(Vec{80.0, 80.0}, 100.0, 0.3);
    CHECK(weq[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(weq[1] == doctest::Approx(0.5).epsilon(1e-12));

    // gaps (0, 10), beta 0.15: softmax(0, -1.5)
    auto w = decay_weights(Vec{90.0, 100.0}, 100.0, 0.15);
    CHECK(w[1] == doctest::Approx(0.8175744761936437).epsilon(1e-12));
    CHECK(w[0] == doctest::Approx(0.1824255238063563).epsilon(1e-12));

    CHECK_THROWS_AS(decay_weights(Vec{1.0}, 2.0, -0.1), std::invalid_argument);
}

TEST_CASE("decay weights never grow with the time gap; the legacy sign flips that") {
    Rng rng(21);
    for (int round = 0; round < 300; ++round) {
        auto r = static_cast<std::size_t>(uniform_int(rng, 1, 6));
        double t = uniform_real(rng, 50.0, 500.0);
        Vec times(r);
        for (double& x : times) x = uniform_real(rng, 0.0, t);
        std::sort(times.begin(), times.end());
        double beta = uniform_real(rng, 0.0, 0.6);

        auto w = decay_weights(times, t, beta);
        double sum = 0.0;
        for (double x : w) sum += x;
        CHECK(std::abs(sum - 1.0) < 1e-9);
        for (std::size_t i = 0; i + 1 < r; ++i) {
            // times ascending -> gaps descending -> weights non-decreasing
            CHECK(w[i] <= w[i + 1] + 1e-15);
            if (beta > 0.0 && times[i] < times[i + 1]) CHECK(w[i] < w[i + 1]);
        }

        auto legacy = decay_weights(times, t, beta, +1);
        for (std::size_t i = 0; i + 1 < r; ++i)
            if (beta > 0.0 && times[i] < times[i + 1]) CHECK(legacy[i] > legacy[i + 1]);
    }
}

TEST_CASE("neighbor similarities: identity, orthogonality, hand-computed cosine") {
    Vec target{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    NeighborContext ctx = simple_context(target, {target, Vec{1.0, 0.0}, Vec{0.0, -1.0}}, {});
    auto sims = neighbor_similarities(ctx, 0.0);
    REQUIRE(sims.size() == 3);
    CHECK(sims[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sims[1] == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));

    NeighborContext orth = simple_context(Vec{1.0, 0.0}, {Vec{0.0, 1.0}}, {});
    CHECK(neighbor_similarities(orth, 0.0)[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("overall neighbor similarity: constants and the loop oracle") {
    // all nsim = s without IVA -> s
    Vec nsims(4, 0.37);
    Vec dw = decay_weights(Vec{1.0, 2.0, 3.0, 4.0}, 5.0, 0.2);
    CHECK(overall_neighbor_similarity(nsims, dw) == doctest::Approx(0.37).epsilon(1e-12));

    // frozen product-sum
    CHECK(overall_neighbor_similarity(Vec{1.0, 0.0}, Vec{0.5, 0.5}, Vec{0.5, 0.5}) ==
          doctest::Approx(0.25).epsilon(1e-12));

    Rng rng(33);
    for (int round = 0; round < 50; ++round) {
        Vec ns = random_vec(rng, 5, -1.0, 1.0);
        Vec times = random_vec(rng, 5, 0.0, 80.0);
        std::sort(times.begin(), times.end());
        Vec w = decay_weights(times, 100.0, 0.15);
        Vec iva = random_vec(rng, 5, 0.0, 1.0);
        double z = 0.0;
        for (double v : iva) z += v;
        for (double& v : iva) v /= z;

        CHECK(overall_neighbor_similarity(ns, w) ==
              doctest::Approx(oracle::overall_nsim(ns, w, nullptr, false)).epsilon(1e-12));
        CHECK(overall_neighbor_similarity(ns, w, iva) ==
              doctest::Approx(oracle::overall_nsim(ns, w, &iva, false)).epsilon(1e-12));
        CHECK(overall_neighbor_similarity(ns, w, iva, true) ==
              doctest::Approx(oracle::overall_nsim(ns, w, &iva, true)).epsilon(1e-12));
    }
}

TEST_CASE("variance attention: identical neighbors get uniform weights") {
    Vec v{0.4, -0.2, 0.9};
    std::vector<Vec> same(4, v);
    auto w = iva_weights(same);
    for (double x : w) CHECK(x == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(w[0] == w[1]);
    CHECK(w[1] == w[2]);
}

TEST_CASE("variance attention flags the planted outlier as the minimum") {
    Rng rng(55);
    for (int round = 0; round < 30; ++round) {
        auto bundle = constructions::noisy_neighbors(rng, 5, 8);
        auto w = iva_weights(bundle.vectors);
        std::size_t argmin = 0;
        for (std::size_t i = 1; i < w.size(); ++i)
            if (w[i] < w[argmin]) argmin = i;
        CHECK(argmin == bundle.outlier);
        for (std::size_t i = 0; i < w.size(); ++i)
            if (i != bundle.outlier) CHECK(w[bundle.outlier] < w[i]);
    }
}

TEST_CASE("variance attention matches the straight-line oracle") {
    Rng rng(56);
    for (int round = 0; round < 100; ++round) {
        auto r = static_cast<std::size_t>(uniform_int(rng, 2, 5));
        std::vector<Vec> neighbors;
        for (std::size_t i = 0; i < r; ++i) neighbors.push_back(random_vec(rng, 6));
        auto got = iva_weights(neighbors);
        auto want = oracle::iva_weights(neighbors, 1e-8, 1e-8);
        double sum = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
            CHECK(std::abs(got[i] - want[i]) < 1e-9);
            sum += got[i];
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
    std::vector<Vec> single{Vec{1.0, 0.0}};
    CHECK_THROWS_AS(iva_weights(single), std::invalid_argument);
}

TEST_CASE("row softmax means are exactly 1/R") {
    Rng rng(57);
    for (int round = 0; round < 200; ++round) {
        auto r = static_cast<std::size_t>(uniform_int(rng, 2, 7));
        ad::Tape t;
        auto row = ad::softmax(t.vector(random_vec(rng, r, -1.0, 1.0)));
        auto m = ad::mean(row);
        CHECK(std::abs(m.scalar() - 1.0 / static_cast<double>(r)) < 1e-12);
    }
}

TEST_CASE("variance attention is permutation-equivariant and scale-invariant") {
    Rng rng(58);
    std::vector<Vec> neighbors;
    for (int i = 0; i < 5; ++i) neighbors.push_back(random_vec(rng, 6));
    auto w = iva_weights(neighbors);

    std::vector<std::size_t> perm{3, 0, 4, 1, 2};
    std::vector<Vec> shuffled;
    for (auto i : perm) shuffled.push_back(neighbors[i]);
    auto wp = iva_weights(shuffled);
    for (std::size_t i = 0; i < perm.size(); ++i)
        CHECK(wp[i] == doctest::Approx(w[perm[i]]).epsilon(1e-12));

    std::vector<Vec> scaled = neighbors;
    for (double& x : scaled[2]) x *= 37.5;
    auto ws = iva_weights(scaled);
    for (std::size_t i = 0; i < ws.size(); ++i)
        CHECK(ws[i] == doctest::Approx(w[i]).epsilon(1e-6));
}

TEST_CASE("overall keyframe similarity takes the maximum") {
    CHECK(overall_keyframe_similarity(Vec{0.1, 0.9, 0.3}) == 0.9);
    CHECK(overall_keyframe_similarity(Vec{-0.4}) == -0.4);
    CHECK_THROWS_AS(overall_keyframe_similarity(Vec{}), std::invalid_argument);
}

TEST_CASE("tied keyframe maximum routes gradient to the lowest index") {
    ad::Tape t;
    Vec target{1.0, 0.0};
    auto tv = t.vector(target, false);
    auto k1 = t.vector(Vec{2.0, 0.0}, true);  // cos = 1
    auto k2 = t.vector(Vec{3.0, 0.0}, true);  // cos = 1, tied
    std::vector<ad::Value> sims{ad::cosine_sim(k1, tv), ad::cosine_sim(k2, tv)};
    auto g = ad::max_index_select(ad::stack(sims));
    CHECK(g.scalar() == 1.0);
    t.backward(g);
    CHECK(!k1.grad().empty());  // gradient routed through the first tied entry
    bool k2_untouched = true;
    for (double x : k2.grad())
        if (x != 0.0) k2_untouched = false;
    CHECK(k2_untouched);
}

TEST_CASE("predict: balanced similarities give probability one half") {
    Vec v = normalize(Vec{0.3, 0.8, -0.1, 0.42});
    NeighborContext ctx = simple_context(v, {v, v}, {v});
    SbnConfig cfg;
    cfg.use_iva = false;
    auto score = predict(ctx, cfg);
    CHECK(score.probability == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(score.g_nsim == doctest::Approx(score.g_ksim).epsilon(1e-12));
}

TEST_CASE("predict: frozen closed-form endpoints") {
    Vec a{1.0, 0.0, 0.0};
    Vec b{0.0, 1.0, 0.0};
    SbnConfig cfg;
    cfg.use_iva = false;

    // target == every neighbor, orthogonal to every keyframe:
    // g_nsim = 1, g_ksim = 0, probability = sigmoid(-1)
    auto low = predict(simple_context(a, {a, a, a}, {b, b}), cfg);
    CHECK(low.probability == doctest::Approx(0.2689414213699951).epsilon(1e-6));

    // target == one keyframe, orthogonal to all neighbors: sigmoid(1)
    auto high = predict(simple_context(a, {b, b, b}, {a, b}), cfg);
    CHECK(high.probability == doctest::Approx(0.7310585786300049).epsilon(1e-6));
    CHECK(high.g_ksim == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("spoiler score fields are self-consistent") {
    Rng rng(59);
    for (int round = 0; round < 20; ++round) {
        NeighborContext ctx = simple_context(
            random_vec(rng, 6), {random_vec(rng, 6), random_vec(rng, 6), random_vec(rng, 6)},
            {random_vec(rng, 6), random_vec(rng, 6)});
        SbnConfig cfg;
        auto s = predict(ctx, cfg);
        // probability is recomputable from the exported fields
        double x = s.g_ksim - s.g_nsim;
        CHECK(s.probability == 1.0 / (1.0 + std::exp(-x)));
        double dsum = 0.0, isum = 0.0;
        for (double w : s.decay_weights) dsum += w;
        for (double w : s.iva_weights) isum += w;
        CHECK(std::abs(dsum - 1.0) < 1e-9);
        CHECK(std::abs(isum - 1.0) < 1e-9);
        for (double v : s.neighbor_sims) CHECK(std::abs(v) <= 1.0 + 1e-9);
        for (double v : s.keyframe_sims) CHECK(std::abs(v) <= 1.0 + 1e-9);
        CHECK(s.g_ksim == overall_keyframe_similarity(s.keyframe_sims));
    }
}

TEST_CASE("probability rises with keyframe similarity and falls with neighbor similarity") {
    Rng rng(60);
    Vec target = normalize(random_vec(rng, 8));
    Vec near = normalize(Vec(target));  // copy
    Vec far = normalize(random_vec(rng, 8));
    SbnConfig cfg;
    cfg.use_iva = false;

    auto base = predict(simple_context(target, {far, far}, {far}), cfg);
    auto more_ksim = predict(simple_context(target, {far, far}, {far, near}), cfg);
    CHECK(more_ksim.g_ksim > base.g_ksim);
    CHECK(more_ksim.probability > base.probability);

    auto more_nsim = predict(simple_context(target, {near, near}, {far}), cfg);
    CHECK(more_nsim.g_nsim > base.g_nsim);
    CHECK(more_nsim.probability < base.probability);
}

TEST_CASE("uniform-weight ablation equals beta zero bit-exactly") {
    Rng rng(61);
    for (int round = 0; round < 100; ++round) {
        NeighborContext ctx = simple_context(
            random_vec(rng, 6),
            {random_vec(rng, 6), random_vec(rng, 6), random_vec(rng, 6), random_vec(rng, 6)},
            {random_vec(rng, 6)});
        SbnConfig wt;
        wt.use_decay = false;
        wt.beta = 0.15;  // must be ignored
        SbnConfig b0;
        b0.use_decay = true;
        b0.beta = 0.0;
        auto a = predict(ctx, wt);
        auto b = predict(ctx, b0);
        CHECK(a.probability == b.probability);
        CHECK(a.g_nsim == b.g_nsim);
        CHECK(a.g_ksim == b.g_ksim);
        CHECK(a.decay_weights == b.decay_weights);
        CHECK(a.iva_weights == b.iva_weights);
    }
}

TEST_CASE("zero-neighbor inference scores sigmoid of the keyframe term") {
    Vec a{1.0, 0.0};
    NeighborContext ctx;
    ctx.target = a;
    ctx.target_time = 5.0;
    ctx.keyframes = {a};
    auto s = predict(ctx, SbnConfig{});
    CHECK(s.g_nsim == 0.0);
    CHECK(s.neighbor_sims.empty());
    CHECK(s.probability == doctest::Approx(1.0 / (1.0 + std::exp(-s.g_ksim))).epsilon(1e-12));
}

TEST_CASE("binary cross-entropy values") {
    CHECK(bce_loss(0.5, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_loss(0.5, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_loss(0.7310585786300049, 1) == doctest::Approx(0.3132616875182228).epsilon(1e-9));
    CHECK(bce_loss(0.999999, 1) < 1e-5);
    CHECK(bce_loss(0.000001, 0) < 1e-5);
    // graph version agrees and is clamped
    ad::Tape t;
    CHECK(bce_loss_graph(t.scalar(0.5), 1).scalar() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(std::isfinite(bce_loss_graph(t.scalar(0.0), 1).scalar()));
    CHECK(std::isfinite(bce_loss_graph(t.scalar(1.0), 0).scalar()));
}

TEST_CASE("former neighbor indices pad from the earliest comment") {
    CHECK(former_neighbor_indices(0, 5).empty());
    CHECK(former_neighbor_indices(3, 5) == std::vector<std::size_t>{0, 0, 0, 1, 2});
    CHECK(former_neighbor_indices(7, 3) == std::vector<std::size_t>{4, 5, 6});
    CHECK(former_neighbor_indices(1, 4) == std::vector<std::size_t>{0, 0, 0, 0});
}

TEST_CASE("full-model gradient through encoder, similarity network and loss") {
    Rng rng(62);
    ModelParams m;
    m.embedding.weights = testutil::random_mat(rng, 6, 3, -0.8, 0.8);
    EncoderConfig ecfg;
    ecfg.hidden_dim = 2;
    m.encoder = init_encoder_params(3, ecfg, rng);

    std::vector<std::vector<int>> comments{{1, 2}, {3, 4}, {2, 5}, {4, 1, 3}, {5, 2}};
    Vec times{1.0, 3.0, 7.0, 12.0, 20.0};
    std::size_t target = 4;
    SbnConfig scfg;  // IVA + decay on

    auto build_loss = [&](const ModelParams& params, bool trainable, ModelParams* grads) {
        ad::Tape tape;
        ModelBinding binding(tape, params, trainable, trainable);
        std::vector<ad::Value> enc;
        for (const auto& c : comments) enc.push_back(encode(c, binding, ecfg).sentence);
        ScoreGraphInputs in;
        in.target = enc[target];
        in.target_time = times[target];
        for (std::size_t nb : former_neighbor_indices(target, 3)) {
            in.neighbors.push_back(enc[nb]);
            in.neighbor_times.push_back(times[nb]);
        }
        std::vector<ad::Value> kf_members{enc[1], enc[2]};
        in.keyframes = {mean_vectors(kf_members)};
        auto g = build_score_graph(tape, in, scfg);
        auto loss = bce_loss_graph(g.probability, 1);
        double value = loss.scalar();
        if (trainable) {
            tape.backward(loss);
            binding.accumulate_grads(*grads);
        }
        return value;
    };

    ModelParams grads = make_grad_store(m, true);
    build_loss(m, true, &grads);

    auto eval = [&] { return build_loss(m, false, nullptr); };
    for_each_model_tensor(m, true, [&](std::string_view name, Mat& tensor) {
        Mat* gmat = nullptr;
        for_each_model_tensor(grads, true, [&](std::string_view gname, Mat& g) {
            if (gname == name) gmat = &g;
        });
        REQUIRE(gmat != nullptr);
        for (std::size_t i = 0; i < tensor.data.size(); ++i) {
            double fd = testutil::central_diff(&tensor.data[i], eval);
            INFO("tensor ", std::string(name), " coord ", i);
            CHECK(grad_close(gmat->data[i], fd));
        }
    });
}

TEST_SUITE_END();
