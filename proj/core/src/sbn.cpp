#include "sbniva/sbn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbniva {

std::vector<double> decay_weights(std::span<const double> neighbor_times, double target_time,
                                  double beta, int exponent_sign) {
    if (beta < 0.0) throw std::invalid_argument("decay_weights: beta must be >= 0");
    std::vector<double> logits(neighbor_times.size());
    for (std::size_t r = 0; r < neighbor_times.size(); ++r) {
        double gap = target_time - neighbor_times[r];
        logits[r] = static_cast<double>(exponent_sign) * beta * gap;
    }
    // softmax with max subtraction
    double mx = logits.empty() ? 0.0 : *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double& v : logits) {
        v = std::exp(v - mx);
        z += v;
    }
    for (double& v : logits) v /= z;
    return logits;
}

namespace {

double cosine(const Vec& a, const Vec& b, double eps) {
    double na = 0.0, nb = 0.0, d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += a[i] * a[i];
        nb += b[i] * b[i];
        d += a[i] * b[i];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (eps == 0.0 && (na == 0.0 || nb == 0.0))
        throw std::invalid_argument("cosine: zero-norm vector");
    return d / ((na + eps) * (nb + eps));
}

}  // namespace

std::vector<double> neighbor_similarities(const NeighborContext& ctx, double norm_eps) {
    std::vector<double> sims;
    sims.reserve(ctx.neighbors.size());
    for (const auto& n : ctx.neighbors) sims.push_back(cosine(n, ctx.target, norm_eps));
    return sims;
}

std::vector<double> iva_weights(std::span<const Vec> neighbor_vectors, double variance_eps,
                                double norm_eps) {
    // Single implementation: evaluate the differentiable graph on a scratch
    // tape so the op-level result is exactly what training sees.
    ad::Tape tape;
    std::vector<ad::Value> leaves;
    leaves.reserve(neighbor_vectors.size());
    for (const auto& v : neighbor_vectors) leaves.push_back(tape.vector(v));
    ad::Value w = iva_weights_graph(leaves, variance_eps, norm_eps);
    return w.data();
}

double overall_neighbor_similarity(std::span<const double> nsims,
                                   std::span<const double> dweights,
                                   std::span<const double> iva, bool renormalize) {
    if (nsims.size() != dweights.size())
        throw std::invalid_argument("overall_neighbor_similarity: weight count mismatch");
    if (!iva.empty() && iva.size() != nsims.size())
        throw std::invalid_argument("overall_neighbor_similarity: iva count mismatch");
    double acc = 0.0;
    for (std::size_t r = 0; r < nsims.size(); ++r) {
        double term = nsims[r] * dweights[r];
        if (!iva.empty()) term *= iva[r];
        acc += term;
    }
    if (renormalize && !iva.empty()) {
        double z = 0.0;
        for (std::size_t r = 0; r < nsims.size(); ++r) z += iva[r] * dweights[r];
        if (z > 0.0) acc /= z;
    }
    return acc;
}

double overall_keyframe_similarity(std::span<const double> ksims) {
    if (ksims.empty())
        throw std::invalid_argument("overall_keyframe_similarity: no keyframe similarities");
    return *std::max_element(ksims.begin(), ksims.end());
}

SpoilerScore predict(const NeighborContext& ctx, const SbnConfig& config) {
    ad::Tape tape;
    ScoreGraphInputs in;
    in.target = tape.vector(ctx.target);
    in.target_time = ctx.target_time;
    in.neighbor_times = ctx.neighbor_times;
    for (const auto& n : ctx.neighbors) in.neighbors.push_back(tape.vector(n));
    for (const auto& k : ctx.keyframes) in.keyframes.push_back(tape.vector(k));
    ScoreGraph g = build_score_graph(tape, in, config);
    return score_from_graph(g);
}

double bce_loss(double probability, int label) {
    double p = label == 1 ? probability : 1.0 - probability;
    return -std::log(std::max(p, 1e-12));
}

ad::Value iva_weights_graph(std::span<const ad::Value> neighbors, double variance_eps,
                            double norm_eps) {
    if (neighbors.size() < 2)
        throw std::invalid_argument("iva_weights: need at least 2 neighbors");
    const std::size_t r = neighbors.size();
    // Row r of the pairwise-cosine matrix, softmax-normalized; its variance
    // measures how concentrated neighbor r's similarity distribution is.
    std::vector<ad::Value> inv_vars;
    inv_vars.reserve(r);
    for (std::size_t i = 0; i < r; ++i) {
        std::vector<ad::Value> row;
        row.reserve(r);
        for (std::size_t j = 0; j < r; ++j)
            row.push_back(ad::cosine_sim(neighbors[i], neighbors[j], norm_eps));
        ad::Value normalized = ad::softmax(ad::stack(row));
        ad::Value var = ad::variance(normalized);
        inv_vars.push_back(ad::reciprocal(ad::affine(var, 1.0, variance_eps)));
    }
    return ad::softmax(ad::stack(inv_vars));
}

ScoreGraph build_score_graph(ad::Tape& tape, const ScoreGraphInputs& in, const SbnConfig& config) {
    if (in.keyframes.empty())
        throw std::invalid_argument("build_score_graph: at least one keyframe vector required");
    if (in.neighbors.size() != in.neighbor_times.size())
        throw std::invalid_argument("build_score_graph: neighbor timestamp count mismatch");

    ScoreGraph g;

    // Keyframe branch: max of per-keyframe cosines.
    {
        std::vector<ad::Value> ksims;
        ksims.reserve(in.keyframes.size());
        for (const auto& kf : in.keyframes)
            ksims.push_back(ad::cosine_sim(kf, in.target, config.norm_eps));
        g.keyframe_sims = ad::stack(ksims);
        g.g_ksim = ad::max_index_select(g.keyframe_sims);
    }

    // Neighbor branch.
    if (!in.neighbors.empty()) {
        std::vector<ad::Value> nsims;
        nsims.reserve(in.neighbors.size());
        for (const auto& nb : in.neighbors)
            nsims.push_back(ad::cosine_sim(nb, in.target, config.norm_eps));
        g.neighbor_sims = ad::stack(nsims);

        double beta = config.use_decay ? config.beta : 0.0;
        g.decay = decay_weights(in.neighbor_times, in.target_time, beta,
                                config.decay_exponent_sign);
        ad::Value dweights = tape.vector(g.decay);

        ad::Value weighted = ad::mul(g.neighbor_sims, dweights);
        if (config.use_iva) {
            g.iva = iva_weights_graph(in.neighbors, config.variance_eps, config.norm_eps);
            weighted = ad::mul(weighted, g.iva);
            g.g_nsim = ad::dot(weighted, tape.vector(Vec(in.neighbors.size(), 1.0)));
            if (config.renormalize_iva) {
                ad::Value z = ad::dot(ad::mul(g.iva, dweights),
                                      tape.vector(Vec(in.neighbors.size(), 1.0)));
                g.g_nsim = ad::mul(g.g_nsim, ad::reciprocal(z));
            }
        } else {
            g.g_nsim = ad::dot(weighted, tape.vector(Vec(in.neighbors.size(), 1.0)));
        }
    } else {
        g.g_nsim = tape.scalar(0.0);
    }

    g.probability = ad::sigmoid(ad::sub(g.g_ksim, g.g_nsim));
    return g;
}

ad::Value bce_loss_graph(const ad::Value& probability, int label) {
    if (label == 1) return ad::scale(ad::log(probability), -1.0);
    return ad::scale(ad::log(ad::affine(probability, -1.0, 1.0)), -1.0);
}

std::vector<std::size_t> former_neighbor_indices(std::size_t target_index, std::size_t r) {
    std::vector<std::size_t> idx;
    if (target_index == 0 || r == 0) return idx;
    idx.reserve(r);
    std::size_t available = target_index;  // records [0, target_index)
    if (available >= r) {
        for (std::size_t k = target_index - r; k < target_index; ++k) idx.push_back(k);
    } else {
        // Left-pad by repeating the earliest available comment.
        for (std::size_t k = 0; k < r - available; ++k) idx.push_back(0);
        for (std::size_t k = 0; k < available; ++k) idx.push_back(k);
    }
    return idx;
}

SpoilerScore score_from_graph(const ScoreGraph& g) {
    SpoilerScore s;
    s.probability = g.probability.scalar();
    s.g_nsim = g.g_nsim.scalar();
    s.g_ksim = g.g_ksim.scalar();
    s.keyframe_sims = g.keyframe_sims.data();
    if (g.neighbor_sims.valid()) s.neighbor_sims = g.neighbor_sims.data();
    if (g.iva.valid()) s.iva_weights = g.iva.data();
    s.decay_weights = g.decay;
    return s;
}

}  // namespace sbniva
