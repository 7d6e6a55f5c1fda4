#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sbniva/autodiff.hpp"
#include "sbniva/common.hpp"

namespace sbniva {

struct SbnConfig {
    bool use_iva = true;    // variance attention over neighbors
    bool use_decay = true;  // false -> uniform neighbor weights (the -WT ablation)
    double beta = 0.15;     // time decay rate
    // -1: weight falls as the time gap grows (the intended behavior).
    // +1: compatibility mode where weight grows with the gap.
    int decay_exponent_sign = -1;
    // The variance-attention weighted sum is kept as a plain sum (no
    // renormalization), so with IVA the overall neighbor similarity is a
    // sub-convex combination. Optional renormalization for experiments.
    bool renormalize_iva = false;
    double variance_eps = 1e-8;  // added to row variances before reciprocal
    double norm_eps = 1e-8;      // added to norms in cosine similarities
};

// Target comment plus its R former neighbors (time-ordered, all timestamps
// <= target_time) and the video's keyframe vectors.
struct NeighborContext {
    Vec target;
    double target_time = 0.0;
    std::vector<Vec> neighbors;
    std::vector<double> neighbor_times;
    std::vector<Vec> keyframes;
};

struct SpoilerScore {
    double probability = 0.0;  // sigmoid(g_ksim - g_nsim)
    double g_nsim = 0.0;       // overall neighbor similarity
    double g_ksim = 0.0;       // overall keyframe similarity
    std::vector<double> neighbor_sims;   // per-neighbor cosine to the target
    std::vector<double> keyframe_sims;   // per-keyframe cosine to the target
    std::vector<double> decay_weights;   // sums to 1
    std::vector<double> iva_weights;     // sums to 1; empty when IVA is off
};

// Softmax over -beta * (target_time - t_r) (with exponent_sign == -1).
// beta == 0 gives uniform weights.
std::vector<double> decay_weights(std::span<const double> neighbor_times, double target_time,
                                  double beta, int exponent_sign = -1);

// Cosine similarity between the target and each neighbor, in [-1, 1].
std::vector<double> neighbor_similarities(const NeighborContext& ctx, double norm_eps = 1e-8);

// Variance attention: pairwise neighbor cosines, row-softmax, per-row
// variance, then softmax of the reciprocal variances. A neighbor whose
// similarity row is concentrated (weakly related to the others) gets a low
// weight. Requires at least 2 neighbors.
std::vector<double> iva_weights(std::span<const Vec> neighbor_vectors, double variance_eps = 1e-8,
                                double norm_eps = 1e-8);

// Without IVA: sum_r nsim_r * dweight_r. With IVA: sum_r iva_r * nsim_r *
// dweight_r (optionally renormalized by sum_r iva_r * dweight_r).
double overall_neighbor_similarity(std::span<const double> nsims,
                                   std::span<const double> dweights,
                                   std::span<const double> iva = {}, bool renormalize = false);

// Maximum keyframe similarity.
double overall_keyframe_similarity(std::span<const double> ksims);

// Full scoring path; also usable with zero neighbors at inference time, where
// the neighbor term is 0 and probability = sigmoid(g_ksim).
SpoilerScore predict(const NeighborContext& ctx, const SbnConfig& config);

double bce_loss(double probability, int label);

// -- differentiable graph construction for training --------------------------

struct ScoreGraphInputs {
    ad::Value target;
    std::vector<ad::Value> neighbors;
    std::vector<double> neighbor_times;
    double target_time = 0.0;
    std::vector<ad::Value> keyframes;
};

struct ScoreGraph {
    ad::Value probability;
    ad::Value g_nsim;
    ad::Value g_ksim;
    ad::Value neighbor_sims;  // vector node, empty Value when no neighbors
    ad::Value keyframe_sims;  // vector node
    ad::Value iva;            // vector node, empty Value when IVA off
    std::vector<double> decay;
};

ad::Value iva_weights_graph(std::span<const ad::Value> neighbors, double variance_eps,
                            double norm_eps);

ScoreGraph build_score_graph(ad::Tape& tape, const ScoreGraphInputs& in, const SbnConfig& config);

ad::Value bce_loss_graph(const ad::Value& probability, int label);

// Indices of the R former neighbors of records[target_index] in a
// time-sorted stream, left-padded with the earliest predecessor when fewer
// than R exist. Empty when the target has no predecessor.
std::vector<std::size_t> former_neighbor_indices(std::size_t target_index, std::size_t r);

SpoilerScore score_from_graph(const ScoreGraph& g);

}  // namespace sbniva
