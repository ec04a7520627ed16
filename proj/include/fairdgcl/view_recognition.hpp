#pragma once

#include "fairdgcl/encoder.hpp"
#include "fairdgcl/graph.hpp"
#include "fairdgcl/mlp.hpp"
#include "fairdgcl/rng.hpp"

#include <optional>
#include <vector>

namespace fairdgcl {

/// Learned edge scorer: one MLP mapping [h_u | h_v] (2d inputs) to a scalar
/// fairness weight, shared across propagation layers.
struct EdgeScorerParams {
    Mlp mlp;
};

EdgeScorerParams init_edge_scorer(int dim, int hidden, Rng& rng);

/// Scalar scorer on a single pair; higher means the edge is more likely
/// critical and preserved. The concatenation order (u first) matters: the
/// MLP is not symmetric in its two halves.
double edge_weight(const Vec& h_u, const Vec& h_v, const EdgeScorerParams& params);

/// Concrete relaxation of the per-edge Bernoulli keep decision:
///   p = sigmoid((logit(eta) + w) / tau_r), strictly inside (0,1).
double gumbel_keep_prob(double w, double eta, double tau_r);

/// Forward state of one recognition-view generation, kept for the backward
/// pass. Keep weights are per edge, per layer l in 0..L-1, computed from the
/// layer-l embeddings of the plain graph.
struct RecognitionForward {
    AugmentedView view;
    Mat w;    // n_edges x L raw scorer outputs
    Mat eta;  // n_edges x L sampled uniforms
    std::vector<MlpCache> caches;  // one per layer
    double tau_r = 0.2;
};

/// Draws eta ~ Uniform(0,1) per edge and layer (or uses `fixed_eta` in debug
/// mode) and emits the soft keep weights.
RecognitionForward generate_view_g1(const InteractionGraph& graph, const LayerStack& stack,
                                    const EdgeScorerParams& params, double tau_r, Rng& rng,
                                    std::optional<double> fixed_eta = std::nullopt);

/// Backward through the keep weights: accumulates scorer-parameter gradients
/// into `grads` and the scorer-input gradients into `extra_ds[l]` (the
/// caller's per-layer embedding gradients, sized like the stack layers).
void g1_backward(const InteractionGraph& graph, const RecognitionForward& fwd,
                 const EdgeScorerParams& params, const Mat& d_keep, MlpGrads& grads,
                 std::vector<Mat>& extra_ds);

}  // namespace fairdgcl
