#pragma once

#include "fairdgcl/common.hpp"
#include "fairdgcl/graph.hpp"
#include "fairdgcl/rng.hpp"

#include <vector>

namespace fairdgcl {

/// LightGCN parameters: the base embedding table is the only learned tensor,
/// propagation itself has no weights.
struct EncoderParams {
    Mat e0;            // (n_users + n_items) x d
    int n_layers = 2;  // L
};

EncoderParams init_encoder(int n_nodes, int dim, int n_layers, Rng& rng);

/// All layer outputs h^(0..L) plus their uniform mean. h^(l+1) = A_hat_l h^(l)
/// where A_hat_l applies the view's layer-l keep weights (all ones for the
/// plain graph).
struct LayerStack {
    std::vector<Mat> layers;
    Mat mean;
    int n_layers() const { return static_cast<int>(layers.size()) - 1; }
};

LayerStack propagate_layers(const InteractionGraph& g, const AugmentedView* view,
                            const EncoderParams& params);

/// Final embedding table only.
Mat propagate(const InteractionGraph& g, const EncoderParams& params);
Mat propagate(const AugmentedView& view, const EncoderParams& params);

/// Gradients of a scalar loss through a propagation, given d(loss)/d(mean
/// table). `extra_ds`, when set, injects additional per-layer gradients (one
/// Mat per layer 0..L) that other consumers of the stack contributed.
/// `d_keep`, when set, receives gradients for the view's keep weights and
/// must be pre-sized to match view.keep_weights.
Mat propagate_backward(const InteractionGraph& g, const AugmentedView* view,
                       const LayerStack& stack, const Mat& d_mean,
                       const std::vector<Mat>* extra_ds = nullptr, Mat* d_keep = nullptr);

/// Predicted preference: inner product of the user row and the item row.
double score(const Mat& h, int n_users, int user, int item);

/// Eq-style pairwise ranking loss: -log sigmoid(y_pos - y_neg), computed via
/// softplus so saturated scores cannot produce -inf.
double bpr_loss(double y_pos, double y_neg);

/// d(loss)/d(y_pos); the y_neg gradient is its negation.
double bpr_grad_pos(double y_pos, double y_neg);

struct Triple {
    int user;
    int pos_item;
    int neg_item;
};

/// Mean BPR loss over a batch of triples scored against `h`. When `dh` is
/// non-null, accumulates the gradient (scaled by `loss_scale`) into it.
double bpr_batch(const Mat& h, int n_users, const std::vector<Triple>& triples,
                 Mat* dh = nullptr, double loss_scale = 1.0);

}  // namespace fairdgcl
