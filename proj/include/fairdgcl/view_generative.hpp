#pragma once

#include "fairdgcl/encoder.hpp"
#include "fairdgcl/graph.hpp"
#include "fairdgcl/mlp.hpp"
#include "fairdgcl/rng.hpp"

#include <utility>
#include <vector>

namespace fairdgcl {

/// Variational graph autoencoder. The encoder is a two-step GCN (one hidden
/// layer, then linear mean / log-variance heads); the decoder transforms
/// latent codes with an MLP before the inner-product edge score.
struct VgaeParams {
    Mat w_in;      // d x hidden
    Mat w_mu;      // hidden x d_z
    Mat w_logvar;  // hidden x d_z
    Mlp decoder;   // d_z -> d_z, tanh output
};

VgaeParams init_vgae(int dim, int hidden, int latent_dim, Rng& rng);

struct VgaeEncodeCache {
    Mat t0;      // A_hat X
    Mat hidden;  // relu(t0 w_in)
    Mat t1;      // A_hat hidden
};

/// mu, log(sigma^2) from node features X over the plain graph.
std::pair<Mat, Mat> vgae_encode(const Mat& x, const InteractionGraph& graph,
                                const VgaeParams& params, VgaeEncodeCache* cache = nullptr);

/// Z = mu + exp(logvar / 2) .* noise
Mat reparameterize(const Mat& mu, const Mat& logvar, const Mat& noise);

/// Edge probabilities sigmoid(dec(z_u) . dec(z_v)) for the given node pairs.
std::vector<double> vgae_decode(const Mat& z, const std::vector<std::pair<int, int>>& pairs,
                                const VgaeParams& params);

/// Negative ELBO as a minimization target: mean binary cross-entropy over
/// observed edges (label 1) and sampled negative pairs (label 0), plus the
/// per-node mean of KL(q || N(0,I)) = -1/2 sum(1 + logvar - mu^2 - e^logvar).
double elbo_loss(const InteractionGraph& graph, const Mat& mu, const Mat& logvar, const Mat& z,
                 const VgaeParams& params, const std::vector<std::pair<int, int>>& neg_pairs);

/// KL term alone (same normalization as elbo_loss).
double kl_term(const Mat& mu, const Mat& logvar);

struct GenerativeForward {
    AugmentedView view;  // single keep column (reconstruction prob per edge)
    VgaeEncodeCache enc;
    Mat mu, logvar, noise, z;
    MlpCache dec_cache;
    Mat q;  // decoded codes, n_nodes x d_z
    std::vector<std::pair<int, int>> neg_pairs;
    std::vector<double> pos_probs;
    std::vector<double> neg_probs;
    double loss_vgae = 0.0;
};

/// Encodes X on the plain graph, samples Z, decodes reconstruction
/// probabilities for every training edge (those become the keep weights,
/// reused across layers) and for `neg_per_pos` sampled non-edges per edge,
/// and evaluates the negative ELBO.
GenerativeForward generate_view_g2(const InteractionGraph& graph, const Mat& x,
                                   const VgaeParams& params, Rng& rng, int neg_per_pos = 1);

struct VgaeGrads {
    Mat w_in;
    Mat w_mu;
    Mat w_logvar;
    MlpGrads decoder;
};

VgaeGrads make_zero_vgae_grads(const VgaeParams& params);

/// Backward through the ELBO and the keep-weight uses of the reconstruction
/// probabilities. `d_keep_total` is d(loss)/d(keep_e) summed over layers
/// (zero-size to skip); `elbo_scale` scales the ELBO's own contribution.
/// Returns d(loss)/dX.
Mat g2_backward(const InteractionGraph& graph, const GenerativeForward& fwd,
                const VgaeParams& params, const Mat& d_keep_total, double elbo_scale,
                VgaeGrads& grads);

}  // namespace fairdgcl
