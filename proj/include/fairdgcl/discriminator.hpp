#pragma once

#include "fairdgcl/common.hpp"
#include "fairdgcl/mlp.hpp"
#include "fairdgcl/rng.hpp"

#include <vector>

namespace fairdgcl {

/// User-level attribute classifier over the fused view embeddings. One shared
/// discriminator serves both views (the fused input couples them).
struct DiscriminatorParams {
    Mlp mlp;  // d -> hidden -> hidden -> 1, relu hidden layers
};

DiscriminatorParams init_discriminator(int dim, int hidden, Rng& rng);

/// Element-wise mean of the user rows of the two view embeddings.
Mat fuse_user_embeddings(const Mat& h1, const Mat& h2, int n_users);

/// Per-user sigmoid(MLP(fused row)).
Vec predict_attribute(const Mat& fused, const DiscriminatorParams& params,
                      MlpCache* cache = nullptr);

/// Mean binary cross-entropy of predicted attribute probabilities against the
/// 0/1 labels; probabilities are clamped to [1e-7, 1 - 1e-7].
double vd_loss(const Vec& s_tilde, const std::vector<int>& s);

/// Analytic d(vd_loss)/d(s_tilde_i) = (s_tilde_i - s_i) / (s_tilde_i (1 - s_tilde_i)) / |U|.
Vec vd_loss_grad(const Vec& s_tilde, const std::vector<int>& s);

/// d(vd_loss)/d(logit_i) = (sigmoid(logit_i) - s_i) / |U|; the stable form
/// used for training.
Vec vd_loss_grad_logits(const Vec& s_tilde, const std::vector<int>& s);

/// Fraction of users where thresholding s_tilde at 0.5 matches s.
double attribute_accuracy(const Vec& s_tilde, const std::vector<int>& s);

/// Rank-based AUC of s_tilde against s (ties share average ranks).
double attribute_auc(const Vec& s_tilde, const std::vector<int>& s);

}  // namespace fairdgcl
