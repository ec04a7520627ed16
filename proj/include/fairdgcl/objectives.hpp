#pragma once

#include "fairdgcl/encoder.hpp"
#include "fairdgcl/graph.hpp"

#include <vector>

namespace fairdgcl {

/// Per-step loss bookkeeping. `total` always satisfies
/// total = l_bpr_main + (l_vgae + l_bpr_rec + l_bpr_gen + alpha*l_nce) - beta*l_vd.
struct LossBreakdown {
    double l_bpr_main = 0.0;
    double l_bpr_rec = 0.0;
    double l_bpr_gen = 0.0;
    double l_vgae = 0.0;
    double l_nce = 0.0;
    double l_vd = 0.0;
    double total = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

/// L_VGAE + L_BPR_rec + L_BPR_gen + alpha * L_NCE
double generator_loss(double l_vgae, double l_bpr_rec, double l_bpr_gen, double l_nce,
                      double alpha);

/// L_BPR + L_VG - beta * L_VD
double total_objective(double l_bpr_main, double l_vg, double l_vd, double beta);

/// Contrastive alignment of the same node across the two views against
/// in-batch negatives:
///   mean_i -log( exp(cos(H1_i, H2_i)/tau) / sum_j exp(cos(H1_i, H2_j)/tau) ).
/// The denominator includes j = i by default; `include_self=false` restores
/// the strict sum over j != i. Zero-norm rows are dropped with a warning.
/// When `d_h1`/`d_h2` are non-null the gradient (scaled by `grad_scale`) is
/// accumulated into them.
double info_nce(const Mat& h1, const Mat& h2, double tau, const std::vector<int>& node_batch,
                bool include_self = true, Mat* d_h1 = nullptr, Mat* d_h2 = nullptr,
                double grad_scale = 1.0);

/// BPR over scores computed from a propagation of the augmented view
/// (task-guide loss for one generator).
double task_bpr_for_view(const AugmentedView& view, const EncoderParams& params,
                         const std::vector<Triple>& triples);

}  // namespace fairdgcl
