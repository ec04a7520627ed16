#pragma once

#include "fairdgcl/common.hpp"
#include "fairdgcl/graph.hpp"

namespace fairdgcl::kernels {

/// Global switch between the OpenMP kernels and the serial reference ones.
/// Both produce bit-identical output; tests assert that and the benchmark
/// tool compares their throughput.
void set_parallel(bool enabled);
bool parallel_enabled();

namespace serial {

/// Y = A_hat * X, where A_hat is the symmetric-normalized adjacency with the
/// optional per-edge multiplier `keep` (length n_edges; nullptr = all ones).
void spmm(const InteractionGraph& g, const double* keep, const Mat& x, Mat& y);

/// Gradient of sum_ij G(i,j) * Y(i,j) with respect to each edge's keep
/// weight, where Y = A_hat(keep) * S:
///   dkeep[e=(u,v)] = edge_norm[e] * (G.row(u) . S.row(v') + G.row(v') . S.row(u))
/// with v' the item node. Accumulates into dkeep.
void edge_keep_grad(const InteractionGraph& g, const Mat& grad_out, const Mat& s,
                    double* dkeep);

/// Backward of building per-edge concatenated inputs [S.row(u) | S.row(v')]:
/// scatters dX (n_edges x 2d) back into dS (n_nodes x d). Accumulates.
void scatter_pair_input_grad(const InteractionGraph& g, const Mat& dx, Mat& ds);

}  // namespace serial

namespace omp {

void spmm(const InteractionGraph& g, const double* keep, const Mat& x, Mat& y);
void edge_keep_grad(const InteractionGraph& g, const Mat& grad_out, const Mat& s,
                    double* dkeep);
void scatter_pair_input_grad(const InteractionGraph& g, const Mat& dx, Mat& ds);

}  // namespace omp

// Dispatchers honoring set_parallel().
void spmm(const InteractionGraph& g, const double* keep, const Mat& x, Mat& y);
void edge_keep_grad(const InteractionGraph& g, const Mat& grad_out, const Mat& s,
                    double* dkeep);
void scatter_pair_input_grad(const InteractionGraph& g, const Mat& dx, Mat& ds);

/// Builds the n_edges x 2d matrix of per-edge scorer inputs [h_u | h_v].
void gather_pair_inputs(const InteractionGraph& g, const Mat& s, Mat& x);

}  // namespace fairdgcl::kernels
