#include "fairdgcl/kernels.hpp"

#include <atomic>

namespace fairdgcl::kernels {

namespace {
std::atomic<bool> g_parallel{true};

// One row per thread keeps every output element's accumulation order fixed,
// so serial and OpenMP variants agree bit for bit.
template <bool Keep>
void spmm_rows(const InteractionGraph& g, const double* keep, const Mat& x, Mat& y,
               int row_begin, int row_end) {
    const auto& row_ptr = g.row_ptr();
    const auto& col_idx = g.col_idx();
    const auto& norm_val = g.norm_val();
    const auto& nz_edge = g.nz_edge();
    for (int i = row_begin; i < row_end; ++i) {
        auto out = y.row(i);
        out.setZero();
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            double w = norm_val[k];
            if constexpr (Keep) w *= keep[nz_edge[k]];
            out += w * x.row(col_idx[k]);
        }
    }
}

void scatter_rows(const InteractionGraph& g, const Mat& dx, Mat& ds, int row_begin,
                  int row_end) {
    const auto& row_ptr = g.row_ptr();
    const auto& nz_edge = g.nz_edge();
    const int d = static_cast<int>(ds.cols());
    const int n_users = g.n_users();
    for (int i = row_begin; i < row_end; ++i) {
        auto acc = ds.row(i);
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            const int e = nz_edge[k];
            // Row i is the user side of edge e iff i < n_users.
            const int offset = i < n_users ? 0 : d;
            acc += dx.row(e).segment(offset, d);
        }
    }
}
}  // namespace

void set_parallel(bool enabled) { g_parallel.store(enabled); }
bool parallel_enabled() { return g_parallel.load(); }

namespace serial {

void spmm(const InteractionGraph& g, const double* keep, const Mat& x, Mat& y) {
    y.resize(x.rows(), x.cols());
    if (keep) {
        spmm_rows<true>(g, keep, x, y, 0, g.n_nodes());
    } else {
        spmm_rows<false>(g, nullptr, x, y, 0, g.n_nodes());
    }
}

void edge_keep_grad(const InteractionGraph& g, const Mat& grad_out, const Mat& s,
                    double* dkeep) {
    const auto& edges = g.edges();
    const auto& edge_norm = g.edge_norm();
    for (int e = 0; e < g.n_edges(); ++e) {
        const int u = edges[e].user;
        const int v = g.item_node(edges[e].item);
        dkeep[e] += edge_norm[e] *
                    (grad_out.row(u).dot(s.row(v)) + grad_out.row(v).dot(s.row(u)));
    }
}

void scatter_pair_input_grad(const InteractionGraph& g, const Mat& dx, Mat& ds) {
    scatter_rows(g, dx, ds, 0, g.n_nodes());
}

}  // namespace serial

namespace omp {

void spmm(const InteractionGraph& g, const double* keep, const Mat& x, Mat& y) {
    y.resize(x.rows(), x.cols());
    const int n = g.n_nodes();
    if (keep) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) spmm_rows<true>(g, keep, x, y, i, i + 1);
    } else {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) spmm_rows<false>(g, nullptr, x, y, i, i + 1);
    }
}

void edge_keep_grad(const InteractionGraph& g, const Mat& grad_out, const Mat& s,
                    double* dkeep) {
    const auto& edges = g.edges();
    const auto& edge_norm = g.edge_norm();
    const int ne = g.n_edges();
#pragma omp parallel for schedule(static)
    for (int e = 0; e < ne; ++e) {
        const int u = edges[e].user;
        const int v = g.item_node(edges[e].item);
        dkeep[e] += edge_norm[e] *
                    (grad_out.row(u).dot(s.row(v)) + grad_out.row(v).dot(s.row(u)));
    }
}

void scatter_pair_input_grad(const InteractionGraph& g, const Mat& dx, Mat& ds) {
    const int n = g.n_nodes();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) scatter_rows(g, dx, ds, i, i + 1);
}

}  // namespace omp

void spmm(const InteractionGraph& g, const double* keep, const Mat& x, Mat& y) {
    parallel_enabled() ? omp::spmm(g, keep, x, y) : serial::spmm(g, keep, x, y);
}

void edge_keep_grad(const InteractionGraph& g, const Mat& grad_out, const Mat& s,
                    double* dkeep) {
    parallel_enabled() ? omp::edge_keep_grad(g, grad_out, s, dkeep)
                       : serial::edge_keep_grad(g, grad_out, s, dkeep);
}

void scatter_pair_input_grad(const InteractionGraph& g, const Mat& dx, Mat& ds) {
    parallel_enabled() ? omp::scatter_pair_input_grad(g, dx, ds)
                       : serial::scatter_pair_input_grad(g, dx, ds);
}

void gather_pair_inputs(const InteractionGraph& g, const Mat& s, Mat& x) {
    const int d = static_cast<int>(s.cols());
    const int ne = g.n_edges();
    x.resize(ne, 2 * d);
    const auto& edges = g.edges();
#pragma omp parallel for schedule(static) if (parallel_enabled())
    for (int e = 0; e < ne; ++e) {
        x.row(e).segment(0, d) = s.row(edges[e].user);
        x.row(e).segment(d, d) = s.row(g.item_node(edges[e].item));
    }
}

}  // namespace fairdgcl::kernels
