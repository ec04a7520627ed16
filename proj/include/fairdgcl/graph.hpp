#pragma once

#include "fairdgcl/common.hpp"

#include <utility>
#include <vector>

namespace fairdgcl {

struct Edge {
    int user = 0;
    int item = 0;  // item index in [0, n_items), not the node id
    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Bipartite user-item graph with symmetric-normalized adjacency in CSR form
/// over the (n_users + n_items)-node vertex set. Rows 0..n_users-1 are users,
/// the rest items. Immutable after construction; safe to share across threads.
class InteractionGraph {
public:
    InteractionGraph() = default;
    InteractionGraph(std::vector<Edge> edges, int n_users, int n_items);

    int n_users() const { return n_users_; }
    int n_items() const { return n_items_; }
    int n_nodes() const { return n_users_ + n_items_; }
    int n_edges() const { return static_cast<int>(edges_.size()); }
    int item_node(int item) const { return n_users_ + item; }

    const std::vector<Edge>& edges() const { return edges_; }
    int degree(int node) const { return degrees_[node]; }

    // CSR accessors (nnz == 2 * n_edges, both directions stored).
    const std::vector<int>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_idx() const { return col_idx_; }
    const std::vector<double>& norm_val() const { return norm_val_; }
    /// Canonical edge index of each stored nonzero; (u,v) and (v,u) share it.
    const std::vector<int>& nz_edge() const { return nz_edge_; }
    /// Per canonical edge: 1/sqrt(deg(u) * deg(v)).
    const std::vector<double>& edge_norm() const { return edge_norm_; }

    /// Dense normalized adjacency entry; O(log deg) lookup.
    double norm_adjacency(int node_i, int node_j) const;

    /// True when (user, item) is one of this graph's edges. O(log deg).
    bool has_edge(int user, int item) const;

private:
    int n_users_ = 0;
    int n_items_ = 0;
    std::vector<Edge> edges_;
    std::vector<int> degrees_;
    std::vector<int> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<double> norm_val_;
    std::vector<int> nz_edge_;
    std::vector<double> edge_norm_;
};

/// Checks ids and duplicates, then builds the CSR structure.
InteractionGraph build_graph(std::vector<Edge> train_edges, int n_users, int n_items);

/// A soft augmentation of a graph's edge set: every training edge carries a
/// keep weight per propagation layer (one column broadcasts to all layers).
struct AugmentedView {
    enum class Source { recognition, generative };

    const InteractionGraph* graph = nullptr;
    Source source = Source::recognition;
    /// n_edges x L (or x 1); entry (e, l) scales the adjacency of edge e in
    /// layer l of propagation.
    Mat keep_weights;

    double keep(int edge, int layer) const {
        const int col = keep_weights.cols() == 1 ? 0 : layer;
        return keep_weights(edge, col);
    }
};

}  // namespace fairdgcl
