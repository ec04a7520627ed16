#include "fairdgcl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace fairdgcl {

InteractionGraph::InteractionGraph(std::vector<Edge> edges, int n_users, int n_items)
    : n_users_(n_users), n_items_(n_items), edges_(std::move(edges)) {
    const int n = n_nodes();
    degrees_.assign(n, 0);
    for (const Edge& e : edges_) {
        if (e.user < 0 || e.user >= n_users_ || e.item < 0 || e.item >= n_items_) {
            throw DataError("edge (" + std::to_string(e.user) + "," + std::to_string(e.item) +
                            ") references an invalid id");
        }
        ++degrees_[e.user];
        ++degrees_[item_node(e.item)];
    }

    row_ptr_.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) row_ptr_[i + 1] = row_ptr_[i] + degrees_[i];
    const int nnz = row_ptr_[n];
    col_idx_.assign(nnz, 0);
    norm_val_.assign(nnz, 0.0);
    nz_edge_.assign(nnz, 0);
    edge_norm_.assign(edges_.size(), 0.0);

    std::vector<int> cursor(row_ptr_.begin(), row_ptr_.end() - 1);
    for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
        const int u = edges_[e].user;
        const int v = item_node(edges_[e].item);
        const double norm = 1.0 / std::sqrt(static_cast<double>(degrees_[u]) * degrees_[v]);
        edge_norm_[e] = norm;
        col_idx_[cursor[u]] = v;
        norm_val_[cursor[u]] = norm;
        nz_edge_[cursor[u]++] = e;
        col_idx_[cursor[v]] = u;
        norm_val_[cursor[v]] = norm;
        nz_edge_[cursor[v]++] = e;
    }

    // Sort each CSR row by column so neighbor lookups can bisect.
    std::vector<std::tuple<int, double, int>> row;
    for (int i = 0; i < n; ++i) {
        row.clear();
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            row.emplace_back(col_idx_[k], norm_val_[k], nz_edge_[k]);
        }
        std::sort(row.begin(), row.end());
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const auto& [c, w, e] = row[k - row_ptr_[i]];
            col_idx_[k] = c;
            norm_val_[k] = w;
            nz_edge_[k] = e;
        }
    }
}

double InteractionGraph::norm_adjacency(int node_i, int node_j) const {
    const auto begin = col_idx_.begin() + row_ptr_[node_i];
    const auto end = col_idx_.begin() + row_ptr_[node_i + 1];
    const auto it = std::lower_bound(begin, end, node_j);
    if (it != end && *it == node_j) return norm_val_[it - col_idx_.begin()];
    return 0.0;
}

bool InteractionGraph::has_edge(int user, int item) const {
    const auto begin = col_idx_.begin() + row_ptr_[user];
    const auto end = col_idx_.begin() + row_ptr_[user + 1];
    const int v = item_node(item);
    const auto it = std::lower_bound(begin, end, v);
    return it != end && *it == v;
}

InteractionGraph build_graph(std::vector<Edge> train_edges, int n_users, int n_items) {
    std::unordered_set<std::int64_t> seen;
    seen.reserve(train_edges.size() * 2);
    for (const Edge& e : train_edges) {
        const std::int64_t key = static_cast<std::int64_t>(e.user) * n_items + e.item;
        if (!seen.insert(key).second) {
            throw DataError("duplicate edge (" + std::to_string(e.user) + "," +
                            std::to_string(e.item) + ")");
        }
    }
    return InteractionGraph(std::move(train_edges), n_users, n_items);
}

}  // namespace fairdgcl
