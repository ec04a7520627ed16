#pragma once

#include "fairdgcl/dataset.hpp"
#include "fairdgcl/graph.hpp"
#include "fairdgcl/rng.hpp"

#include <functional>
#include <map>
#include <set>
#include <vector>

namespace fairdgcl::test {

/// Central finite difference of a scalar function.
inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel_err(double got, double want) {
    const double denom = std::max({std::abs(got), std::abs(want), 1e-12});
    return std::abs(got - want) / denom;
}

/// Star: user 0 linked to items 0..3 (1 user, 4 items).
inline InteractionGraph star_graph() {
    return build_graph({{0, 0}, {0, 1}, {0, 2}, {0, 3}}, 1, 4);
}

/// Small bipartite toy: 3 users x 3 items, 6 edges, every node has degree >= 1.
inline InteractionGraph toy_graph() {
    return build_graph({{0, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 0}, {2, 2}}, 3, 3);
}

inline Mat random_mat(int rows, int cols, Rng& rng, double scale = 1.0) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
    return m;
}

/// Dense normalized adjacency, the independent reference for the sparse
/// kernels: A[i][j] = keep(e) / sqrt(deg_i deg_j) for each edge.
inline Mat dense_norm_adjacency(const InteractionGraph& g, const Mat* keep = nullptr,
                                int layer = 0) {
    Mat a = Mat::Zero(g.n_nodes(), g.n_nodes());
    for (int e = 0; e < g.n_edges(); ++e) {
        const Edge& edge = g.edges()[e];
        const int u = edge.user;
        const int v = g.item_node(edge.item);
        double w = g.edge_norm()[e];
        if (keep) w *= (*keep)(e, keep->cols() == 1 ? 0 : layer);
        a(u, v) = w;
        a(v, u) = w;
    }
    return a;
}

/// Synthetic biased interactions: two equal user groups, each preferring a
/// disjoint half of the items, with `crossover` probability of interacting
/// across the boundary. Deterministic in the seed.
struct PlantedBias {
    std::vector<InteractionRecord> records;
    SensitivePartition partition;
    int n_users;
    int n_items;
};

inline PlantedBias planted_bias(int n_users, int n_items, int per_user, double crossover,
                                std::uint64_t seed) {
    PlantedBias out;
    out.n_users = n_users;
    out.n_items = n_items;
    std::vector<int> labels(n_users);
    for (int u = 0; u < n_users; ++u) labels[u] = u < n_users / 2 ? 0 : 1;
    out.partition = partition_users(labels);

    Rng rng(derive_seed(seed, "planted"));
    std::set<std::pair<int, int>> seen;
    for (int u = 0; u < n_users; ++u) {
        const int half = n_items / 2;
        while (static_cast<int>(seen.size()) < (u + 1) * per_user) {
            const bool cross = rng.uniform() < crossover;
            const bool own_half = (labels[u] == 0) != cross;
            const int item = (own_half ? 0 : half) + static_cast<int>(rng.below(half));
            if (seen.insert({u, item}).second) {
                out.records.push_back({u, item, std::nullopt, std::nullopt});
            }
        }
    }
    return out;
}

/// Brute-force metric reference: plain loops and sets, no shared code with
/// evaluate() beyond the tie rule it must reproduce.
struct BruteForceMetrics {
    double recall = 0.0;
    double ndcg = 0.0;
    double phi_r = 0.0;
    double phi_n = 0.0;
    int n_eval_users = 0;
};

inline BruteForceMetrics brute_force_eval(const Mat& h, int n_users, int n_items,
                                          const DataSplit& split,
                                          const SensitivePartition& partition, int k) {
    std::map<int, std::set<int>> train_of, valid_of, test_of;
    for (const Edge& e : split.train) train_of[e.user].insert(e.item);
    for (const Edge& e : split.valid) valid_of[e.user].insert(e.item);
    for (const Edge& e : split.test) test_of[e.user].insert(e.item);

    double g_sum_r[2] = {0, 0}, g_sum_n[2] = {0, 0};
    int g_cnt[2] = {0, 0};
    double sum_r = 0.0, sum_n = 0.0;
    int evaluated = 0;
    for (int u = 0; u < n_users; ++u) {
        if (!test_of.count(u) || test_of[u].empty()) continue;
        std::vector<std::pair<double, int>> scored;
        for (int i = 0; i < n_items; ++i) {
            if (train_of.count(u) && train_of[u].count(i)) continue;
            if (valid_of.count(u) && valid_of[u].count(i)) continue;
            double s = 0.0;
            for (int dd = 0; dd < h.cols(); ++dd) s += h(u, dd) * h(n_users + i, dd);
            scored.push_back({s, i});
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        int hits = 0;
        double dcg = 0.0;
        for (int p = 0; p < std::min<int>(k, scored.size()); ++p) {
            if (test_of[u].count(scored[p].second)) {
                ++hits;
                dcg += 1.0 / std::log2(p + 2.0);
            }
        }
        double idcg = 0.0;
        for (int p = 0; p < std::min<int>(k, static_cast<int>(test_of[u].size())); ++p) {
            idcg += 1.0 / std::log2(p + 2.0);
        }
        const double recall = static_cast<double>(hits) / test_of[u].size();
        const double ndcg = idcg > 0 ? dcg / idcg : 0.0;
        const int g = partition.labels[u];
        g_sum_r[g] += recall;
        g_sum_n[g] += ndcg;
        ++g_cnt[g];
        sum_r += recall;
        sum_n += ndcg;
        ++evaluated;
    }
    BruteForceMetrics out;
    out.n_eval_users = evaluated;
    if (evaluated > 0) {
        out.recall = sum_r / evaluated;
        out.ndcg = sum_n / evaluated;
    }
    if (g_cnt[0] > 0 && g_cnt[1] > 0) {
        out.phi_r = std::abs(g_sum_r[0] / g_cnt[0] - g_sum_r[1] / g_cnt[1]);
        out.phi_n = std::abs(g_sum_n[0] / g_cnt[0] - g_sum_n[1] / g_cnt[1]);
    }
    return out;
}

}  // namespace fairdgcl::test
