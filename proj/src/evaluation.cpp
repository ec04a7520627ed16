#include "fairdgcl/evaluation.hpp"

#include "fairdgcl/kernels.hpp"
#include "fairdgcl/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>

namespace fairdgcl {

std::vector<int> rank_items(const Mat& h, int n_users, int n_items, int user,
                            const std::unordered_set<int>& exclude) {
    const Vec scores = h.middleRows(n_users, n_items) * h.row(user).transpose();
    std::vector<int> items;
    items.reserve(n_items);
    for (int i = 0; i < n_items; ++i) {
        if (!exclude.count(i)) items.push_back(i);
    }
    std::sort(items.begin(), items.end(), [&](int a, int b) {
        if (scores(a) != scores(b)) return scores(a) > scores(b);
        return a < b;
    });
    return items;
}

double recall_at_k(const std::vector<int>& ranked, const std::unordered_set<int>& test_items,
                   int k) {
    if (test_items.empty()) throw NumericError("recall_at_k: empty test set for user");
    int hits = 0;
    const int top = std::min<int>(k, static_cast<int>(ranked.size()));
    for (int p = 0; p < top; ++p) hits += test_items.count(ranked[p]) != 0;
    return static_cast<double>(hits) / static_cast<double>(test_items.size());
}

double ndcg_at_k(const std::vector<int>& ranked, const std::unordered_set<int>& test_items,
                 int k) {
    if (test_items.empty()) throw NumericError("ndcg_at_k: empty test set for user");
    double dcg = 0.0;
    const int top = std::min<int>(k, static_cast<int>(ranked.size()));
    for (int p = 0; p < top; ++p) {
        if (test_items.count(ranked[p])) dcg += 1.0 / std::log2(p + 2.0);
    }
    double idcg = 0.0;
    const int ideal = std::min<int>(k, static_cast<int>(test_items.size()));
    for (int p = 0; p < ideal; ++p) idcg += 1.0 / std::log2(p + 2.0);
    return dcg / idcg;
}

double group_fairness(const std::map<int, double>& per_user_metric,
                      const SensitivePartition& partition) {
    double sum0 = 0.0, sum1 = 0.0;
    long n0 = 0, n1 = 0;
    for (const auto& [user, value] : per_user_metric) {
        if (partition.labels[user] == 0) {
            sum0 += value;
            ++n0;
        } else {
            sum1 += value;
            ++n1;
        }
    }
    if (n0 == 0 || n1 == 0) {
        throw NumericError("group_fairness: a group has no evaluated users");
    }
    return std::abs(sum0 / n0 - sum1 / n1);
}

namespace {
struct PerUser {
    int user = 0;
    std::vector<double> recall;  // one per K
    std::vector<double> ndcg;
};
}  // namespace

MetricsReport evaluate(const Mat& h, const DataSplit& split, const SensitivePartition& partition,
                       const std::vector<int>& eval_ks, bool use_valid_as_test) {
    const int n_users = static_cast<int>(partition.labels.size());
    const int n_items = static_cast<int>(h.rows()) - n_users;

    std::vector<std::unordered_set<int>> exclude(n_users), positives(n_users);
    for (const Edge& e : split.train) exclude[e.user].insert(e.item);
    const auto& target = use_valid_as_test ? split.valid : split.test;
    if (use_valid_as_test) {
        // Validation protocol: rank against everything except train.
    } else {
        for (const Edge& e : split.valid) exclude[e.user].insert(e.item);
    }
    for (const Edge& e : target) positives[e.user].insert(e.item);

    std::vector<int> eval_users;
    for (int u = 0; u < n_users; ++u) {
        if (!positives[u].empty()) eval_users.push_back(u);
    }

    const int n_eval = static_cast<int>(eval_users.size());
    std::vector<PerUser> per_user(n_eval);
    const int max_k = eval_ks.empty() ? 0 : *std::max_element(eval_ks.begin(), eval_ks.end());

#pragma omp parallel for schedule(static) if (kernels::parallel_enabled())
    for (int idx = 0; idx < n_eval; ++idx) {
        const int u = eval_users[idx];
        const Vec scores = h.middleRows(n_users, n_items) * h.row(u).transpose();
        // Top-max_k selection with the same (score desc, id asc) tie rule as
        // rank_items; only the head of the ranking matters for the metrics.
        std::vector<int> cand;
        cand.reserve(n_items);
        for (int i = 0; i < n_items; ++i) {
            if (!exclude[u].count(i)) cand.push_back(i);
        }
        const int top = std::min<int>(max_k, static_cast<int>(cand.size()));
        std::partial_sort(cand.begin(), cand.begin() + top, cand.end(), [&](int a, int b) {
            if (scores(a) != scores(b)) return scores(a) > scores(b);
            return a < b;
        });

        PerUser& pu = per_user[idx];
        pu.user = u;
        const auto& tests = positives[u];
        for (int k : eval_ks) {
            int hits = 0;
            double dcg = 0.0;
            const int kk = std::min(k, top);
            for (int p = 0; p < kk; ++p) {
                if (tests.count(cand[p])) {
                    ++hits;
                    dcg += 1.0 / std::log2(p + 2.0);
                }
            }
            double idcg = 0.0;
            const int ideal = std::min<int>(k, static_cast<int>(tests.size()));
            for (int p = 0; p < ideal; ++p) idcg += 1.0 / std::log2(p + 2.0);
            pu.recall.push_back(static_cast<double>(hits) / static_cast<double>(tests.size()));
            pu.ndcg.push_back(idcg > 0.0 ? dcg / idcg : 0.0);
        }
    }

    MetricsReport report;
    report.n_eval_users = n_eval;
    for (std::size_t ki = 0; ki < eval_ks.size(); ++ki) {
        std::map<int, double> recall_by_user, ndcg_by_user;
        for (const PerUser& pu : per_user) {
            recall_by_user[pu.user] = pu.recall[ki];
            ndcg_by_user[pu.user] = pu.ndcg[ki];
        }
        KMetrics m;
        double sums[2][2] = {{0, 0}, {0, 0}};  // [group][metric]
        long counts[2] = {0, 0};
        for (const PerUser& pu : per_user) {
            const int g = partition.labels[pu.user];
            sums[g][0] += pu.recall[ki];
            sums[g][1] += pu.ndcg[ki];
            ++counts[g];
        }
        if (counts[0] == 0 || counts[1] == 0) {
            throw NumericError("evaluate: a sensitive group has no evaluable users");
        }
        double total_recall = 0.0, total_ndcg = 0.0;
        for (const PerUser& pu : per_user) {
            total_recall += pu.recall[ki];
            total_ndcg += pu.ndcg[ki];
        }
        m.recall = total_recall / n_eval;
        m.ndcg = total_ndcg / n_eval;
        m.group0_recall = sums[0][0] / counts[0];
        m.group1_recall = sums[1][0] / counts[1];
        m.group0_ndcg = sums[0][1] / counts[0];
        m.group1_ndcg = sums[1][1] / counts[1];
        m.phi_r = std::abs(m.group0_recall - m.group1_recall);
        m.phi_n = std::abs(m.group0_ndcg - m.group1_ndcg);
        report.at_k[eval_ks[ki]] = m;
    }
    return report;
}

void export_embeddings(const Mat& h, int n_users, const SensitivePartition& partition,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write embedding export: " + path.string());
    out << "node_id,role,group";
    for (int j = 0; j < h.cols(); ++j) out << ",dim_" << j;
    out << '\n';
    out.precision(17);
    for (int i = 0; i < h.rows(); ++i) {
        const bool is_user = i < n_users;
        out << i << ',' << (is_user ? "user" : "item") << ','
            << (is_user ? partition.labels[i] : -1);
        for (int j = 0; j < h.cols(); ++j) out << ',' << h(i, j);
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

namespace {
double entropy(const std::vector<long>& counts, long total) {
    double hh = 0.0;
    for (long c : counts) {
        if (c > 0) {
            const double p = static_cast<double>(c) / total;
            hh -= p * std::log(p);
        }
    }
    return hh;
}
}  // namespace

double embedding_nmi(const Mat& h_users, const SensitivePartition& partition, int k_clusters,
                     std::uint64_t seed) {
    const int n = static_cast<int>(h_users.rows());
    if (n < k_clusters) throw NumericError("embedding_nmi: fewer points than clusters");

    // k-means++ seeding, then Lloyd iterations.
    Rng rng(derive_seed(seed, "kmeans"));
    std::vector<int> centers_idx;
    centers_idx.push_back(static_cast<int>(rng.below(n)));
    Vec dist2 = (h_users.rowwise() - h_users.row(centers_idx[0])).rowwise().squaredNorm();
    while (static_cast<int>(centers_idx.size()) < k_clusters) {
        const double total = dist2.sum();
        int pick;
        if (total <= 0.0) {
            pick = static_cast<int>(rng.below(n));  // all points coincide
        } else {
            double r = rng.uniform() * total;
            pick = n - 1;
            for (int i = 0; i < n; ++i) {
                r -= dist2(i);
                if (r <= 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        centers_idx.push_back(pick);
        const Vec d2 = (h_users.rowwise() - h_users.row(pick)).rowwise().squaredNorm();
        dist2 = dist2.cwiseMin(d2);
    }
    Mat centers(k_clusters, h_users.cols());
    for (int c = 0; c < k_clusters; ++c) centers.row(c) = h_users.row(centers_idx[c]);

    std::vector<int> assign(n, 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (h_users.row(i) - centers.row(0)).squaredNorm();
            for (int c = 1; c < k_clusters; ++c) {
                const double d = (h_users.row(i) - centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        Mat sums = Mat::Zero(k_clusters, h_users.cols());
        std::vector<long> counts(k_clusters, 0);
        for (int i = 0; i < n; ++i) {
            sums.row(assign[i]) += h_users.row(i);
            ++counts[assign[i]];
        }
        for (int c = 0; c < k_clusters; ++c) {
            if (counts[c] > 0) centers.row(c) = sums.row(c) / counts[c];
        }
        if (!changed) break;
    }

    // NMI with sqrt normalization.
    std::vector<long> cluster_counts(k_clusters, 0), label_counts(2, 0);
    std::vector<std::vector<long>> joint(k_clusters, std::vector<long>(2, 0));
    for (int i = 0; i < n; ++i) {
        const int g = partition.labels[i];
        ++cluster_counts[assign[i]];
        ++label_counts[g];
        ++joint[assign[i]][g];
    }
    const double h_c = entropy(cluster_counts, n);
    const double h_g = entropy(label_counts, n);
    if (h_c <= 0.0 || h_g <= 0.0) return 0.0;
    double mi = 0.0;
    for (int c = 0; c < k_clusters; ++c) {
        for (int g = 0; g < 2; ++g) {
            if (joint[c][g] > 0) {
                const double pxy = static_cast<double>(joint[c][g]) / n;
                const double px = static_cast<double>(cluster_counts[c]) / n;
                const double py = static_cast<double>(label_counts[g]) / n;
                mi += pxy * std::log(pxy / (px * py));
            }
        }
    }
    return mi / std::sqrt(h_c * h_g);
}

std::string metrics_report_to_json(const MetricsReport& report) {
    nlohmann::json j;
    j["n_eval_users"] = report.n_eval_users;
    for (const auto& [k, m] : report.at_k) {
        nlohmann::json jk;
        jk["recall"] = m.recall;
        jk["ndcg"] = m.ndcg;
        jk["phi_r"] = m.phi_r;
        jk["phi_n"] = m.phi_n;
        jk["group0_recall"] = m.group0_recall;
        jk["group1_recall"] = m.group1_recall;
        jk["group0_ndcg"] = m.group0_ndcg;
        jk["group1_ndcg"] = m.group1_ndcg;
        j["at_k"][std::to_string(k)] = jk;
    }
    return j.dump();
}

}  // namespace fairdgcl
