#pragma once

#include "fairdgcl/common.hpp"
#include "fairdgcl/dataset.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

namespace fairdgcl {

/// Per-K accuracy and fairness numbers plus per-group means.
struct KMetrics {
    double recall = 0.0;
    double ndcg = 0.0;
    double phi_r = 0.0;
    double phi_n = 0.0;
    double group0_recall = 0.0;
    double group1_recall = 0.0;
    double group0_ndcg = 0.0;
    double group1_ndcg = 0.0;
};

struct MetricsReport {
    std::map<int, KMetrics> at_k;
    int n_eval_users = 0;
};

/// All items minus `exclude`, sorted by score descending; ties broken by
/// ascending item id so reports are reproducible across platforms.
std::vector<int> rank_items(const Mat& h, int n_users, int n_items, int user,
                            const std::unordered_set<int>& exclude);

double recall_at_k(const std::vector<int>& ranked, const std::unordered_set<int>& test_items,
                   int k);

/// Binary-relevance NDCG: DCG over hits at positions p <= k with 1/log2(p+1)
/// discount, ideal DCG truncated at min(k, |test|).
double ndcg_at_k(const std::vector<int>& ranked, const std::unordered_set<int>& test_items,
                 int k);

/// |mean over group0 - mean over group1| of a per-user metric, over evaluated
/// users only. Throws if either group has no evaluated user.
double group_fairness(const std::map<int, double>& per_user_metric,
                      const SensitivePartition& partition);

/// All-rank evaluation over the test users with at least one test item.
/// Train and valid items of a user are excluded from that user's ranking;
/// users without test items are skipped (not zero-counted).
MetricsReport evaluate(const Mat& h, const DataSplit& split, const SensitivePartition& partition,
                       const std::vector<int>& eval_ks, bool use_valid_as_test = false);

/// CSV `node_id,role,group,dim_0..dim_{d-1}`; group is -1 for item rows.
void export_embeddings(const Mat& h, int n_users, const SensitivePartition& partition,
                       const std::filesystem::path& path);

/// K-means (k clusters, seeded) over the user rows, then normalized mutual
/// information between cluster assignment and group label. Degenerate
/// clusterings (a single occupied cluster) score 0.
double embedding_nmi(const Mat& h_users, const SensitivePartition& partition, int k_clusters,
                     std::uint64_t seed);

std::string metrics_report_to_json(const MetricsReport& report);

}  // namespace fairdgcl
