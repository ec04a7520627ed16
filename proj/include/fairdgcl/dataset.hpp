#pragma once

#include "fairdgcl/common.hpp"
#include "fairdgcl/graph.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fairdgcl {

struct InteractionRecord {
    int user_id = 0;
    int item_id = 0;
    std::optional<double> rating;      // unused by the model
    std::optional<std::int64_t> timestamp;
};

/// Per-user binary attribute labels and the two induced groups.
struct SensitivePartition {
    std::vector<int> labels;  // one bit per user
    std::vector<int> group0;
    std::vector<int> group1;
};

/// Groups as defined by the labels; throws if either group is empty (the
/// fairness gap would be undefined).
SensitivePartition partition_users(const std::vector<int>& labels);

struct Dataset {
    std::vector<InteractionRecord> records;
    SensitivePartition partition;
    int n_users = 0;
    int n_items = 0;
    // Dense index -> raw id, persisted alongside splits for reproducibility.
    std::vector<std::string> user_raw_ids;
    std::vector<std::string> item_raw_ids;
};

/// Column map driving the generic adapter. Field indices are 0-based after
/// splitting on `delimiter` (multi-character delimiters supported, e.g. "::").
struct ColumnMap {
    std::string interaction_delimiter = "\t";
    int user_col = 0;
    int item_col = 1;
    int rating_col = -1;
    int timestamp_col = -1;
    std::string attribute_delimiter = "\t";
    int attr_user_col = 0;
    int attr_value_col = 1;
    /// Declared binary mapping, e.g. {"M",0},{"F",1}. A value outside it is an error.
    std::map<std::string, int> attribute_to_bit = {{"M", 0}, {"F", 1}};
    /// "observed" counts distinct interacted items; "max_id" sizes the item
    /// vocabulary by the largest numeric raw id (items without interactions
    /// become zero-degree nodes).
    std::string item_vocab = "observed";
};

/// Native ML-100K layout: tab-separated `u.data` (user, item, rating,
/// timestamp) and pipe-separated `u.user` (id|age|gender|occupation|zip).
Dataset load_movielens_100k(const std::filesystem::path& data_dir,
                            const std::map<std::string, int>& gender_to_bit = {{"M", 0},
                                                                               {"F", 1}});

Dataset load_generic_tsv(const std::filesystem::path& interactions,
                         const std::filesystem::path& attributes, const ColumnMap& config);

struct DataSplit {
    std::vector<Edge> train;
    std::vector<Edge> valid;
    std::vector<Edge> test;
    std::uint64_t seed = 0;
};

/// Seeded global random split over interactions; disjoint cover of the input.
DataSplit split_interactions(const std::vector<InteractionRecord>& records,
                             const std::array<double, 3>& ratios, std::uint64_t seed);

/// One line per interaction: `user<TAB>item<TAB>{train|valid|test}`.
void save_split(const DataSplit& split, const std::filesystem::path& path);
DataSplit load_split(const std::filesystem::path& path);

void save_partition(const SensitivePartition& partition, const std::filesystem::path& path);
SensitivePartition load_partition(const std::filesystem::path& path);

void save_id_map(const Dataset& data, const std::filesystem::path& path);

/// Users that appear in `users_needed` but have no train edge; they keep
/// zero-degree rows and are excluded from ranking metrics.
int count_users_without_train_edges(const DataSplit& split, int n_users);

}  // namespace fairdgcl
