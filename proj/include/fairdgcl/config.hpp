#pragma once

#include "fairdgcl/dataset.hpp"
#include "fairdgcl/trainer.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fairdgcl {

/// Flat view of a TOML-style config document: `[section]` headers followed by
/// `key = value` lines; values are strings, numbers, booleans, or arrays.
/// Keys are exposed as "section.key".
class ConfigDoc {
public:
    static ConfigDoc parse_file(const std::filesystem::path& path);
    static ConfigDoc parse_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<long> get_long_array(const std::string& key,
                                     const std::vector<long>& fallback) const;

private:
    std::map<std::string, std::vector<std::string>> values_;  // key -> tokens
};

/// Everything a run needs: where the data lives, how to read it, the training
/// hyperparameters, and where artifacts go.
struct ExperimentConfig {
    std::string dataset = "ml-100k";  // ml-100k | generic
    std::filesystem::path data_dir;
    std::filesystem::path interactions;  // generic only
    std::filesystem::path attributes;    // generic only
    ColumnMap columns;
    std::map<std::string, int> gender_to_bit = {{"M", 0}, {"F", 1}};
    std::array<double, 3> split_ratios = {0.8, 0.1, 0.1};
    TrainConfig train;
    std::string run_name = "run";
    std::filesystem::path out_dir = "runs";

    /// Loads the dataset according to `dataset`/`columns`.
    Dataset load() const;
};

/// Layered resolution: built-in defaults, then the config document.
ExperimentConfig experiment_from_config(const ConfigDoc& doc);

}  // namespace fairdgcl
