#include "fairdgcl/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fairdgcl {

namespace {
std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\''))) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

std::vector<std::string> tokenize_value(const std::string& raw) {
    std::string v = trim(raw);
    std::vector<std::string> tokens;
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']') throw UsageError("unterminated array value: " + raw);
        std::stringstream ss(v.substr(1, v.size() - 2));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string t = trim(item);
            if (!t.empty()) tokens.push_back(unquote(t));
        }
    } else {
        tokens.push_back(unquote(v));
    }
    return tokens;
}
}  // namespace

ConfigDoc ConfigDoc::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

ConfigDoc ConfigDoc::parse_string(const std::string& text) {
    ConfigDoc doc;
    std::stringstream ss(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw UsageError("config line " + std::to_string(line_no) + ": bad section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string full = section.empty() ? key : section + "." + key;
        doc.values_[full] = tokenize_value(line.substr(eq + 1));
    }
    return doc;
}

std::string ConfigDoc::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() || it->second.empty() ? fallback : it->second.front();
}

double ConfigDoc::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) return fallback;
    try {
        return std::stod(it->second.front());
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': expected a number, got '" +
                         it->second.front() + "'");
    }
}

long ConfigDoc::get_long(const std::string& key, long fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) return fallback;
    try {
        return std::stol(it->second.front());
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': expected an integer, got '" +
                         it->second.front() + "'");
    }
}

bool ConfigDoc::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) return fallback;
    const std::string& v = it->second.front();
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw UsageError("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<long> ConfigDoc::get_long_array(const std::string& key,
                                            const std::vector<long>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<long> out;
    for (const std::string& tok : it->second) {
        try {
            out.push_back(std::stol(tok));
        } catch (const std::exception&) {
            throw UsageError("config key '" + key + "': expected integers");
        }
    }
    return out;
}

Dataset ExperimentConfig::load() const {
    if (dataset == "ml-100k") {
        return load_movielens_100k(data_dir, gender_to_bit);
    }
    if (dataset == "generic") {
        auto inter = interactions;
        auto attr = attributes;
        if (inter.is_relative() && !data_dir.empty()) inter = data_dir / inter;
        if (attr.is_relative() && !data_dir.empty()) attr = data_dir / attr;
        return load_generic_tsv(inter, attr, columns);
    }
    throw UsageError("unknown dataset '" + dataset + "' (expected ml-100k or generic)");
}

ExperimentConfig experiment_from_config(const ConfigDoc& doc) {
    ExperimentConfig cfg;
    const char* env_root = std::getenv("FAIRDGCL_DATA");
    if (env_root) cfg.data_dir = env_root;

    cfg.dataset = doc.get_string("dataset.name", cfg.dataset);
    cfg.data_dir = doc.get_string("dataset.data_dir", cfg.data_dir.string());
    cfg.interactions = doc.get_string("dataset.interactions", cfg.interactions.string());
    cfg.attributes = doc.get_string("dataset.attributes", cfg.attributes.string());

    auto& col = cfg.columns;
    col.interaction_delimiter =
        doc.get_string("dataset.columns.interaction_delimiter", col.interaction_delimiter);
    col.user_col = static_cast<int>(doc.get_long("dataset.columns.user_col", col.user_col));
    col.item_col = static_cast<int>(doc.get_long("dataset.columns.item_col", col.item_col));
    col.rating_col = static_cast<int>(doc.get_long("dataset.columns.rating_col", col.rating_col));
    col.timestamp_col =
        static_cast<int>(doc.get_long("dataset.columns.timestamp_col", col.timestamp_col));
    col.attribute_delimiter =
        doc.get_string("dataset.columns.attribute_delimiter", col.attribute_delimiter);
    col.attr_user_col =
        static_cast<int>(doc.get_long("dataset.columns.attr_user_col", col.attr_user_col));
    col.attr_value_col =
        static_cast<int>(doc.get_long("dataset.columns.attr_value_col", col.attr_value_col));
    col.item_vocab = doc.get_string("dataset.columns.item_vocab", col.item_vocab);
    const std::string attr_map = doc.get_string("dataset.columns.attribute_map", "");
    if (!attr_map.empty()) {
        std::map<std::string, int> mapping;
        std::stringstream ss(attr_map);
        std::string pair;
        while (std::getline(ss, pair, ',')) {
            const auto eq = pair.find('=');
            if (eq == std::string::npos) {
                throw UsageError("attribute_map entries must look like VALUE=BIT");
            }
            mapping[pair.substr(0, eq)] = std::stoi(pair.substr(eq + 1));
        }
        col.attribute_to_bit = mapping;
        cfg.gender_to_bit = mapping;
    }

    cfg.split_ratios[0] = doc.get_double("split.train", cfg.split_ratios[0]);
    cfg.split_ratios[1] = doc.get_double("split.valid", cfg.split_ratios[1]);
    cfg.split_ratios[2] = doc.get_double("split.test", cfg.split_ratios[2]);

    auto& t = cfg.train;
    t.model = doc.get_string("train.model", t.model);
    t.learning_rate = doc.get_double("train.lr", t.learning_rate);
    t.dim = static_cast<int>(doc.get_long("train.dim", t.dim));
    t.n_layers = static_cast<int>(doc.get_long("train.layers", t.n_layers));
    t.epochs = static_cast<int>(doc.get_long("train.epochs", t.epochs));
    t.batch_size = static_cast<int>(doc.get_long("train.batch", t.batch_size));
    t.alpha = doc.get_double("train.alpha", t.alpha);
    t.beta = doc.get_double("train.beta", t.beta);
    t.tau = doc.get_double("train.tau", t.tau);
    t.tau_r = doc.get_double("train.tau_r", t.tau_r);
    t.seed = static_cast<std::uint64_t>(doc.get_long("train.seed", static_cast<long>(t.seed)));
    const auto ks = doc.get_long_array("train.ks", {});
    if (!ks.empty()) {
        t.eval_ks.clear();
        for (long k : ks) t.eval_ks.push_back(static_cast<int>(k));
    }
    t.scorer_hidden = static_cast<int>(doc.get_long("train.scorer_hidden", t.scorer_hidden));
    t.disc_hidden = static_cast<int>(doc.get_long("train.disc_hidden", t.disc_hidden));
    t.vgae_hidden = static_cast<int>(doc.get_long("train.vgae_hidden", t.vgae_hidden));
    t.latent_dim = static_cast<int>(doc.get_long("train.latent_dim", t.latent_dim));
    t.nce_batch = static_cast<int>(doc.get_long("train.nce_batch", t.nce_batch));
    t.nce_include_self = doc.get_bool("train.nce_include_self", t.nce_include_self);
    if (doc.has("train.fixed_eta")) t.fixed_eta = doc.get_double("train.fixed_eta", 0.5);
    t.drop_rate = doc.get_double("train.drop_rate", t.drop_rate);
    t.patience = static_cast<int>(doc.get_long("train.patience", t.patience));
    t.elbo_neg_per_pos =
        static_cast<int>(doc.get_long("train.elbo_neg_per_pos", t.elbo_neg_per_pos));
    t.grad_clip = doc.get_double("train.grad_clip", t.grad_clip);
    t.weight_decay = doc.get_double("train.weight_decay", t.weight_decay);
    t.min_max_ratio = static_cast<int>(doc.get_long("train.min_max_ratio", t.min_max_ratio));

    cfg.run_name = doc.get_string("run.name", cfg.run_name);
    cfg.out_dir = doc.get_string("run.out", cfg.out_dir.string());
    return cfg;
}

}  // namespace fairdgcl
