#include "fairdgcl/dataset.hpp"

#include "fairdgcl/rng.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <unordered_map>
#include <unordered_set>

namespace fairdgcl {

namespace {

std::vector<std::string> split_fields(const std::string& line, const std::string& delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + delim.size();
    }
    return out;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

long parse_long(const std::string& s, const std::string& file, int line_no) {
    long value = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw DataError(file + ":" + std::to_string(line_no) + ": cannot parse integer '" + s + "'");
    }
    return value;
}

double parse_double(const std::string& s, const std::string& file, int line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError(file + ":" + std::to_string(line_no) + ": cannot parse number '" + s + "'");
    }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path.string());
    return in;
}

struct RawInteraction {
    std::string user;
    std::string item;
    std::optional<double> rating;
    std::optional<std::int64_t> timestamp;
};

SensitivePartition make_partition(const std::vector<int>& labels, bool require_both) {
    SensitivePartition p;
    p.labels = labels;
    for (int u = 0; u < static_cast<int>(labels.size()); ++u) {
        if (labels[u] == 0) {
            p.group0.push_back(u);
        } else if (labels[u] == 1) {
            p.group1.push_back(u);
        } else {
            throw DataError("user " + std::to_string(u) + " has non-binary label " +
                            std::to_string(labels[u]));
        }
    }
    if (require_both && (p.group0.empty() || p.group1.empty())) {
        throw DataError("one sensitive group is empty; the fairness gap is undefined");
    }
    return p;
}

Dataset assemble(std::vector<RawInteraction> raw,
                 const std::unordered_map<std::string, std::string>& user_attr,
                 const std::map<std::string, int>& attr_to_bit, const std::string& attr_file,
                 const std::string& item_vocab) {
    if (raw.empty()) throw DataError("no interactions");

    // Dense re-indexing: raw ids sorted ascending (numerically when possible).
    auto id_less = [](const std::string& a, const std::string& b) {
        if (a.size() != b.size() &&
            std::all_of(a.begin(), a.end(), ::isdigit) &&
            std::all_of(b.begin(), b.end(), ::isdigit))
            return a.size() < b.size();
        return a < b;
    };
    std::vector<std::string> users, items;
    {
        std::unordered_set<std::string> useen, iseen;
        for (const auto& r : raw) {
            if (useen.insert(r.user).second) users.push_back(r.user);
            if (iseen.insert(r.item).second) items.push_back(r.item);
        }
    }
    std::sort(users.begin(), users.end(), id_less);
    std::sort(items.begin(), items.end(), id_less);

    if (item_vocab == "max_id") {
        // Vocabulary spans ids 1..max raw id; unobserved items become
        // zero-degree nodes. Requires numeric item ids.
        long max_id = 0;
        for (const auto& it : items) max_id = std::max(max_id, parse_long(it, "item id", 0));
        items.clear();
        for (long i = 1; i <= max_id; ++i) items.push_back(std::to_string(i));
    } else if (item_vocab != "observed") {
        throw UsageError("item_vocab must be 'observed' or 'max_id', got '" + item_vocab + "'");
    }

    std::unordered_map<std::string, int> user_index, item_index;
    for (int i = 0; i < static_cast<int>(users.size()); ++i) user_index[users[i]] = i;
    for (int i = 0; i < static_cast<int>(items.size()); ++i) item_index[items[i]] = i;

    Dataset data;
    data.n_users = static_cast<int>(users.size());
    data.n_items = static_cast<int>(items.size());
    data.user_raw_ids = std::move(users);
    data.item_raw_ids = std::move(items);

    std::unordered_set<std::int64_t> seen_pairs;
    seen_pairs.reserve(raw.size() * 2);
    int duplicates = 0;
    for (const auto& r : raw) {
        InteractionRecord rec;
        rec.user_id = user_index.at(r.user);
        rec.item_id = item_index.at(r.item);
        rec.rating = r.rating;
        rec.timestamp = r.timestamp;
        const std::int64_t key =
            static_cast<std::int64_t>(rec.user_id) * data.n_items + rec.item_id;
        if (!seen_pairs.insert(key).second) {
            ++duplicates;
            continue;  // implicit feedback: repeated pairs collapse to one edge
        }
        data.records.push_back(rec);
    }
    if (duplicates > 0) {
        std::cerr << "[warn] dropped " << duplicates << " duplicate user-item pairs\n";
    }

    std::vector<int> labels(data.n_users, -1);
    for (int u = 0; u < data.n_users; ++u) {
        const auto it = user_attr.find(data.user_raw_ids[u]);
        if (it == user_attr.end()) {
            throw DataError("user '" + data.user_raw_ids[u] + "' has interactions but no row in " +
                            attr_file);
        }
        const auto bit = attr_to_bit.find(it->second);
        if (bit == attr_to_bit.end()) {
            throw DataError("attribute value '" + it->second +
                            "' is outside the declared binary mapping");
        }
        labels[u] = bit->second;
    }
    // Loading tolerates a degenerate (single-group) partition; the fairness
    // operations reject it where the gap would actually be undefined.
    data.partition = make_partition(labels, /*require_both=*/false);
    return data;
}

}  // namespace

SensitivePartition partition_users(const std::vector<int>& labels) {
    return make_partition(labels, /*require_both=*/true);
}

Dataset load_movielens_100k(const std::filesystem::path& data_dir,
                            const std::map<std::string, int>& gender_to_bit) {
    const auto data_file = data_dir / "u.data";
    const auto user_file = data_dir / "u.user";
    std::ifstream in = open_or_throw(data_file);

    std::vector<RawInteraction> raw;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto f = split_fields(line, "\t");
        if (f.size() != 4) {
            throw DataError(data_file.string() + ":" + std::to_string(line_no) +
                            ": expected 4 tab-separated fields, got " + std::to_string(f.size()));
        }
        RawInteraction r;
        r.user = f[0];
        r.item = f[1];
        r.rating = parse_double(f[2], data_file.string(), line_no);
        r.timestamp = parse_long(f[3], data_file.string(), line_no);
        parse_long(f[0], data_file.string(), line_no);  // validate ids are integers
        parse_long(f[1], data_file.string(), line_no);
        raw.push_back(std::move(r));
    }
    if (raw.empty()) throw DataError(data_file.string() + ": no interactions");

    std::ifstream uin = open_or_throw(user_file);
    std::unordered_map<std::string, std::string> user_attr;
    line_no = 0;
    while (std::getline(uin, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto f = split_fields(line, "|");
        if (f.size() < 3) {
            throw DataError(user_file.string() + ":" + std::to_string(line_no) +
                            ": expected id|age|gender|occupation|zip");
        }
        user_attr[f[0]] = f[2];
    }
    return assemble(std::move(raw), user_attr, gender_to_bit, user_file.string(), "observed");
}

Dataset load_generic_tsv(const std::filesystem::path& interactions,
                         const std::filesystem::path& attributes, const ColumnMap& config) {
    std::ifstream in = open_or_throw(interactions);
    const int max_col = std::max({config.user_col, config.item_col, config.rating_col,
                                  config.timestamp_col});
    std::vector<RawInteraction> raw;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto f = split_fields(line, config.interaction_delimiter);
        if (static_cast<int>(f.size()) <= max_col) {
            throw DataError(interactions.string() + ":" + std::to_string(line_no) +
                            ": expected at least " + std::to_string(max_col + 1) + " fields");
        }
        RawInteraction r;
        r.user = f[config.user_col];
        r.item = f[config.item_col];
        if (config.rating_col >= 0)
            r.rating = parse_double(f[config.rating_col], interactions.string(), line_no);
        if (config.timestamp_col >= 0)
            r.timestamp = parse_long(f[config.timestamp_col], interactions.string(), line_no);
        raw.push_back(std::move(r));
    }
    if (raw.empty()) throw DataError(interactions.string() + ": no interactions");

    std::ifstream ain = open_or_throw(attributes);
    const int max_attr_col = std::max(config.attr_user_col, config.attr_value_col);
    std::unordered_map<std::string, std::string> user_attr;
    line_no = 0;
    while (std::getline(ain, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto f = split_fields(line, config.attribute_delimiter);
        if (static_cast<int>(f.size()) <= max_attr_col) {
            throw DataError(attributes.string() + ":" + std::to_string(line_no) +
                            ": expected at least " + std::to_string(max_attr_col + 1) + " fields");
        }
        user_attr[f[config.attr_user_col]] = f[config.attr_value_col];
    }
    return assemble(std::move(raw), user_attr, config.attribute_to_bit, attributes.string(),
                    config.item_vocab);
}

DataSplit split_interactions(const std::vector<InteractionRecord>& records,
                             const std::array<double, 3>& ratios, std::uint64_t seed) {
    const double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(sum - 1.0) > 1e-9) throw UsageError("split ratios must sum to 1");
    if (records.size() < 3) throw DataError("need at least 3 records to split");

    std::vector<int> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng(derive_seed(seed, "split"));
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::swap(order[i], order[rng.below(i + 1)]);
    }

    const auto n = static_cast<std::int64_t>(records.size());
    const auto n_train = static_cast<std::int64_t>(std::llround(ratios[0] * n));
    const auto n_valid = static_cast<std::int64_t>(std::llround((ratios[0] + ratios[1]) * n)) - n_train;

    DataSplit split;
    split.seed = seed;
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& r = records[order[i]];
        Edge e{r.user_id, r.item_id};
        if (i < n_train) {
            split.train.push_back(e);
        } else if (i < n_train + n_valid) {
            split.valid.push_back(e);
        } else {
            split.test.push_back(e);
        }
    }
    return split;
}

void save_split(const DataSplit& split, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write split file: " + path.string());
    auto write = [&](const std::vector<Edge>& edges, const char* tag) {
        for (const Edge& e : edges) out << e.user << '\t' << e.item << '\t' << tag << '\n';
    };
    write(split.train, "train");
    write(split.valid, "valid");
    write(split.test, "test");
}

DataSplit load_split(const std::filesystem::path& path) {
    std::ifstream in = open_or_throw(path);
    DataSplit split;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto f = split_fields(line, "\t");
        if (f.size() != 3) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": expected user<TAB>item<TAB>bucket");
        }
        Edge e{static_cast<int>(parse_long(f[0], path.string(), line_no)),
               static_cast<int>(parse_long(f[1], path.string(), line_no))};
        if (f[2] == "train") {
            split.train.push_back(e);
        } else if (f[2] == "valid") {
            split.valid.push_back(e);
        } else if (f[2] == "test") {
            split.test.push_back(e);
        } else {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": unknown bucket '" +
                            f[2] + "'");
        }
    }
    return split;
}

void save_partition(const SensitivePartition& partition, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write partition file: " + path.string());
    for (std::size_t u = 0; u < partition.labels.size(); ++u) {
        out << u << '\t' << partition.labels[u] << '\n';
    }
}

SensitivePartition load_partition(const std::filesystem::path& path) {
    std::ifstream in = open_or_throw(path);
    std::vector<std::pair<int, int>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto f = split_fields(line, "\t");
        if (f.size() != 2) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": expected user<TAB>label");
        }
        rows.emplace_back(static_cast<int>(parse_long(f[0], path.string(), line_no)),
                          static_cast<int>(parse_long(f[1], path.string(), line_no)));
    }
    std::sort(rows.begin(), rows.end());
    std::vector<int> labels(rows.size(), -1);
    for (const auto& [u, l] : rows) {
        if (u < 0 || u >= static_cast<int>(labels.size())) {
            throw DataError(path.string() + ": non-dense user ids");
        }
        labels[u] = l;
    }
    return partition_users(labels);
}

void save_id_map(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write id map: " + path.string());
    for (std::size_t i = 0; i < data.user_raw_ids.size(); ++i)
        out << "user\t" << i << '\t' << data.user_raw_ids[i] << '\n';
    for (std::size_t i = 0; i < data.item_raw_ids.size(); ++i)
        out << "item\t" << i << '\t' << data.item_raw_ids[i] << '\n';
}

int count_users_without_train_edges(const DataSplit& split, int n_users) {
    std::vector<char> has(n_users, 0);
    for (const Edge& e : split.train) has[e.user] = 1;
    int missing = 0;
    for (char h : has) missing += h == 0;
    return missing;
}

}  // namespace fairdgcl
