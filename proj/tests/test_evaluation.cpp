#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fairdgcl/evaluation.hpp"
#include "testutil.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fairdgcl;
using namespace fairdgcl::test;

TEST_CASE("rank_items ordering, exclusion, and tie rule") {
    // 1 user, 3 items; scores via inner products against a 1-d embedding.
    Mat h(4, 1);
    h << 1.0, 0.9, 0.1, 0.5;  // user, item0, item1, item2
    CHECK(rank_items(h, 1, 3, 0, {}) == std::vector<int>{0, 2, 1});
    CHECK(rank_items(h, 1, 3, 0, {0}) == std::vector<int>{2, 1});

    Mat tied(4, 1);
    tied << 1.0, 0.5, 0.5, 0.5;
    CHECK(rank_items(tied, 1, 3, 0, {}) == std::vector<int>{0, 1, 2});
}

TEST_CASE("recall_at_k examples") {
    const std::vector<int> ranked = {4, 1, 3, 0, 2};
    CHECK(recall_at_k(ranked, {4, 2}, 3) == doctest::Approx(0.5));
    CHECK(recall_at_k(ranked, {4, 1}, 2) == doctest::Approx(1.0));
    CHECK(recall_at_k(ranked, {0, 2}, 5) == doctest::Approx(1.0));
    CHECK_THROWS_AS(recall_at_k(ranked, {}, 3), NumericError);
}

TEST_CASE("ndcg_at_k examples") {
    CHECK(ndcg_at_k({7, 1, 2}, {7}, 1) == doctest::Approx(1.0));
    // single test item at rank 2, k=2 -> 1/log2(3)
    CHECK(ndcg_at_k({1, 7, 2}, {7}, 2) == doctest::Approx(1.0 / std::log2(3.0)).epsilon(1e-9));
    CHECK(ndcg_at_k({1, 7, 2}, {7}, 2) == doctest::Approx(0.630930).epsilon(1e-5));
    CHECK(ndcg_at_k({1, 2, 3}, {9}, 3) == doctest::Approx(0.0));
}

TEST_CASE("recall is non-decreasing in k") {
    Rng rng(1);
    for (int t = 0; t < 30; ++t) {
        std::vector<int> ranked(20);
        std::iota(ranked.begin(), ranked.end(), 0);
        for (int i = 19; i > 0; --i) std::swap(ranked[i], ranked[rng.below(i + 1)]);
        std::unordered_set<int> tests;
        while (tests.size() < 4) tests.insert(static_cast<int>(rng.below(20)));
        double prev = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double r = recall_at_k(ranked, tests, k);
            CHECK(r >= prev);
            prev = r;
        }
        CHECK(prev == doctest::Approx(1.0));
    }
}

TEST_CASE("group_fairness examples") {
    const auto part = partition_users({0, 0, 1, 1});
    CHECK(group_fairness({{0, 0.5}, {1, 0.5}, {2, 0.3}, {3, 0.3}}, part) ==
          doctest::Approx(0.2));
    CHECK(group_fairness({{0, 0.4}, {2, 0.4}}, part) == doctest::Approx(0.0));
    CHECK_THROWS_AS(group_fairness({{0, 0.4}, {1, 0.5}}, part), NumericError);

    // 6-user fixture against hand-computed means.
    const auto part6 = partition_users({0, 1, 0, 1, 0, 1});
    const std::map<int, double> vals = {{0, 0.1}, {1, 0.9}, {2, 0.3}, {3, 0.7}, {4, 0.2}, {5, 0.5}};
    // group0 mean = 0.2, group1 mean = 0.7
    CHECK(group_fairness(vals, part6) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("evaluate: perfect oracle embeddings give recall = ndcg = 1, phi = 0") {
    // 4 users, 4 items; each user u has train item u and test item (u+1)%4.
    // Embeddings are one-hot aligned so the test item ranks first after
    // excluding the train item.
    const int n_users = 4, n_items = 4;
    DataSplit split;
    for (int u = 0; u < 4; ++u) {
        split.train.push_back({u, u});
        split.test.push_back({u, (u + 1) % 4});
    }
    const auto part = partition_users({0, 1, 0, 1});
    Mat h = Mat::Zero(8, 4);
    for (int u = 0; u < 4; ++u) {
        h(u, u) = 1.0;
        h(u, (u + 1) % 4) = 0.5;
        h(4 + u, u) = 1.0;
    }
    const auto report = evaluate(h, split, part, {1, 2});
    CHECK(report.n_eval_users == 4);
    CHECK(report.at_k.at(1).recall == doctest::Approx(1.0));
    CHECK(report.at_k.at(1).ndcg == doctest::Approx(1.0));
    CHECK(report.at_k.at(1).phi_r == doctest::Approx(0.0));
    CHECK(report.at_k.at(1).phi_n == doctest::Approx(0.0));
}

TEST_CASE("evaluate: swapping group labels leaves phi unchanged") {
    Rng rng(2);
    const auto data = planted_bias(12, 10, 4, 0.2, 3);
    const auto split = split_interactions(data.records, {0.6, 0.2, 0.2}, 5);
    const Mat h = random_mat(data.n_users + data.n_items, 6, rng);
    std::vector<int> flipped = data.partition.labels;
    for (int& l : flipped) l = 1 - l;
    const auto a = evaluate(h, split, data.partition, {3});
    const auto b = evaluate(h, split, partition_users(flipped), {3});
    CHECK(a.at_k.at(3).phi_r == doctest::Approx(b.at_k.at(3).phi_r).epsilon(1e-12));
    CHECK(a.at_k.at(3).phi_n == doctest::Approx(b.at_k.at(3).phi_n).epsilon(1e-12));
}

TEST_CASE("evaluate is pure: repeated calls identical") {
    Rng rng(3);
    const auto data = planted_bias(10, 8, 3, 0.3, 7);
    const auto split = split_interactions(data.records, {0.6, 0.2, 0.2}, 9);
    const Mat h = random_mat(data.n_users + data.n_items, 5, rng);
    const auto a = evaluate(h, split, data.partition, {2, 5});
    const auto b = evaluate(h, split, data.partition, {2, 5});
    CHECK(a.at_k.at(2).recall == b.at_k.at(2).recall);
    CHECK(a.at_k.at(5).ndcg == b.at_k.at(5).ndcg);
    CHECK(metrics_report_to_json(a) == metrics_report_to_json(b));
}

TEST_CASE("evaluate matches the brute-force reference on random instances") {
    // 100 random 20-user / 30-item instances; exact recall, 1e-12 for the rest.
    for (int inst = 0; inst < 100; ++inst) {
        Rng rng(1000 + inst);
        const int n_users = 20, n_items = 30;
        std::vector<InteractionRecord> records;
        std::set<std::pair<int, int>> seen;
        const int n_inter = 100 + static_cast<int>(rng.below(60));
        while (static_cast<int>(records.size()) < n_inter) {
            const int u = static_cast<int>(rng.below(n_users));
            const int i = static_cast<int>(rng.below(n_items));
            if (seen.insert({u, i}).second) records.push_back({u, i, std::nullopt, std::nullopt});
        }
        std::vector<int> labels(n_users);
        int ones = 0;
        for (int u = 0; u < n_users; ++u) {
            labels[u] = rng.uniform() < 0.5;
            ones += labels[u];
        }
        if (ones == 0) labels[0] = 1;
        if (ones == n_users) labels[0] = 0;
        const auto part = partition_users(labels);
        const auto split = split_interactions(records, {0.6, 0.2, 0.2}, inst);
        const Mat h = random_mat(n_users + n_items, 4, rng);
        const int k = 1 + static_cast<int>(rng.below(10));

        BruteForceMetrics want;
        bool brute_ok = true;
        try {
            want = brute_force_eval(h, n_users, n_items, split, part, k);
        } catch (...) {
            brute_ok = false;
        }
        MetricsReport got;
        bool eval_ok = true;
        try {
            got = evaluate(h, split, part, {k});
        } catch (const NumericError&) {
            eval_ok = false;
        }
        if (!eval_ok) continue;  // a group had no evaluable users
        REQUIRE(brute_ok);
        CHECK(got.n_eval_users == want.n_eval_users);
        CHECK(got.at_k.at(k).recall == want.recall);  // exact
        CHECK(std::abs(got.at_k.at(k).ndcg - want.ndcg) < 1e-12);
        CHECK(std::abs(got.at_k.at(k).phi_r - want.phi_r) < 1e-12);
        CHECK(std::abs(got.at_k.at(k).phi_n - want.phi_n) < 1e-12);
    }
}

TEST_CASE("export_embeddings writes a parseable CSV that round-trips") {
    const auto part = partition_users({0, 1});
    Mat h(4, 2);
    h << 0.123456789012345678, -1.5, 2.25, 1e-17, 3.5, -0.75, 0.0, 42.0;
    const auto path = std::filesystem::temp_directory_path() / "fairdgcl_export_test.csv";
    export_embeddings(h, 2, part, path);

    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "node_id,role,group,dim_0,dim_1");
    int rows = 0;
    Mat parsed(4, 2);
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        const int id = std::stoi(tok);
        std::getline(ss, tok, ',');
        CHECK(tok == (id < 2 ? "user" : "item"));
        std::getline(ss, tok, ',');
        CHECK(std::stoi(tok) == (id < 2 ? part.labels[id] : -1));
        for (int j = 0; j < 2; ++j) {
            std::getline(ss, tok, ',');
            parsed(id, j) = std::stod(tok);
        }
        ++rows;
    }
    CHECK(rows == 4);
    CHECK((parsed - h).cwiseAbs().maxCoeff() == 0.0);  // 17 significant digits
    std::filesystem::remove(path);
}

TEST_CASE("embedding_nmi: separated blobs, random labels, degenerate data") {
    Rng rng(4);
    const int n = 60;
    std::vector<int> labels(n);
    Mat h(n, 2);
    for (int i = 0; i < n; ++i) {
        labels[i] = i < n / 2 ? 0 : 1;
        const double cx = labels[i] == 0 ? -10.0 : 10.0;
        h(i, 0) = cx + 0.1 * rng.normal();
        h(i, 1) = 0.1 * rng.normal();
    }
    const auto part = partition_users(labels);
    CHECK(embedding_nmi(h, part, 2, 0) > 0.99);

    // Labels independent of coordinates: NMI near 0 (median over 10 seeds).
    std::vector<double> nmis;
    for (int s = 0; s < 10; ++s) {
        Rng lr(100 + s);
        std::vector<int> rand_labels(n);
        int ones = 0;
        for (int i = 0; i < n; ++i) {
            rand_labels[i] = lr.uniform() < 0.5;
            ones += rand_labels[i];
        }
        if (ones == 0) rand_labels[0] = 1;
        if (ones == n) rand_labels[0] = 0;
        Mat hr(n, 2);
        for (int i = 0; i < n; ++i) {
            hr(i, 0) = lr.normal();
            hr(i, 1) = lr.normal();
        }
        nmis.push_back(embedding_nmi(hr, partition_users(rand_labels), 2, s));
    }
    std::sort(nmis.begin(), nmis.end());
    CHECK(nmis[5] < 0.1);

    // Duplicate points: a single occupied cluster scores 0.
    Mat dup = Mat::Ones(10, 2);
    CHECK(embedding_nmi(dup, partition_users({0, 1, 0, 1, 0, 1, 0, 1, 0, 1}), 2, 0) == 0.0);
}
