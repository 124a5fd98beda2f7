#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cep/errors.hpp"
#include "cep/explain.hpp"
#include "cep/gbt.hpp"
#include "cep/rng.hpp"
#include "oracle/shap_oracle.hpp"

using namespace cep;

namespace {

struct Dataset {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
};

Dataset random_dataset(std::uint64_t seed, int n, int dims) {
    Dataset d;
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        const int label = i % 2;
        std::vector<double> row(dims);
        for (int f = 0; f < dims; ++f)
            row[f] = rng.normal(f % 2 == 0 ? (label ? 0.8 : -0.8) : 0.0, 1.0);
        d.X.push_back(std::move(row));
        d.y.push_back(label);
    }
    return d;
}

TreeEnsemble small_ensemble(std::uint64_t seed, int n_trees, int dims, int depth = 3) {
    const Dataset d = random_dataset(seed, 60, dims);
    GbtParams p;
    p.n_trees = n_trees;
    p.max_depth = depth;
    return gbt_train(d.X, d.y, p);
}

}  // namespace

TEST_CASE("efficiency: base plus contributions equals the margin") {
    const Dataset d = random_dataset(31, 60, 6);
    const TreeEnsemble m = gbt_train(d.X, d.y, {});
    for (const auto& row : d.X) {
        const ShapAttribution a = tree_shap(m, row);
        double total = a.base_value;
        for (double phi : a.contributions) total += phi;
        CHECK(total == doctest::Approx(a.output_margin).epsilon(1e-6));
        CHECK(a.output_probability == doctest::Approx(sigmoid(a.output_margin)));
    }
}

TEST_CASE("features absent from every tree get exactly zero") {
    Dataset d = random_dataset(32, 60, 2);
    for (auto& row : d.X) row.push_back(1.0);  // constant, never split on
    const TreeEnsemble m = gbt_train(d.X, d.y, {});
    for (const auto& row : d.X) {
        const ShapAttribution a = tree_shap(m, row);
        CHECK(a.contributions[2] == 0.0);
    }
}

TEST_CASE("single stump with even covers pushes the full margin delta") {
    // one depth-1 tree whose covers split 50/50 over the training rows
    Dataset d;
    for (int i = 0; i < 50; ++i) {
        d.X.push_back({i < 25 ? -1.0 : 1.0});
        d.y.push_back(i < 25 ? 0 : 1);
    }
    GbtParams p;
    p.n_trees = 1;
    const TreeEnsemble m = gbt_train(d.X, d.y, p);
    REQUIRE(m.trees.size() == 1);
    REQUIRE(m.trees[0].nodes.size() == 3);

    const ShapAttribution a = tree_shap(m, d.X[40]);
    CHECK(a.contributions[0] ==
          doctest::Approx(a.output_margin - a.base_value).epsilon(1e-9));

    double base_oracle = 0.0;
    const auto phi = oracle::shapley_bruteforce(m, d.X[40], &base_oracle);
    CHECK(a.base_value == doctest::Approx(base_oracle).epsilon(1e-9));
    CHECK(a.contributions[0] == doctest::Approx(phi[0]).epsilon(1e-9));
}

TEST_CASE("brute-force Shapley equivalence on small ensembles") {
    Rng rng(8);
    for (const auto& [seed, trees, dims] :
         std::vector<std::tuple<std::uint64_t, int, int>>{
             {100, 1, 2}, {101, 2, 4}, {102, 3, 6}, {103, 3, 5}, {104, 2, 6}}) {
        const TreeEnsemble m = small_ensemble(seed, trees, dims);
        for (int round = 0; round < 8; ++round) {
            std::vector<double> row(dims);
            for (int f = 0; f < dims; ++f) row[f] = rng.normal(0.0, 1.2);
            const ShapAttribution a = tree_shap(m, row);
            double base_oracle = 0.0;
            const auto phi = oracle::shapley_bruteforce(m, row, &base_oracle);
            CHECK(a.base_value == doctest::Approx(base_oracle).epsilon(1e-9));
            for (int f = 0; f < dims; ++f) {
                CAPTURE(seed);
                CAPTURE(f);
                CHECK(a.contributions[f] == doctest::Approx(phi[f]).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("features used identically receive equal attributions") {
    // two mirrored stumps, one per feature, with identical thresholds,
    // covers and leaf values
    auto stump = [](int feature) {
        Tree t;
        t.nodes.resize(3);
        t.nodes[0].feature = feature;
        t.nodes[0].threshold = 0.0;
        t.nodes[0].left = 1;
        t.nodes[0].right = 2;
        t.nodes[0].cover = 10.0;
        t.nodes[1].value = -1.5;
        t.nodes[1].cover = 6.0;
        t.nodes[2].value = 2.0;
        t.nodes[2].cover = 4.0;
        return t;
    };
    TreeEnsemble m;
    m.params.learning_rate = 0.1;
    m.base_score = 0.25;
    m.feature_names = {"a", "b"};
    m.trees = {stump(0), stump(1)};

    for (double x : {-2.0, -0.5, 0.5, 3.0}) {
        const std::vector<double> row{x, x};  // values agree
        const ShapAttribution a = tree_shap(m, row);
        CHECK(a.contributions[0] == doctest::Approx(a.contributions[1]).epsilon(1e-12));

        double base_oracle = 0.0;
        const auto phi = oracle::shapley_bruteforce(m, row, &base_oracle);
        CHECK(a.contributions[0] == doctest::Approx(phi[0]).epsilon(1e-9));
        CHECK(a.contributions[1] == doctest::Approx(phi[1]).epsilon(1e-9));
    }

    // the tie-broken training path gives the never-used duplicate exactly
    // zero by the dummy axiom
    Dataset d = random_dataset(33, 80, 1);
    for (auto& row : d.X) row.push_back(row[0]);
    const TreeEnsemble trained = gbt_train(d.X, d.y, {});
    for (int i = 0; i < 10; ++i) {
        const ShapAttribution a = tree_shap(trained, d.X[i]);
        CHECK(a.contributions[1] == 0.0);
    }
}

TEST_CASE("explaining an untrained model is a state error") {
    TreeEnsemble m;
    CHECK_THROWS_AS(tree_shap(m, std::vector<double>{1.0}), StateError);
}

TEST_CASE("aggregate importance ranks by mean absolute value") {
    const Dataset d = random_dataset(34, 60, 4);
    const TreeEnsemble m = gbt_train(d.X, d.y, {});
    std::vector<std::string> names;
    for (std::size_t i = 0; i < d.X.size(); ++i) names.push_back("row" + std::to_string(i));
    const auto attrs = tree_shap_batch(m, d.X, names);

    const AggregateShap agg = aggregate_shap(attrs, d.X, m.feature_names, 200, 9);
    REQUIRE(agg.ranking.size() == 4);
    for (std::size_t i = 1; i < agg.ranking.size(); ++i)
        CHECK(agg.ranking[i - 1].mean_abs_shap >= agg.ranking[i].mean_abs_shap);
    for (const auto& f : agg.ranking) {
        CHECK(f.p_value > 0.0);
        CHECK(f.p_value <= 1.0);
    }

    SUBCASE("single attribution importance equals its absolute value") {
        const std::vector<ShapAttribution> one{attrs[0]};
        const std::vector<std::vector<double>> raw{d.X[0]};
        const AggregateShap single = aggregate_shap(one, raw, m.feature_names, 0, 0);
        for (const auto& f : single.ranking) {
            int idx = -1;
            for (std::size_t k = 0; k < m.feature_names.size(); ++k)
                if (m.feature_names[k] == f.feature) idx = static_cast<int>(k);
            REQUIRE(idx >= 0);
            CHECK(f.mean_abs_shap ==
                  doctest::Approx(std::abs(attrs[0].contributions[idx])));
        }
    }
    SUBCASE("constant-zero feature ranks last with zero importance") {
        Dataset padded = d;
        for (auto& row : padded.X) row.push_back(0.5);
        const TreeEnsemble m2 = gbt_train(padded.X, padded.y, {});
        const auto attrs2 = tree_shap_batch(m2, padded.X, names);
        const AggregateShap agg2 = aggregate_shap(attrs2, padded.X, m2.feature_names, 50, 1);
        CHECK(agg2.ranking.back().feature == "f4");
        CHECK(agg2.ranking.back().mean_abs_shap == 0.0);
    }
}

TEST_CASE("beeswarm export carries one row per feature and instance") {
    const Dataset d = random_dataset(35, 10, 2);
    const TreeEnsemble m = gbt_train(d.X, d.y, {});
    std::vector<std::string> names;
    for (int i = 0; i < 10; ++i) names.push_back("r" + std::to_string(i));
    const auto attrs = tree_shap_batch(m, d.X, names);
    const std::string csv = beeswarm_csv(attrs, d.X, m.feature_names);
    std::size_t rows = 0;
    for (char c : csv) rows += c == '\n';
    CHECK(rows == 1 + 2 * 10);
    CHECK(csv.rfind("feature,instance,shap_value,raw_value\n", 0) == 0);
}

TEST_CASE("waterfall reconstructs the output probability") {
    const Dataset d = random_dataset(36, 60, 6);
    const TreeEnsemble m = gbt_train(d.X, d.y, {});
    const ShapAttribution a = tree_shap(m, d.X[7], "target");

    SUBCASE("top_k >= feature count leaves no remainder") {
        const Waterfall w = waterfall(a, m.feature_names, 100);
        CHECK(w.entries.size() == 6);
        for (const auto& e : w.entries) CHECK(e.name != "other features");
        CHECK(w.final_probability == doctest::Approx(a.output_probability).epsilon(1e-6));
    }
    SUBCASE("remainder entry closes the gap") {
        const Waterfall w = waterfall(a, m.feature_names, 2);
        REQUIRE(w.entries.size() == 3);
        CHECK(w.entries.back().name == "other features");
        CHECK(w.base_probability == doctest::Approx(sigmoid(a.base_value)));
        CHECK(w.final_probability == doctest::Approx(a.output_probability).epsilon(1e-6));
        // entries sorted by |phi| descending
        CHECK(std::abs(w.entries[0].phi) >= std::abs(w.entries[1].phi));
        // cumulative probabilities trace the margin chain
        double margin = a.base_value;
        for (const auto& e : w.entries) {
            margin += e.phi;
            CHECK(e.cumulative_probability == doctest::Approx(sigmoid(margin)).epsilon(1e-9));
        }
    }
    SUBCASE("top_k must be positive") {
        CHECK_THROWS_AS(waterfall(a, m.feature_names, 0), ValidationError);
    }
    SUBCASE("json export carries base, entries and final") {
        const std::string j = waterfall_json(waterfall(a, m.feature_names, 3));
        CHECK(j.find("\"base\"") != std::string::npos);
        CHECK(j.find("\"final\"") != std::string::npos);
        CHECK(j.find("cumulative_probability") != std::string::npos);
    }
}
