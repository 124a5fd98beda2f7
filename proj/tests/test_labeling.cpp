#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "cep/errors.hpp"
#include "cep/io_util.hpp"
#include "cep/labeling.hpp"
#include "cep/rng.hpp"

using namespace cep;

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
    const std::string path =
        (std::filesystem::temp_directory_path() / ("cep_label_" + name)).string();
    write_text_file(path, content);
    return path;
}

CommunityCorpus corpus_with_text(const std::string& community, const std::string& text) {
    CommunityCorpus c;
    c.community = community;
    c.window = {0, 100};
    SubmissionRecord s;
    s.id = community + "_s";
    s.community = community;
    s.author = "u";
    s.title = text;
    s.created = 10;
    c.submissions.push_back(s);
    return c;
}

// Feature table where row i is {i, i*i}; enough structure for a
// deterministic classifier on small seeds.
FeatureMatrix grid_features(const std::vector<std::string>& names,
                            const std::vector<double>& signal) {
    FeatureMatrix m;
    m.column_names = {"x", "x_sq"};
    for (std::size_t i = 0; i < names.size(); ++i) {
        m.row_names.push_back(names[i]);
        m.labels.push_back(0);
        m.rows.push_back({signal[i], signal[i] * signal[i]});
    }
    return m;
}

}  // namespace

TEST_CASE("label assignments stay disjoint") {
    LabelSet s;
    s.assign("a", 1, kProvenanceAtlas);
    s.assign("a", 1, kProvenanceAtlas);  // duplicate collapses
    CHECK(s.size() == 1);
    CHECK_THROWS_AS(s.assign("a", 0, kProvenanceMatchedNegative), ValidationError);
    CHECK(s.label_of("a") == 1);
    CHECK(s.provenance_of("a") == kProvenanceAtlas);
    CHECK_THROWS_AS(s.label_of("missing"), ValidationError);
}

TEST_CASE("atlas import dedups and tolerates a header") {
    SUBCASE("duplicates collapse") {
        const auto labels = import_atlas(temp_file("a.csv", "a\nb\nb\n"));
        CHECK(labels.positives() == std::set<std::string>{"a", "b"});
    }
    SUBCASE("empty file yields an empty set") {
        const auto labels = import_atlas(temp_file("empty.csv", ""));
        CHECK(labels.size() == 0);
    }
    SUBCASE("optional header line is skipped") {
        const auto labels = import_atlas(temp_file("hdr.csv", "community\nx\ny\n"));
        CHECK(labels.positives() == std::set<std::string>{"x", "y"});
    }
    SUBCASE("many names all land") {
        std::string content;
        for (int i = 0; i < 802; ++i) content += "sub" + std::to_string(i) + "\n";
        const auto labels = import_atlas(temp_file("many.csv", content));
        CHECK(labels.positives().size() == 802);
    }
    SUBCASE("missing file is fatal") {
        CHECK_THROWS_AS(import_atlas("/no/such/atlas.csv"), IoError);
    }
}

TEST_CASE("labels csv round-trips with provenance") {
    LabelSet s;
    s.assign("a", 1, kProvenanceAtlas);
    s.assign("b", 0, kProvenanceMatchedNegative);
    const std::string path = temp_file("roundtrip.csv", labels_csv(s));
    const LabelSet back = load_labels_csv(path);
    CHECK(back.label_of("a") == 1);
    CHECK(back.label_of("b") == 0);
    CHECK(back.provenance_of("b") == kProvenanceMatchedNegative);
}

TEST_CASE("regex candidates match normalized text") {
    std::map<std::string, CommunityCorpus> corpora;
    corpora["hit"] = corpus_with_text("hit", "Place a PIXEL now!");
    corpora["miss"] = corpus_with_text("miss", "nothing to see");
    corpora["empty"] = CommunityCorpus{};
    corpora["empty"].community = "empty";

    const auto candidates = regex_candidates(corpora, {"pixel", "canvas"});
    CHECK(candidates == std::set<std::string>{"hit"});

    SUBCASE("comment text also matches") {
        CommentRecord c;
        c.id = "c1";
        c.community = "miss";
        c.author = "u";
        c.body = "let us draw on the canvas";
        c.created = 10;
        c.parent_id = "t3_x";
        c.link_id = "t3_x";
        corpora["miss"].comments.push_back(c);
        const auto more = regex_candidates(corpora, {"pixel", "canvas"});
        CHECK(more.count("miss") == 1);
    }
    SUBCASE("invalid patterns are configuration errors") {
        CHECK_THROWS_AS(regex_candidates(corpora, {"("}), ConfigError);
        CHECK_THROWS_AS(regex_candidates(corpora, {}), ConfigError);
    }
}

TEST_CASE("bootstrap promotes high-confidence candidates only") {
    // negatives at low x, positives at high x; n3 and p3 share x = 0 so a
    // candidate at 0 sits in a leaf with both classes and stays ambiguous
    std::vector<std::string> names{"n1", "n2", "n3", "p1", "p2", "p3",
                                   "cand_hi", "cand_mid"};
    std::vector<double> signal{-3, -2.5, 0.0, 3, 2.5, 0.0, 2.8, 0.0};
    const FeatureMatrix features = grid_features(names, signal);

    LabelSet seed;
    for (const char* n : {"n1", "n2", "n3"}) seed.assign(n, 0, kProvenanceManualSeed);
    for (const char* p : {"p1", "p2", "p3"}) seed.assign(p, 1, kProvenanceManualSeed);

    BootstrapConfig cfg;
    cfg.patterns = {"irrelevant"};
    cfg.confidence_threshold = 0.95;
    cfg.max_iterations = 3;
    cfg.classifier.n_trees = 40;

    const BootstrapResult result =
        bootstrap_labels(seed, {"cand_hi", "cand_mid"}, features, cfg);

    CHECK(result.labels.contains("cand_hi"));
    CHECK(result.labels.label_of("cand_hi") == 1);
    CHECK(result.labels.provenance_of("cand_hi") == "bootstrap-iter-1");
    CHECK_FALSE(result.labels.contains("cand_mid"));  // ambiguous stays out
    CHECK(result.added_per_iteration.size() <= 3);

    SUBCASE("positives never shrink and halt within max iterations") {
        const auto before = seed.positives();
        const auto after = result.labels.positives();
        for (const auto& p : before) CHECK(after.count(p) == 1);
        CHECK(after.size() >= before.size());
        // last executed iteration adds nothing or the budget is exhausted
        if (result.added_per_iteration.size() < 3)
            CHECK(result.added_per_iteration.back() == 0);
    }
    SUBCASE("single-class seeds are rejected") {
        LabelSet bad;
        bad.assign("p1", 1, kProvenanceManualSeed);
        CHECK_THROWS_AS(bootstrap_labels(bad, {"cand_hi"}, features, cfg), ValidationError);
    }
    SUBCASE("candidates need feature vectors") {
        CHECK_THROWS_AS(bootstrap_labels(seed, {"ghost"}, features, cfg), ValidationError);
    }
}

TEST_CASE("negative matching pairs nearest sizes greedily") {
    SUBCASE("documented example") {
        const LabelSet out = match_negatives({{"p_small", 100}, {"p_big", 2300}},
                                             {{"n_90", 90}, {"n_2500", 2500}, {"n_10", 10}});
        CHECK(out.negatives() == std::set<std::string>{"n_90", "n_2500"});
        CHECK(out.provenance_of("n_90") == kProvenanceMatchedNegative);
    }
    SUBCASE("equal sizes use the whole pool") {
        const LabelSet out =
            match_negatives({{"p1", 10}, {"p2", 20}}, {{"n1", 15}, {"n2", 25}});
        CHECK(out.negatives().size() == 2);
    }
    SUBCASE("matching is injective") {
        // both positives are nearest to the same pool entry; only one gets it
        const LabelSet out = match_negatives({{"p1", 100}, {"p2", 101}},
                                             {{"n_100", 100}, {"n_500", 500}});
        CHECK(out.negatives().size() == 2);
    }
    SUBCASE("ties break to the lexicographically smaller name") {
        const LabelSet out = match_negatives({{"p", 100}}, {{"zz", 100}, {"aa", 100}});
        CHECK(out.negatives() == std::set<std::string>{"aa"});
    }
    SUBCASE("pool exhaustion and contamination are errors") {
        CHECK_THROWS_AS(match_negatives({{"p1", 1}, {"p2", 2}}, {{"n1", 1}}), ValidationError);
        CHECK_THROWS_AS(match_negatives({{"p1", 1}}, {{"p1", 1}, {"n", 2}}), ValidationError);
    }
}

TEST_CASE("community size metric selects submissions or subscribers") {
    CommunityCorpus c = corpus_with_text("x", "hello");
    c.meta = CommunityMeta{"x", 777, 1};
    CHECK(community_size(c, SizeMetric::Submissions) == 1.0);
    CHECK(community_size(c, SizeMetric::Subscribers) == 777.0);
    c.meta.reset();
    CHECK_THROWS_AS(community_size(c, SizeMetric::Subscribers), ValidationError);
}

TEST_CASE("randomized matching stays injective and nearest-by-size") {
    Rng rng(40);
    for (int round = 0; round < 20; ++round) {
        std::map<std::string, double> positives, pool;
        const int np = 2 + static_cast<int>(rng.uniform_u64(6));
        const int nq = np + static_cast<int>(rng.uniform_u64(5));
        for (int i = 0; i < np; ++i)
            positives["p" + std::to_string(i)] = static_cast<double>(rng.uniform_u64(50));
        for (int i = 0; i < nq; ++i)
            pool["n" + std::to_string(i)] = static_cast<double>(rng.uniform_u64(50));
        const LabelSet out = match_negatives(positives, pool);
        CHECK(out.negatives().size() == positives.size());  // injective by construction
        for (const auto& n : out.negatives()) CHECK(pool.count(n) == 1);
    }
}
