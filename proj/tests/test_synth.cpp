#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "cep/corpus.hpp"
#include "cep/errors.hpp"
#include "cep/eval.hpp"
#include "cep/features.hpp"
#include "cep/graph.hpp"
#include "cep/io_util.hpp"
#include "cep/labeling.hpp"
#include "cep/synth.hpp"

using namespace cep;

namespace {

std::string temp_dir(const std::string& name) {
    const std::string dir =
        (std::filesystem::temp_directory_path() / ("cep_synth_" + name)).string();
    std::filesystem::create_directories(dir);
    return dir;
}

// synthetic files -> corpora -> per-community L/M/N blocks
CommunityDataset dataset_from(const SynthConfig& cfg) {
    const std::string dir = temp_dir("ds" + std::to_string(cfg.seed) + "_" +
                                     std::to_string(cfg.n_communities));
    synth_write(cfg, dir);

    LoadStats sub_stats, com_stats;
    auto subs = load_submissions(dir + "/submissions.jsonl", &sub_stats);
    auto coms = load_comments(dir + "/comments.jsonl", &com_stats);
    REQUIRE(sub_stats.skipped == 0);
    REQUIRE(com_stats.skipped == 0);
    const auto meta = load_metadata_csv(dir + "/metadata.csv");
    const auto corpora = build_corpora(std::move(subs), std::move(coms), meta, cfg.window);
    const LabelSet labels = load_labels_csv(dir + "/labels.csv");

    std::map<std::string, CommunityFeatures> feats;
    for (const auto& [name, corpus] : corpora) {
        CommunityFeatures f;
        f.community = name;
        f.text = submission_token_bag(corpus);
        f.meta = compute_meta_features(corpus, cfg.window.end);
        f.network = network_feature_vector(build_reply_graph(corpus));
        feats.emplace(name, std::move(f));
    }
    std::map<std::string, int> label_map;
    for (const auto& [c, l] : labels.assignments()) label_map[c] = l;
    return make_dataset(feats, label_map);
}

}  // namespace

TEST_CASE("generated files ingest with zero skipped lines") {
    SynthConfig cfg;
    cfg.n_communities = 12;
    cfg.seed = 5;
    const SynthDataset data = synth_generate(cfg);
    const std::string dir = temp_dir("ingest");
    write_text_file(dir + "/submissions.jsonl", data.submissions_jsonl);
    write_text_file(dir + "/comments.jsonl", data.comments_jsonl);

    LoadStats sub_stats, com_stats;
    const auto subs = load_submissions(dir + "/submissions.jsonl", &sub_stats);
    const auto coms = load_comments(dir + "/comments.jsonl", &com_stats);
    CHECK(sub_stats.skipped == 0);
    CHECK(com_stats.skipped == 0);
    CHECK(subs.size() == sub_stats.loaded);
    CHECK(!coms.empty());

    // every record lies inside the configured window
    for (const auto& s : subs) CHECK(cfg.window.contains(s.created));
    for (const auto& c : coms) CHECK(cfg.window.contains(c.created));
}

TEST_CASE("label balance within one community of the configured fraction") {
    for (double fraction : {0.5, 0.3}) {
        SynthConfig cfg;
        cfg.n_communities = 25;
        cfg.positive_fraction = fraction;
        cfg.seed = 9;
        const SynthDataset data = synth_generate(cfg);
        const std::string dir = temp_dir("balance");
        write_text_file(dir + "/labels.csv", data.labels_csv);
        const LabelSet labels = load_labels_csv(dir + "/labels.csv");
        const double target = fraction * cfg.n_communities;
        CHECK(std::abs(static_cast<double>(labels.positives().size()) - target) <= 1.0);
        CHECK(labels.size() == 25);
    }
}

TEST_CASE("fixed seed reproduces byte-identical files") {
    SynthConfig cfg;
    cfg.n_communities = 8;
    cfg.seed = 7;
    cfg.keyword_rate_delta = 0.05;
    const SynthDataset a = synth_generate(cfg);
    const SynthDataset b = synth_generate(cfg);
    CHECK(a.submissions_jsonl == b.submissions_jsonl);
    CHECK(a.comments_jsonl == b.comments_jsonl);
    CHECK(a.metadata_csv == b.metadata_csv);
    CHECK(a.labels_csv == b.labels_csv);

    cfg.seed = 8;
    const SynthDataset c = synth_generate(cfg);
    CHECK(a.submissions_jsonl != c.submissions_jsonl);
}

TEST_CASE("config validation") {
    SynthConfig cfg;
    cfg.n_communities = 2;
    CHECK_THROWS_AS(synth_generate(cfg), ValidationError);
    cfg.n_communities = 10;
    cfg.positive_fraction = 1.5;
    CHECK_THROWS_AS(synth_generate(cfg), ValidationError);
    cfg.positive_fraction = 0.5;
    cfg.score_mean_delta = -1.0;
    CHECK_THROWS_AS(synth_generate(cfg), ValidationError);
}

TEST_CASE("an N-only signal favors the network block over the linguistic one") {
    SynthConfig cfg;
    cfg.n_communities = 80;
    cfg.seed = 31;
    cfg.keyword_rate_delta = 0.0;
    cfg.score_mean_delta = 0.0;
    cfg.edge_density_delta = 0.5;  // only the network signal is on
    const CommunityDataset ds = dataset_from(cfg);

    AblationConfig ac;
    ac.folds = 5;
    ac.seed = 17;
    ac.models = {"gbt"};
    ac.block_subsets = {"L", "N"};
    ac.gbt.n_trees = 40;
    const EvalReport report = run_ablation(ds, ac);

    const double f1_l = report.find("gbt", "L")->mean.f1;
    const double f1_n = report.find("gbt", "N")->mean.f1;
    CAPTURE(f1_l);
    CAPTURE(f1_n);
    CHECK(f1_n > f1_l);
}

TEST_CASE("positive communities carry the injected structural signal") {
    SynthConfig cfg;
    cfg.n_communities = 30;
    cfg.seed = 77;
    cfg.keyword_rate_delta = 0.0;
    cfg.score_mean_delta = 0.0;
    cfg.edge_density_delta = 0.5;
    const CommunityDataset ds = dataset_from(cfg);

    double pos_triangles = 0, neg_triangles = 0;
    int pos_n = 0, neg_n = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labels[i]) {
            pos_triangles += ds.network[i][1];
            ++pos_n;
        } else {
            neg_triangles += ds.network[i][1];
            ++neg_n;
        }
    }
    REQUIRE(pos_n > 0);
    REQUIRE(neg_n > 0);
    CHECK(pos_triangles / pos_n > neg_triangles / neg_n);
}
