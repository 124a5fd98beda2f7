#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "cep/errors.hpp"
#include "cep/io_util.hpp"
#include "cep/labeling.hpp"
#include "cep/pipeline.hpp"

using namespace cep;
namespace fs = std::filesystem;

namespace {

std::string fresh_workdir(const std::string& name) {
    const std::string dir =
        (fs::temp_directory_path() / ("cep_pipe_" + name)).string();
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// small but end-to-end viable configuration
PipelineConfig tiny_config() {
    PipelineConfig cfg;
    cfg.synth.n_communities = 24;
    cfg.synth.keyword_rate_delta = 0.06;
    cfg.synth.score_mean_delta = 2.0;
    cfg.synth.edge_density_delta = 0.4;
    cfg.gbt.n_trees = 40;
    cfg.mlp.max_epochs = 3;
    cfg.eval.folds = 3;
    cfg.explain.permutations = 50;
    cfg.seed = 4242;
    return cfg;
}

}  // namespace

TEST_CASE("config json round-trips through parse and dump") {
    const PipelineConfig defaults = PipelineConfig::defaults();
    const std::string text = defaults.to_json_text();
    const PipelineConfig parsed = PipelineConfig::from_json_text(text);
    CHECK(parsed.to_json_text() == text);
    CHECK(parsed.eval.blocks.size() == 6);
    CHECK(parsed.gbt.n_trees == 100);
    CHECK(parsed.mlp.hidden == 150);
}

TEST_CASE("config validation names the offending key") {
    CHECK_THROWS_WITH_AS(PipelineConfig::from_json_text("{\"bogus\": 1}"),
                         "unknown config key: bogus", ConfigError);
    CHECK_THROWS_WITH_AS(PipelineConfig::from_json_text("{\"eval\": {\"folds\": \"x\"}}"),
                         "config value has the wrong type at eval.folds", ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_json_text("{\"eval\": {\"folds\": 1}}"), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_json_text("not json"), ConfigError);
    // ds1 must precede ds2
    CHECK_THROWS_AS(PipelineConfig::from_json_text(
                        "{\"ds1\": {\"start\": 100, \"end\": 300}, "
                        "\"ds2\": {\"start\": 200, \"end\": 400}}"),
                    ConfigError);
}

TEST_CASE("stages demand their prerequisites by name") {
    const std::string dir = fresh_workdir("prereq");
    Pipeline p(tiny_config(), dir);
    CHECK_THROWS_WITH_AS(p.evaluate(), "evaluate needs feature outputs: run featurize first",
                         PrereqError);
    CHECK_THROWS_WITH_AS(p.featurize(), "featurize needs ingested corpora: run ingest first",
                         PrereqError);
    CHECK_THROWS_WITH_AS(p.report(), "report needs evaluation outputs: run evaluate first",
                         PrereqError);
    CHECK_THROWS_AS(p.ingest(), PrereqError);  // no dumps configured, no synth output yet
}

TEST_CASE("synth stage is a no-op on identical manifests") {
    const std::string dir = fresh_workdir("noop");
    Pipeline p(tiny_config(), dir);
    const StageStatus first = p.synth();
    CHECK_FALSE(first.skipped);
    const StageStatus second = p.synth();
    CHECK(second.skipped);

    // --force reruns
    Pipeline forced(tiny_config(), dir, true);
    CHECK_FALSE(forced.synth().skipped);

    // a different seed invalidates the manifest
    PipelineConfig other = tiny_config();
    other.seed = 1;
    Pipeline reseeded(other, dir);
    CHECK_FALSE(reseeded.synth().skipped);
}

TEST_CASE("full pipeline runs end to end on a tiny synthetic dataset") {
    const std::string dir = fresh_workdir("e2e");
    Pipeline p(tiny_config(), dir);
    const auto statuses = p.run_all();
    REQUIRE(statuses.size() == 8);
    for (const auto& [stage, status] : statuses) {
        CAPTURE(stage);
        CHECK_FALSE(status.skipped);
    }

    for (const char* f :
         {"synth/submissions.jsonl", "ingest/ds1_submissions.jsonl", "label/labels.csv",
          "featurize/features.csv", "featurize/bags.json", "train/gbt.json", "train/mlp.json",
          "evaluate/report.csv", "evaluate/report.txt", "evaluate/errors.csv",
          "explain/beeswarm.csv", "explain/importance.csv", "explain/waterfall.json",
          "report/table.txt", "report/table.csv", "report/waterfall.json"}) {
        CAPTURE(f);
        CHECK(fs::exists(dir + "/" + std::string(f)));
    }

    SUBCASE("the report table carries six rows per model") {
        const std::string table = read_text_file(dir + "/report/table.txt");
        std::size_t gbt_rows = 0;
        std::size_t pos = 0;
        while ((pos = table.find("GBT", pos)) != std::string::npos) {
            ++gbt_rows;
            ++pos;
        }
        CHECK(gbt_rows == 6);
    }

    SUBCASE("feature matrix has the full 357-column layout") {
        const std::string header = read_text_file(dir + "/featurize/features.csv");
        const auto first_line = header.substr(0, header.find('\n'));
        std::size_t commas = 0;
        for (char c : first_line) commas += c == ',';
        CHECK(commas == 1 + 357);  // community,label + 357 feature columns
    }

    SUBCASE("reruns are no-ops end to end") {
        Pipeline again(tiny_config(), dir);
        for (const auto& [stage, status] : again.run_all()) {
            CAPTURE(stage);
            CHECK(status.skipped);
        }
    }

    SUBCASE("a fixed seed reproduces byte-identical reports in a fresh workdir") {
        const std::string dir2 = fresh_workdir("e2e_again");
        Pipeline p2(tiny_config(), dir2);
        p2.run_all();
        CHECK(read_text_file(dir + "/evaluate/report.csv") ==
              read_text_file(dir2 + "/evaluate/report.csv"));
        CHECK(read_text_file(dir + "/report/table.txt") ==
              read_text_file(dir2 + "/report/table.txt"));
        CHECK(read_text_file(dir + "/explain/importance.csv") ==
              read_text_file(dir2 + "/explain/importance.csv"));
        CHECK(read_text_file(dir + "/featurize/features.csv") ==
              read_text_file(dir2 + "/featurize/features.csv"));
    }

    SUBCASE("waterfall targets a configured community") {
        PipelineConfig cfg = tiny_config();
        cfg.explain.community = "synth0003";
        Pipeline retarget(cfg, dir, true);
        retarget.explain();
        const std::string w = read_text_file(dir + "/explain/waterfall.json");
        CHECK(w.find("synth0003") != std::string::npos);

        cfg.explain.community = "missing_community";
        Pipeline bad(cfg, dir, true);
        CHECK_THROWS_AS(bad.explain(), ValidationError);
    }
}

TEST_CASE("label discovery: atlas, regex bootstrap and matched negatives") {
    const std::string dir = fresh_workdir("discovery");
    const std::string data = dir + "/data";
    fs::create_directories(data);

    // activity data inside DS1 plus campaign-window data inside DS2, as one
    // pair of dumps
    PipelineConfig cfg = tiny_config();
    cfg.synth.n_communities = 20;
    cfg.eval.folds = 2;

    SynthConfig ds1_data = cfg.synth;
    ds1_data.seed = cfg.seed;
    ds1_data.window = cfg.ds1;
    const SynthDataset historical = synth_generate(ds1_data);
    SynthConfig ds2_data = cfg.synth;
    ds2_data.seed = cfg.seed + 1;
    ds2_data.window = cfg.ds2;
    ds2_data.keyword_rate_delta = 0.3;  // campaign chatter for the regex net
    const SynthDataset campaign = synth_generate(ds2_data);

    write_text_file(data + "/submissions.jsonl",
                    historical.submissions_jsonl + campaign.submissions_jsonl);
    write_text_file(data + "/comments.jsonl",
                    historical.comments_jsonl + campaign.comments_jsonl);
    write_text_file(data + "/metadata.csv", historical.metadata_csv);

    // half the true positives are "claimed" in the atlas; a small manual
    // seed provides both classes for the bootstrap
    const LabelSet gold = [&] {
        const std::string tmp = data + "/gold.csv";
        write_text_file(tmp, historical.labels_csv);
        return load_labels_csv(tmp);
    }();
    std::string atlas;
    std::string seed_csv = "community,label,provenance\n";
    int atlas_count = 0, seed_pos = 0, seed_neg = 0;
    for (const auto& p : gold.positives()) {
        if (atlas_count < 5) {
            atlas += p + "\n";
            ++atlas_count;
        } else if (seed_pos < 3) {
            seed_csv += p + ",positive,manual-seed\n";
            ++seed_pos;
        }
    }
    for (const auto& n : gold.negatives()) {
        if (seed_neg < 3) {
            seed_csv += n + ",negative,manual-seed\n";
            ++seed_neg;
        }
    }
    write_text_file(data + "/atlas.csv", atlas);
    write_text_file(data + "/seed.csv", seed_csv);
    write_text_file(data + "/patterns.txt", "vote\npixel\ncanvas\n");

    cfg.paths.submissions = data + "/submissions.jsonl";
    cfg.paths.comments = data + "/comments.jsonl";
    cfg.paths.metadata = data + "/metadata.csv";
    cfg.paths.atlas = data + "/atlas.csv";
    cfg.paths.patterns = data + "/patterns.txt";
    cfg.paths.seed_labels = data + "/seed.csv";
    cfg.labeling.confidence_threshold = 0.9;

    Pipeline p(cfg, dir);
    p.ingest();
    p.label();

    const LabelSet labels = load_labels_csv(dir + "/label/labels.csv");
    CHECK(labels.positives().size() >= 5);  // at least the atlas entries
    // every positive that is active in DS1 has a matched negative
    std::size_t matched = 0, bootstrapped = 0;
    for (const auto& [c, l] : labels.assignments()) {
        if (l == 0) {
            CHECK(labels.provenance_of(c) == kProvenanceMatchedNegative);
            ++matched;
        } else if (labels.provenance_of(c).rfind("bootstrap-iter-", 0) == 0) {
            ++bootstrapped;
        }
    }
    CHECK(matched > 0);
    CHECK(bootstrapped > 0);  // the regex net plus self-training found more

    // discovered labels flow into the rest of the pipeline
    p.featurize();
    p.evaluate();
    CHECK(fs::exists(dir + "/evaluate/report.csv"));
}

TEST_CASE("featurize exports per-community edge lists when asked") {
    const std::string dir = fresh_workdir("edges");
    PipelineConfig cfg = tiny_config();
    cfg.features.export_edges = true;
    Pipeline p(cfg, dir);
    p.synth();
    p.ingest();
    p.label();
    p.featurize();
    CHECK(fs::exists(dir + "/featurize/edges/synth0000.csv"));
    const std::string csv = read_text_file(dir + "/featurize/edges/synth0000.csv");
    CHECK(csv.rfind("u,v,weight\n", 0) == 0);
}

TEST_CASE("model json from the train stage reloads bit-exactly") {
    const std::string dir = fresh_workdir("roundtrip");
    Pipeline p(tiny_config(), dir);
    p.synth();
    p.ingest();
    p.label();
    p.featurize();
    p.train();
    const std::string text = read_text_file(dir + "/train/gbt.json");
    const TreeEnsemble m = TreeEnsemble::from_json(text);
    CHECK(m.to_json() + "\n" == text);
}
