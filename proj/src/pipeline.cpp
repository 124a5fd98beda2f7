#include "cep/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>

#include <json.hpp>

#include "cep/errors.hpp"
#include "cep/explain.hpp"
#include "cep/io_util.hpp"
#include "cep/labeling.hpp"

namespace fs = std::filesystem;

namespace cep {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

// --- config schema -------------------------------------------------------

template <typename T>
void read_key(const json& j, const char* key, T& out, const std::string& prefix) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config value has the wrong type at " + prefix + key);
    }
}

void check_known_keys(const json& j, const std::vector<std::string>& known,
                      const std::string& prefix) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown config key: " + prefix + key);
    }
}

void read_window(const json& j, const char* key, TimeWindow& w, const std::string& prefix) {
    auto it = j.find(key);
    if (it == j.end()) return;
    check_known_keys(*it, {"start", "end"}, prefix + key + ".");
    read_key(*it, "start", w.start, prefix + key + ".");
    read_key(*it, "end", w.end, prefix + key + ".");
}

json window_json(const TimeWindow& w) { return {{"start", w.start}, {"end", w.end}}; }

std::string slurp_lines_file(const std::string& path, std::vector<std::string>& lines) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        auto sv = trim(line);
        if (!sv.empty()) lines.emplace_back(sv);
    }
    return path;
}

json submission_to_json(const SubmissionRecord& s) {
    json j;
    j["id"] = s.id;
    j["subreddit"] = s.community;
    j["author"] = s.author;
    j["title"] = s.title;
    j["selftext"] = s.body;
    j["score"] = s.score;
    j["created_utc"] = s.created;
    j["num_comments"] = s.comment_count;
    return j;
}

json comment_to_json(const CommentRecord& c) {
    json j;
    j["id"] = c.id;
    j["subreddit"] = c.community;
    j["author"] = c.author;
    j["body"] = c.body;
    j["score"] = c.score;
    j["created_utc"] = c.created;
    j["parent_id"] = c.parent_id;
    j["link_id"] = c.link_id;
    return j;
}

struct LoadedFeatures {
    std::vector<std::string> names;
    std::vector<int> labels;
    std::vector<std::string> column_names;
    std::vector<std::vector<double>> rows;
};

LoadedFeatures load_features_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open feature matrix: " + path);
    LoadedFeatures out;
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": empty feature matrix");
    auto header = split_csv_line(trim(line));
    if (header.size() < 3 || header[0] != "community" || header[1] != "label")
        throw FormatError(path + ": unexpected feature matrix header");
    out.column_names.assign(header.begin() + 2, header.end());
    while (std::getline(in, line)) {
        auto sv = trim(line);
        if (sv.empty()) continue;
        auto fields = split_csv_line(sv);
        if (fields.size() != header.size())
            throw FormatError(path + ": ragged feature matrix row");
        out.names.push_back(fields[0]);
        out.labels.push_back(std::stoi(fields[1]));
        std::vector<double> row(fields.size() - 2);
        for (std::size_t i = 2; i < fields.size(); ++i) row[i - 2] = std::stod(fields[i]);
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::map<std::string, TokenBag> load_bags_json(const std::string& path) {
    json j = json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded()) throw FormatError(path + ": invalid bag file");
    std::map<std::string, TokenBag> out;
    for (const auto& [community, body] : j.items()) {
        TokenBag bag;
        bag.total = body.at("total").get<long long>();
        for (const auto& [token, count] : body.at("counts").items())
            bag.counts[token] = count.get<long long>();
        out[community] = std::move(bag);
    }
    return out;
}

}  // namespace

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON");
    if (!j.is_object()) throw ConfigError("config root must be an object");

    PipelineConfig cfg;
    check_known_keys(j, {"paths", "ds1", "ds2", "labeling", "features", "gbt", "mlp", "eval",
                         "explain", "synth", "seed", "workers"},
                     "");

    if (j.contains("paths")) {
        const json& p = j["paths"];
        check_known_keys(p, {"submissions", "comments", "metadata", "atlas", "patterns",
                             "seed_labels", "labels"},
                         "paths.");
        read_key(p, "submissions", cfg.paths.submissions, "paths.");
        read_key(p, "comments", cfg.paths.comments, "paths.");
        read_key(p, "metadata", cfg.paths.metadata, "paths.");
        read_key(p, "atlas", cfg.paths.atlas, "paths.");
        read_key(p, "patterns", cfg.paths.patterns, "paths.");
        read_key(p, "seed_labels", cfg.paths.seed_labels, "paths.");
        read_key(p, "labels", cfg.paths.labels, "paths.");
    }
    read_window(j, "ds1", cfg.ds1, "");
    read_window(j, "ds2", cfg.ds2, "");
    if (j.contains("labeling")) {
        const json& l = j["labeling"];
        check_known_keys(l, {"confidence_threshold", "max_iterations", "size_metric"},
                         "labeling.");
        read_key(l, "confidence_threshold", cfg.labeling.confidence_threshold, "labeling.");
        read_key(l, "max_iterations", cfg.labeling.max_iterations, "labeling.");
        read_key(l, "size_metric", cfg.labeling.size_metric, "labeling.");
    }
    if (j.contains("features")) {
        const json& f = j["features"];
        check_known_keys(f, {"vocab_size", "submission_cap", "export_edges"}, "features.");
        read_key(f, "vocab_size", cfg.features.vocab_size, "features.");
        read_key(f, "submission_cap", cfg.features.submission_cap, "features.");
        read_key(f, "export_edges", cfg.features.export_edges, "features.");
    }
    if (j.contains("gbt")) {
        const json& g = j["gbt"];
        check_known_keys(g, {"n_trees", "max_depth", "learning_rate", "min_samples_leaf"},
                         "gbt.");
        read_key(g, "n_trees", cfg.gbt.n_trees, "gbt.");
        read_key(g, "max_depth", cfg.gbt.max_depth, "gbt.");
        read_key(g, "learning_rate", cfg.gbt.learning_rate, "gbt.");
        read_key(g, "min_samples_leaf", cfg.gbt.min_samples_leaf, "gbt.");
    }
    if (j.contains("mlp")) {
        const json& m = j["mlp"];
        check_known_keys(m,
                         {"hidden", "max_epochs", "batch_size", "step_size",
                          "early_stopping_patience", "validation_fraction"},
                         "mlp.");
        read_key(m, "hidden", cfg.mlp.hidden, "mlp.");
        read_key(m, "max_epochs", cfg.mlp.max_epochs, "mlp.");
        read_key(m, "batch_size", cfg.mlp.batch_size, "mlp.");
        read_key(m, "step_size", cfg.mlp.step_size, "mlp.");
        read_key(m, "early_stopping_patience", cfg.mlp.early_stopping_patience, "mlp.");
        read_key(m, "validation_fraction", cfg.mlp.validation_fraction, "mlp.");
    }
    if (j.contains("eval")) {
        const json& e = j["eval"];
        check_known_keys(e, {"folds", "models", "blocks"}, "eval.");
        read_key(e, "folds", cfg.eval.folds, "eval.");
        read_key(e, "models", cfg.eval.models, "eval.");
        read_key(e, "blocks", cfg.eval.blocks, "eval.");
    }
    if (j.contains("explain")) {
        const json& e = j["explain"];
        check_known_keys(e, {"top_k", "permutations", "community"}, "explain.");
        read_key(e, "top_k", cfg.explain.top_k, "explain.");
        read_key(e, "permutations", cfg.explain.permutations, "explain.");
        read_key(e, "community", cfg.explain.community, "explain.");
    }
    if (j.contains("synth")) {
        const json& s = j["synth"];
        check_known_keys(s,
                         {"n_communities", "positive_fraction", "keyword_rate_delta",
                          "score_mean_delta", "edge_density_delta"},
                         "synth.");
        read_key(s, "n_communities", cfg.synth.n_communities, "synth.");
        read_key(s, "positive_fraction", cfg.synth.positive_fraction, "synth.");
        read_key(s, "keyword_rate_delta", cfg.synth.keyword_rate_delta, "synth.");
        read_key(s, "score_mean_delta", cfg.synth.score_mean_delta, "synth.");
        read_key(s, "edge_density_delta", cfg.synth.edge_density_delta, "synth.");
    }
    read_key(j, "seed", cfg.seed, "");
    read_key(j, "workers", cfg.workers, "");
    cfg.validate();
    return cfg;
}

std::string PipelineConfig::to_json_text() const {
    json j;
    j["paths"] = {{"submissions", paths.submissions}, {"comments", paths.comments},
                  {"metadata", paths.metadata},       {"atlas", paths.atlas},
                  {"patterns", paths.patterns},       {"seed_labels", paths.seed_labels},
                  {"labels", paths.labels}};
    j["ds1"] = window_json(ds1);
    j["ds2"] = window_json(ds2);
    j["labeling"] = {{"confidence_threshold", labeling.confidence_threshold},
                     {"max_iterations", labeling.max_iterations},
                     {"size_metric", labeling.size_metric}};
    j["features"] = {{"vocab_size", features.vocab_size},
                     {"submission_cap", features.submission_cap},
                     {"export_edges", features.export_edges}};
    j["gbt"] = {{"n_trees", gbt.n_trees},
                {"max_depth", gbt.max_depth},
                {"learning_rate", gbt.learning_rate},
                {"min_samples_leaf", gbt.min_samples_leaf}};
    j["mlp"] = {{"hidden", mlp.hidden},
                {"max_epochs", mlp.max_epochs},
                {"batch_size", mlp.batch_size},
                {"step_size", mlp.step_size},
                {"early_stopping_patience", mlp.early_stopping_patience},
                {"validation_fraction", mlp.validation_fraction}};
    j["eval"] = {{"folds", eval.folds}, {"models", eval.models}, {"blocks", eval.blocks}};
    j["explain"] = {{"top_k", explain.top_k},
                    {"permutations", explain.permutations},
                    {"community", explain.community}};
    j["synth"] = {{"n_communities", synth.n_communities},
                  {"positive_fraction", synth.positive_fraction},
                  {"keyword_rate_delta", synth.keyword_rate_delta},
                  {"score_mean_delta", synth.score_mean_delta},
                  {"edge_density_delta", synth.edge_density_delta}};
    j["seed"] = seed;
    j["workers"] = workers;
    return j.dump(2) + "\n";
}

void PipelineConfig::validate() const {
    if (ds1.start >= ds1.end) throw ConfigError("invalid window at ds1: start must precede end");
    if (ds2.start >= ds2.end) throw ConfigError("invalid window at ds2: start must precede end");
    if (ds1.end > ds2.start) throw ConfigError("ds1 window must precede ds2 window");
    if (labeling.confidence_threshold <= 0.0 || labeling.confidence_threshold >= 1.0)
        throw ConfigError("labeling.confidence_threshold must lie in (0,1)");
    if (labeling.max_iterations < 1) throw ConfigError("labeling.max_iterations must be >= 1");
    if (labeling.size_metric != "submissions" && labeling.size_metric != "subscribers")
        throw ConfigError("labeling.size_metric must be submissions or subscribers");
    if (features.vocab_size < 1 || features.vocab_size > kLinguisticFeatureCount)
        throw ConfigError("features.vocab_size must lie in [1,300]");
    if (features.submission_cap < 1) throw ConfigError("features.submission_cap must be >= 1");
    if (eval.folds < 2) throw ConfigError("eval.folds must be >= 2");
    for (const auto& m : eval.models) {
        if (m != "gbt" && m != "mlp") throw ConfigError("eval.models: unknown model " + m);
    }
    for (const auto& b : eval.blocks) parse_blocks(b);
    if (explain.top_k < 1) throw ConfigError("explain.top_k must be >= 1");
    if (explain.permutations < 0) throw ConfigError("explain.permutations must be >= 0");
    if (synth.n_communities < 4) throw ConfigError("synth.n_communities must be >= 4");
    if (synth.positive_fraction <= 0.0 || synth.positive_fraction >= 1.0)
        throw ConfigError("synth.positive_fraction must lie in (0,1)");
    if (workers < 0) throw ConfigError("workers must be >= 0");
}

// --- pipeline ------------------------------------------------------------

Pipeline::Pipeline(PipelineConfig config, std::string workdir, bool force)
    : cfg_(std::move(config)), workdir_(std::move(workdir)), force_(force) {
    cfg_.validate();
    if (cfg_.workers > 0) omp_set_num_threads(cfg_.workers);
    fs::create_directories(workdir_);
}

std::string Pipeline::stage_dir(const std::string& stage) const {
    return workdir_ + "/" + stage;
}

std::string Pipeline::resolve_input(const std::string& configured, const std::string& synth_file,
                                    const char* key) const {
    if (!configured.empty()) {
        if (!fs::exists(configured))
            throw PrereqError(std::string("configured ") + key + " not found: " + configured);
        return configured;
    }
    const std::string fallback = stage_dir("synth") + "/" + synth_file;
    if (fs::exists(fallback)) return fallback;
    throw PrereqError(std::string("no ") + key +
                      " available: set paths." + key + " or run synth first");
}

namespace {

// Runs `body` unless an identical manifest and all outputs already exist.
StageStatus run_stage(const std::string& dir, bool force, const json& manifest,
                      const std::vector<std::string>& outputs,
                      const std::function<void()>& body) {
    const std::string manifest_path = dir + "/manifest.json";
    const std::string manifest_text = manifest.dump(2) + "\n";
    if (!force && fs::exists(manifest_path)) {
        bool outputs_present = true;
        for (const auto& o : outputs) {
            if (!fs::exists(dir + "/" + o)) {
                outputs_present = false;
                break;
            }
        }
        if (outputs_present && read_text_file(manifest_path) == manifest_text)
            return {true, "up to date, skipped (use --force to rerun)"};
    }
    fs::create_directories(dir);
    body();
    write_text_file(manifest_path, manifest_text);
    return {false, "done"};
}

json base_manifest(const std::string& stage, std::uint64_t seed) {
    json m;
    m["stage"] = stage;
    m["version"] = kVersion;
    m["seed"] = seed;
    m["inputs"] = json::object();
    m["params"] = json::object();
    return m;
}

void add_input(json& manifest, const std::string& path) {
    char hex[24];
    std::snprintf(hex, sizeof(hex), "fnv64:%016llx",
                  static_cast<unsigned long long>(fnv1a_file(path)));
    manifest["inputs"][path] = hex;
}

}  // namespace

StageStatus Pipeline::synth() {
    const std::string dir = stage_dir("synth");
    SynthConfig sc = cfg_.synth;
    sc.seed = cfg_.seed;
    sc.window = cfg_.ds1;

    json manifest = base_manifest("synth", cfg_.seed);
    manifest["params"] = {{"n_communities", sc.n_communities},
                          {"positive_fraction", sc.positive_fraction},
                          {"keyword_rate_delta", sc.keyword_rate_delta},
                          {"score_mean_delta", sc.score_mean_delta},
                          {"edge_density_delta", sc.edge_density_delta},
                          {"window", window_json(sc.window)}};
    return run_stage(dir, force_, manifest,
                     {"submissions.jsonl", "comments.jsonl", "metadata.csv", "labels.csv"},
                     [&] { synth_write(sc, dir); });
}

StageStatus Pipeline::ingest() {
    const std::string dir = stage_dir("ingest");
    const std::string subs_path = resolve_input(cfg_.paths.submissions, "submissions.jsonl",
                                                "submissions");
    const std::string coms_path = resolve_input(cfg_.paths.comments, "comments.jsonl",
                                                "comments");
    const std::string meta_path = resolve_input(cfg_.paths.metadata, "metadata.csv", "metadata");

    json manifest = base_manifest("ingest", cfg_.seed);
    add_input(manifest, subs_path);
    add_input(manifest, coms_path);
    add_input(manifest, meta_path);
    manifest["params"] = {{"ds1", window_json(cfg_.ds1)}, {"ds2", window_json(cfg_.ds2)}};

    return run_stage(
        dir, force_, manifest,
        {"ds1_submissions.jsonl", "ds1_comments.jsonl", "ds2_submissions.jsonl",
         "ds2_comments.jsonl", "metadata.csv", "summary.csv"},
        [&] {
            std::string ds1_subs, ds2_subs, ds1_coms, ds2_coms;
            std::map<std::string, std::pair<long long, long long>> counts;
            LoadStats sub_stats = load_records(
                subs_path, RecordKind::Submission,
                [&](SubmissionRecord&& r) {
                    if (cfg_.ds1.contains(r.created)) {
                        ds1_subs += submission_to_json(r).dump();
                        ds1_subs += '\n';
                        ++counts[r.community].first;
                    } else if (cfg_.ds2.contains(r.created)) {
                        ds2_subs += submission_to_json(r).dump();
                        ds2_subs += '\n';
                    }
                },
                nullptr);
            LoadStats com_stats = load_records(
                coms_path, RecordKind::Comment, nullptr, [&](CommentRecord&& r) {
                    if (cfg_.ds1.contains(r.created)) {
                        ds1_coms += comment_to_json(r).dump();
                        ds1_coms += '\n';
                        ++counts[r.community].second;
                    } else if (cfg_.ds2.contains(r.created)) {
                        ds2_coms += comment_to_json(r).dump();
                        ds2_coms += '\n';
                    }
                });
            write_text_file(dir + "/ds1_submissions.jsonl", ds1_subs);
            write_text_file(dir + "/ds1_comments.jsonl", ds1_coms);
            write_text_file(dir + "/ds2_submissions.jsonl", ds2_subs);
            write_text_file(dir + "/ds2_comments.jsonl", ds2_coms);
            write_text_file(dir + "/metadata.csv", read_text_file(meta_path));
            std::string summary = "community,submissions,comments\n";
            for (const auto& [community, c] : counts) {
                summary += csv_escape(community) + "," + std::to_string(c.first) + "," +
                           std::to_string(c.second) + "\n";
            }
            write_text_file(dir + "/summary.csv", summary);
            std::cerr << "[ingest] submissions: " << sub_stats.loaded << " loaded, "
                      << sub_stats.skipped << " skipped; comments: " << com_stats.loaded
                      << " loaded, " << com_stats.skipped << " skipped\n";
        });
}

StageStatus Pipeline::label() {
    const std::string dir = stage_dir("label");
    const std::string ingest_dir = stage_dir("ingest");

    // passthrough mode: gold labels provided (or generated by synth)
    std::string labels_path;
    if (!cfg_.paths.labels.empty()) {
        if (!fs::exists(cfg_.paths.labels))
            throw PrereqError("configured labels not found: " + cfg_.paths.labels);
        labels_path = cfg_.paths.labels;
    } else if (cfg_.paths.atlas.empty() &&
               fs::exists(stage_dir("synth") + "/labels.csv")) {
        labels_path = stage_dir("synth") + "/labels.csv";
    }

    if (!labels_path.empty()) {
        json manifest = base_manifest("label", cfg_.seed);
        add_input(manifest, labels_path);
        manifest["params"] = {{"mode", "passthrough"}};
        return run_stage(dir, force_, manifest, {"labels.csv"}, [&] {
            const LabelSet labels = load_labels_csv(labels_path);
            write_text_file(dir + "/labels.csv", labels_csv(labels));
        });
    }

    // discovery mode: atlas import, optional regex bootstrap, matched negatives
    if (cfg_.paths.atlas.empty())
        throw PrereqError("no labels available: set paths.labels or paths.atlas");
    if (!fs::exists(ingest_dir + "/summary.csv"))
        throw PrereqError("label needs ingested corpora: run ingest first");

    json manifest = base_manifest("label", cfg_.seed);
    add_input(manifest, cfg_.paths.atlas);
    add_input(manifest, ingest_dir + "/summary.csv");
    if (!cfg_.paths.patterns.empty()) add_input(manifest, cfg_.paths.patterns);
    if (!cfg_.paths.seed_labels.empty()) add_input(manifest, cfg_.paths.seed_labels);
    manifest["params"] = {{"mode", "discovery"},
                          {"confidence_threshold", cfg_.labeling.confidence_threshold},
                          {"max_iterations", cfg_.labeling.max_iterations},
                          {"size_metric", cfg_.labeling.size_metric}};

    return run_stage(dir, force_, manifest, {"labels.csv"}, [&] {
        LabelSet labels = import_atlas(cfg_.paths.atlas);

        if (!cfg_.paths.patterns.empty()) {
            if (cfg_.paths.seed_labels.empty())
                throw ValidationError(
                    "bootstrapping requires paths.seed_labels with both classes");
            LabelSet seed = load_labels_csv(cfg_.paths.seed_labels);
            for (const auto& c : labels.positives())
                if (!seed.contains(c)) seed.assign(c, 1, kProvenanceAtlas);

            std::vector<std::string> patterns;
            slurp_lines_file(cfg_.paths.patterns, patterns);

            auto ds2_subs = load_submissions(ingest_dir + "/ds2_submissions.jsonl");
            auto ds2_coms = load_comments(ingest_dir + "/ds2_comments.jsonl");
            auto meta = load_metadata_csv(ingest_dir + "/metadata.csv");
            auto ds2 = build_corpora(std::move(ds2_subs), std::move(ds2_coms), meta, cfg_.ds2);

            const auto candidates = regex_candidates(ds2, patterns);

            // DS2-window features for every community the classifier touches
            std::map<std::string, CommunityFeatures> feats;
            std::map<std::string, int> keep;
            std::set<std::string> involved = candidates;
            for (const auto& [c, l] : seed.assignments()) {
                (void)l;
                involved.insert(c);
            }
            for (const auto& c : involved) {
                auto it = ds2.find(c);
                if (it == ds2.end() || !it->second.meta) continue;
                CommunityFeatures f;
                f.community = c;
                f.text = submission_token_bag(it->second,
                                              static_cast<std::size_t>(
                                                  cfg_.features.submission_cap));
                f.meta = compute_meta_features(it->second, cfg_.ds2.end);
                f.network = network_feature_vector(build_reply_graph(it->second));
                feats.emplace(c, std::move(f));
                keep[c] = 0;
            }
            std::vector<const TokenBag*> bags;
            for (const auto& [c, f] : feats) {
                (void)c;
                bags.push_back(&f.text);
            }
            const Vocabulary vocab = build_vocabulary(bags, cfg_.features.vocab_size);
            const FeatureMatrix matrix =
                assemble_matrix(feats, keep, parse_blocks("L+M+N"), &vocab);

            LabelSet usable_seed;
            std::set<std::string> usable_candidates;
            for (const auto& [c, l] : seed.assignments())
                if (feats.count(c)) usable_seed.assign(c, l, seed.provenance_of(c));
            for (const auto& c : candidates)
                if (feats.count(c)) usable_candidates.insert(c);

            BootstrapConfig bc;
            bc.patterns = patterns;
            bc.confidence_threshold = cfg_.labeling.confidence_threshold;
            bc.max_iterations = cfg_.labeling.max_iterations;
            bc.classifier = cfg_.gbt;
            const BootstrapResult boot =
                bootstrap_labels(usable_seed, usable_candidates, matrix, bc);
            for (const auto& c : boot.labels.positives())
                if (!labels.contains(c)) labels.assign(c, 1, boot.labels.provenance_of(c));
        }

        // size-matched negatives from the DS1-active pool
        std::map<std::string, double> positive_sizes, pool_sizes;
        std::map<std::string, long long> submission_counts;
        {
            std::ifstream in(ingest_dir + "/summary.csv", std::ios::binary);
            std::string line;
            std::getline(in, line);  // header
            while (std::getline(in, line)) {
                auto sv = trim(line);
                if (sv.empty()) continue;
                auto fields = split_csv_line(sv);
                submission_counts[fields[0]] = std::stoll(fields[1]);
            }
        }
        const bool by_submissions = cfg_.labeling.size_metric == "submissions";
        std::map<std::string, CommunityMeta> meta;
        if (!by_submissions) meta = load_metadata_csv(ingest_dir + "/metadata.csv");
        const auto positives = labels.positives();
        for (const auto& [community, n_subs] : submission_counts) {
            double size = static_cast<double>(n_subs);
            if (!by_submissions) {
                auto it = meta.find(community);
                if (it == meta.end()) continue;
                size = static_cast<double>(it->second.subscribers);
            }
            if (positives.count(community)) positive_sizes[community] = size;
            else pool_sizes[community] = size;
        }
        const LabelSet negatives = match_negatives(positive_sizes, pool_sizes);
        labels.merge(negatives);
        write_text_file(dir + "/labels.csv", labels_csv(labels));
    });
}

StageStatus Pipeline::featurize() {
    const std::string dir = stage_dir("featurize");
    const std::string ingest_dir = stage_dir("ingest");
    const std::string label_dir = stage_dir("label");
    if (!fs::exists(ingest_dir + "/ds1_submissions.jsonl"))
        throw PrereqError("featurize needs ingested corpora: run ingest first");
    if (!fs::exists(label_dir + "/labels.csv"))
        throw PrereqError("featurize needs labels: run label first");

    json manifest = base_manifest("featurize", cfg_.seed);
    add_input(manifest, ingest_dir + "/ds1_submissions.jsonl");
    add_input(manifest, ingest_dir + "/ds1_comments.jsonl");
    add_input(manifest, ingest_dir + "/metadata.csv");
    add_input(manifest, label_dir + "/labels.csv");
    manifest["params"] = {{"vocab_size", cfg_.features.vocab_size},
                          {"submission_cap", cfg_.features.submission_cap},
                          {"export_edges", cfg_.features.export_edges},
                          {"cutoff", cfg_.ds1.end}};

    return run_stage(dir, force_, manifest, {"features.csv", "bags.json", "dropped.csv"}, [&] {
        const LabelSet labels = load_labels_csv(label_dir + "/labels.csv");
        auto subs = load_submissions(ingest_dir + "/ds1_submissions.jsonl");
        auto coms = load_comments(ingest_dir + "/ds1_comments.jsonl");
        const auto meta = load_metadata_csv(ingest_dir + "/metadata.csv");
        const auto corpora = build_corpora(std::move(subs), std::move(coms), meta, cfg_.ds1);

        std::string dropped = "community,reason\n";
        std::vector<const CommunityCorpus*> targets;
        std::vector<int> target_labels;
        for (const auto& [community, label] : labels.assignments()) {
            auto it = corpora.find(community);
            if (it == corpora.end()) {
                dropped += csv_escape(community) + ",no in-window records\n";
                std::cerr << "[featurize] warning: dropping " << community
                          << " (no in-window records)\n";
                continue;
            }
            if (!it->second.meta) {
                dropped += csv_escape(community) + ",missing metadata\n";
                std::cerr << "[featurize] warning: dropping " << community
                          << " (missing metadata)\n";
                continue;
            }
            targets.push_back(&it->second);
            target_labels.push_back(label);
        }

        // per-community extraction is embarrassingly parallel
        std::vector<CommunityFeatures> rows(targets.size());
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(targets.size()); ++i) {
            const CommunityCorpus& corpus = *targets[i];
            CommunityFeatures f;
            f.community = corpus.community;
            f.text = submission_token_bag(
                corpus, static_cast<std::size_t>(cfg_.features.submission_cap));
            f.meta = compute_meta_features(corpus, cfg_.ds1.end);
            f.network = network_feature_vector(build_reply_graph(corpus));
            rows[i] = std::move(f);
        }

        std::map<std::string, CommunityFeatures> feats;
        std::map<std::string, int> kept_labels;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            kept_labels[rows[i].community] = target_labels[i];
            feats.emplace(rows[i].community, std::move(rows[i]));
        }

        std::vector<const TokenBag*> bags;
        for (const auto& [c, f] : feats) {
            (void)c;
            bags.push_back(&f.text);
        }
        const Vocabulary vocab = build_vocabulary(bags, cfg_.features.vocab_size);
        const FeatureMatrix matrix =
            assemble_matrix(feats, kept_labels, parse_blocks("L+M+N"), &vocab);
        write_text_file(dir + "/features.csv", feature_matrix_csv(matrix));

        json bag_doc = json::object();
        for (const auto& [c, f] : feats) {
            json b;
            b["total"] = f.text.total;
            b["counts"] = json::object();
            for (const auto& [tok, count] : f.text.counts) b["counts"][tok] = count;
            bag_doc[c] = std::move(b);
        }
        write_text_file(dir + "/bags.json", bag_doc.dump(2) + "\n");
        write_text_file(dir + "/dropped.csv", dropped);

        if (cfg_.features.export_edges) {
            fs::create_directories(dir + "/edges");
            for (const auto& [c, f] : feats) {
                (void)f;
                write_text_file(dir + "/edges/" + c + ".csv",
                                edge_list_csv(build_reply_graph(corpora.at(c))));
            }
        }
    });
}

StageStatus Pipeline::train() {
    const std::string dir = stage_dir("train");
    const std::string feat_dir = stage_dir("featurize");
    if (!fs::exists(feat_dir + "/features.csv"))
        throw PrereqError("train needs a feature matrix: run featurize first");

    json manifest = base_manifest("train", cfg_.seed);
    add_input(manifest, feat_dir + "/features.csv");
    manifest["params"] = {{"gbt",
                           {{"n_trees", cfg_.gbt.n_trees},
                            {"max_depth", cfg_.gbt.max_depth},
                            {"learning_rate", cfg_.gbt.learning_rate},
                            {"min_samples_leaf", cfg_.gbt.min_samples_leaf}}},
                          {"mlp",
                           {{"hidden", cfg_.mlp.hidden},
                            {"max_epochs", cfg_.mlp.max_epochs},
                            {"batch_size", cfg_.mlp.batch_size},
                            {"step_size", cfg_.mlp.step_size}}}};

    return run_stage(dir, force_, manifest, {"gbt.json", "mlp.json"}, [&] {
        const LoadedFeatures data = load_features_csv(feat_dir + "/features.csv");
        GbtParams gp = cfg_.gbt;
        gp.seed = cfg_.seed;
        const TreeEnsemble gbt = gbt_train(data.rows, data.labels, gp, data.column_names);
        write_text_file(dir + "/gbt.json", gbt.to_json() + "\n");
        MlpParams mp = cfg_.mlp;
        mp.seed = cfg_.seed;
        const MlpModel mlp = mlp_train(data.rows, data.labels, mp, data.column_names);
        write_text_file(dir + "/mlp.json", mlp.to_json() + "\n");
    });
}

StageStatus Pipeline::evaluate() {
    const std::string dir = stage_dir("evaluate");
    const std::string feat_dir = stage_dir("featurize");
    if (!fs::exists(feat_dir + "/features.csv") || !fs::exists(feat_dir + "/bags.json"))
        throw PrereqError("evaluate needs feature outputs: run featurize first");

    json manifest = base_manifest("evaluate", cfg_.seed);
    add_input(manifest, feat_dir + "/features.csv");
    add_input(manifest, feat_dir + "/bags.json");
    manifest["params"] = {{"folds", cfg_.eval.folds},
                          {"models", cfg_.eval.models},
                          {"blocks", cfg_.eval.blocks},
                          {"vocab_size", cfg_.features.vocab_size}};

    return run_stage(
        dir, force_, manifest, {"report.csv", "report.txt", "errors.csv", "oof.csv"}, [&] {
            const LoadedFeatures data = load_features_csv(feat_dir + "/features.csv");
            const auto bags = load_bags_json(feat_dir + "/bags.json");

            CommunityDataset ds;
            // column offsets: L is first, then M, then N
            const std::size_t m_off = kLinguisticFeatureCount;
            const std::size_t n_off = m_off + kMetaFeatureCount;
            for (std::size_t i = 0; i < data.names.size(); ++i) {
                ds.names.push_back(data.names[i]);
                ds.labels.push_back(data.labels[i]);
                auto bit = bags.find(data.names[i]);
                if (bit == bags.end())
                    throw ValidationError("bag missing for community: " + data.names[i]);
                ds.bags.push_back(bit->second);
                std::array<double, kMetaFeatureCount> meta{};
                std::array<double, kNetworkFeatureCount> net{};
                for (int k = 0; k < kMetaFeatureCount; ++k) meta[k] = data.rows[i][m_off + k];
                for (int k = 0; k < kNetworkFeatureCount; ++k) net[k] = data.rows[i][n_off + k];
                ds.meta.push_back(meta);
                ds.network.push_back(net);
            }

            AblationConfig ac;
            ac.folds = cfg_.eval.folds;
            ac.seed = cfg_.seed;
            ac.models = cfg_.eval.models;
            ac.block_subsets = cfg_.eval.blocks;
            ac.vocab_size = cfg_.features.vocab_size;
            ac.gbt = cfg_.gbt;
            ac.mlp = cfg_.mlp;
            const EvalReport report = run_ablation(ds, ac);

            write_text_file(dir + "/report.csv", report_csv(report));
            write_text_file(dir + "/report.txt", report_table(report));

            // ranked errors for the strongest reported setting
            std::string best_model = report.settings.front().model;
            std::string best_blocks = report.settings.front().blocks.name();
            double best_f1 = -1.0;
            for (const SettingResult& s : report.settings) {
                if (s.model == "gbt" && s.mean.f1 > best_f1) {
                    best_f1 = s.mean.f1;
                    best_model = s.model;
                    best_blocks = s.blocks.name();
                }
            }
            const ErrorAnalysis errors = top_errors(report, best_model, best_blocks, 10);
            write_text_file(dir + "/errors.csv", errors_csv(errors));
            write_text_file(dir + "/oof.csv", oof_csv(report, best_model, best_blocks));
        });
}

StageStatus Pipeline::explain() {
    const std::string dir = stage_dir("explain");
    const std::string feat_dir = stage_dir("featurize");
    const std::string train_dir = stage_dir("train");
    if (!fs::exists(train_dir + "/gbt.json"))
        throw PrereqError("explain needs a trained model: run train first");
    if (!fs::exists(feat_dir + "/features.csv"))
        throw PrereqError("explain needs a feature matrix: run featurize first");

    json manifest = base_manifest("explain", cfg_.seed);
    add_input(manifest, train_dir + "/gbt.json");
    add_input(manifest, feat_dir + "/features.csv");
    manifest["params"] = {{"top_k", cfg_.explain.top_k},
                          {"permutations", cfg_.explain.permutations},
                          {"community", cfg_.explain.community}};

    return run_stage(
        dir, force_, manifest, {"beeswarm.csv", "importance.csv", "waterfall.json"}, [&] {
            const TreeEnsemble model =
                TreeEnsemble::from_json(read_text_file(train_dir + "/gbt.json"));
            const LoadedFeatures data = load_features_csv(feat_dir + "/features.csv");

            const auto attributions = tree_shap_batch(model, data.rows, data.names);
            write_text_file(dir + "/beeswarm.csv",
                            beeswarm_csv(attributions, data.rows, data.column_names));

            const AggregateShap agg =
                aggregate_shap(attributions, data.rows, data.column_names,
                               cfg_.explain.permutations, cfg_.seed);
            std::string imp = "feature,mean_abs_shap,rank_correlation,p_value\n";
            for (const FeatureImportance& f : agg.ranking) {
                imp += csv_escape(f.feature) + "," + format_double(f.mean_abs_shap) + "," +
                       format_double(f.rank_correlation) + "," + format_double(f.p_value) + "\n";
            }
            write_text_file(dir + "/importance.csv", imp);

            // waterfall target: configured community, else the instance the
            // model is most confident about
            std::size_t target = 0;
            if (!cfg_.explain.community.empty()) {
                auto it = std::find(data.names.begin(), data.names.end(),
                                    cfg_.explain.community);
                if (it == data.names.end())
                    throw ValidationError("explain.community not in the feature matrix: " +
                                          cfg_.explain.community);
                target = static_cast<std::size_t>(it - data.names.begin());
            } else {
                double best = -1.0;
                for (std::size_t i = 0; i < attributions.size(); ++i) {
                    if (attributions[i].output_probability > best) {
                        best = attributions[i].output_probability;
                        target = i;
                    }
                }
            }
            const Waterfall w =
                waterfall(attributions[target], data.column_names, cfg_.explain.top_k);
            write_text_file(dir + "/waterfall.json", waterfall_json(w) + "\n");
        });
}

StageStatus Pipeline::report() {
    const std::string dir = stage_dir("report");
    const std::string eval_dir = stage_dir("evaluate");
    const std::string explain_dir = stage_dir("explain");
    if (!fs::exists(eval_dir + "/report.csv"))
        throw PrereqError("report needs evaluation outputs: run evaluate first");
    if (!fs::exists(explain_dir + "/beeswarm.csv"))
        throw PrereqError("report needs attribution outputs: run explain first");

    json manifest = base_manifest("report", cfg_.seed);
    add_input(manifest, eval_dir + "/report.csv");
    add_input(manifest, eval_dir + "/report.txt");
    add_input(manifest, eval_dir + "/errors.csv");
    add_input(manifest, explain_dir + "/beeswarm.csv");
    add_input(manifest, explain_dir + "/importance.csv");
    add_input(manifest, explain_dir + "/waterfall.json");

    return run_stage(dir, force_, manifest,
                     {"table.txt", "table.csv", "errors.csv", "beeswarm.csv", "importance.csv",
                      "waterfall.json"},
                     [&] {
                         write_text_file(dir + "/table.txt",
                                         read_text_file(eval_dir + "/report.txt"));
                         write_text_file(dir + "/table.csv",
                                         read_text_file(eval_dir + "/report.csv"));
                         write_text_file(dir + "/errors.csv",
                                         read_text_file(eval_dir + "/errors.csv"));
                         write_text_file(dir + "/beeswarm.csv",
                                         read_text_file(explain_dir + "/beeswarm.csv"));
                         write_text_file(dir + "/importance.csv",
                                         read_text_file(explain_dir + "/importance.csv"));
                         write_text_file(dir + "/waterfall.json",
                                         read_text_file(explain_dir + "/waterfall.json"));
                     });
}

std::vector<std::pair<std::string, StageStatus>> Pipeline::run_all() {
    std::vector<std::pair<std::string, StageStatus>> out;
    if (cfg_.paths.submissions.empty()) out.emplace_back("synth", synth());
    out.emplace_back("ingest", ingest());
    out.emplace_back("label", label());
    out.emplace_back("featurize", featurize());
    out.emplace_back("train", train());
    out.emplace_back("evaluate", evaluate());
    out.emplace_back("explain", explain());
    out.emplace_back("report", report());
    return out;
}

}  // namespace cep
