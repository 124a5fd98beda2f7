#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cep/eval.hpp"
#include "cep/gbt.hpp"
#include "cep/mlp.hpp"
#include "cep/synth.hpp"

namespace cep {

// A stage was invoked before its upstream outputs exist; maps to exit
// code 3 with a message naming the command to run first.
struct PrereqError : std::runtime_error {
    explicit PrereqError(const std::string& msg) : std::runtime_error(msg) {}
};

struct PipelineConfig {
    struct Paths {
        std::string submissions;  // raw dumps; default to the synth stage outputs
        std::string comments;
        std::string metadata;
        std::string atlas;        // positive community names
        std::string patterns;     // regex list, one per line
        std::string seed_labels;  // manual seed for bootstrapping
        std::string labels;       // full gold labels (passthrough mode)
    } paths;

    TimeWindow ds1{1475280000, 1490918400};
    TimeWindow ds2{1490918400, 1491177600};

    struct Labeling {
        double confidence_threshold = 0.95;
        int max_iterations = 3;
        std::string size_metric = "submissions";  // or "subscribers"
    } labeling;

    struct Features {
        int vocab_size = kLinguisticFeatureCount;
        int submission_cap = 10000;
        bool export_edges = false;
    } features;

    GbtParams gbt;
    MlpParams mlp;

    struct Eval {
        int folds = 5;
        std::vector<std::string> models = {"gbt", "mlp"};
        std::vector<std::string> blocks = {"L", "M", "N", "M+N", "L+M", "L+M+N"};
    } eval;

    struct Explain {
        int top_k = 10;
        int permutations = 1000;
        std::string community;  // waterfall target; highest-probability row if empty
    } explain;

    SynthConfig synth;

    std::uint64_t seed = 42;
    int workers = 0;  // 0 = library default

    static PipelineConfig defaults() { return {}; }
    static PipelineConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
    void validate() const;  // throws ConfigError naming the offending key
};

struct StageStatus {
    bool skipped = false;  // true when the manifest matched and nothing ran
    std::string message;
};

class Pipeline {
public:
    Pipeline(PipelineConfig config, std::string workdir, bool force = false);

    StageStatus synth();
    StageStatus ingest();
    StageStatus label();
    StageStatus featurize();
    StageStatus train();
    StageStatus evaluate();
    StageStatus explain();
    StageStatus report();

    // Runs every stage in order (synth only when no external dumps are
    // configured).
    std::vector<std::pair<std::string, StageStatus>> run_all();

    const PipelineConfig& config() const { return cfg_; }
    std::string stage_dir(const std::string& stage) const;

private:
    std::string resolve_input(const std::string& configured, const std::string& synth_file,
                              const char* key) const;

    PipelineConfig cfg_;
    std::string workdir_;
    bool force_ = false;
};

}  // namespace cep
