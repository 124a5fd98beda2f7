#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cep/errors.hpp"
#include "cep/io_util.hpp"
#include "cep/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitPrereq = 3;
constexpr int kExitRuntime = 4;

struct GlobalOptions {
    std::string config_path;
    std::string workdir = "work";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = -1;
    bool force = false;
};

cep::PipelineConfig load_config(const GlobalOptions& opts) {
    cep::PipelineConfig cfg;
    if (!opts.config_path.empty())
        cfg = cep::PipelineConfig::from_json_text(cep::read_text_file(opts.config_path));
    if (opts.seed_set) cfg.seed = opts.seed;
    if (opts.workers >= 0) cfg.workers = opts.workers;
    return cfg;
}

void print_status(const std::string& stage, const cep::StageStatus& status) {
    std::cout << "[" << stage << "] " << status.message << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Community engagement prediction pipeline"};
    app.require_subcommand(1);

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "Pipeline config (JSON)")
        ->envname("CEP_CONFIG");
    app.add_option("--workdir", opts.workdir, "Stage output directory")->envname("CEP_WORKDIR");
    auto* seed_opt =
        app.add_option("--seed", opts.seed, "Override the config seed")->envname("CEP_SEED");
    app.add_option("--workers", opts.workers, "OpenMP worker count (0 = default)")
        ->envname("CEP_WORKERS");
    app.add_flag("--force", opts.force, "Rerun stages even when manifests match")
        ->envname("CEP_FORCE");

    bool print_defaults = false;
    auto* cmd_config = app.add_subcommand("config", "Inspect configuration");
    cmd_config->add_flag("--print-defaults", print_defaults, "Dump the default config JSON");

    auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    auto* cmd_ingest = app.add_subcommand("ingest", "Window-filter raw dumps into corpora");
    auto* cmd_label = app.add_subcommand("label", "Construct the labeled community set");
    auto* cmd_featurize = app.add_subcommand("featurize", "Extract L/M/N feature blocks");
    auto* cmd_train = app.add_subcommand("train", "Train final models on the full matrix");
    auto* cmd_evaluate = app.add_subcommand("evaluate", "Cross-validated ablation report");
    auto* cmd_explain = app.add_subcommand("explain", "Shapley attribution exports");
    auto* cmd_report = app.add_subcommand("report", "Assemble the final report artifacts");
    auto* cmd_all = app.add_subcommand("run-all", "Run every stage in order");

    // global flags are accepted after the subcommand too: `cep synth --seed 7`
    for (CLI::App* cmd : {cmd_config, cmd_synth, cmd_ingest, cmd_label, cmd_featurize,
                          cmd_train, cmd_evaluate, cmd_explain, cmd_report, cmd_all})
        cmd->fallthrough();

    std::string waterfall_community;
    cmd_explain->add_option("--community", waterfall_community,
                            "Waterfall target community (default: most confident row)");

    CLI11_PARSE(app, argc, argv);
    opts.seed_set = seed_opt->count() > 0;

    try {
        if (cmd_config->parsed()) {
            if (print_defaults) {
                std::cout << cep::PipelineConfig::defaults().to_json_text();
            } else if (!opts.config_path.empty()) {
                cep::PipelineConfig cfg = load_config(opts);
                std::cout << cfg.to_json_text();
            } else {
                std::cout << "config: pass --print-defaults or --config <file>\n";
            }
            return kExitOk;
        }

        cep::PipelineConfig cfg = load_config(opts);
        if (!waterfall_community.empty()) cfg.explain.community = waterfall_community;
        cep::Pipeline pipeline(cfg, opts.workdir, opts.force);

        if (cmd_synth->parsed()) print_status("synth", pipeline.synth());
        else if (cmd_ingest->parsed()) print_status("ingest", pipeline.ingest());
        else if (cmd_label->parsed()) print_status("label", pipeline.label());
        else if (cmd_featurize->parsed()) print_status("featurize", pipeline.featurize());
        else if (cmd_train->parsed()) print_status("train", pipeline.train());
        else if (cmd_evaluate->parsed()) print_status("evaluate", pipeline.evaluate());
        else if (cmd_explain->parsed()) print_status("explain", pipeline.explain());
        else if (cmd_report->parsed()) print_status("report", pipeline.report());
        else if (cmd_all->parsed()) {
            for (const auto& [stage, status] : pipeline.run_all()) print_status(stage, status);
        }
        return kExitOk;
    } catch (const cep::PrereqError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrereq;
    } catch (const cep::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const cep::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const cep::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
