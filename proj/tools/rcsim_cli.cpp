// Command-line front end: generate | train | eval | ablate | verify.
// Exit codes: 0 ok, 1 config error, 2 data error, 3 verification failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rcsim/harness.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config file (JSON)");
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config output_dir)");
    cmd->add_option("--seed", opts.seed, "root seed (overrides synth and train seeds)")
        ->each([&opts](const std::string&) { opts.seed_given = true; });
    cmd->add_option("--set", opts.overrides, "config override, dotted.key=value (repeatable)");
}

rcsim::ExperimentConfig resolve_config(const CommonOpts& opts) {
    nlohmann::json j = nlohmann::json::object();
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) throw rcsim::ConfigError("cannot open config file: " + opts.config_path);
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw rcsim::ConfigError(std::string("config parse error: ") + e.what());
        }
    }
    for (const auto& assignment : opts.overrides) rcsim::apply_override(j, assignment);
    rcsim::ExperimentConfig cfg;
    try {
        cfg = j.get<rcsim::ExperimentConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw rcsim::ConfigError(std::string("config field error: ") + e.what());
    }
    if (opts.seed_given) {
        cfg.synth.seed = opts.seed;
        cfg.train.seed = opts.seed;
    }
    if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic scene-graph relationship world: generation, batch-recomposition training, evaluation"};
    app.require_subcommand(1);

    CommonOpts gen_opts, train_opts, eval_opts, ablate_opts, verify_opts;

    auto* gen = app.add_subcommand("generate", "generate a dataset and its summaries");
    add_common(gen, gen_opts);

    auto* tr = app.add_subcommand("train", "train a classifier and evaluate it");
    add_common(tr, train_opts);

    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
    add_common(ev, eval_opts);
    std::string checkpoint, data_jsonl, sidecar;
    ev->add_option("--checkpoint", checkpoint, "model checkpoint JSON")->required();
    ev->add_option("--data", data_jsonl, "dataset JSONL (default: regenerate the held-out split)");
    ev->add_option("--sidecar", sidecar, "dataset config sidecar JSON");

    auto* ab = app.add_subcommand("ablate", "run the configured parameter sweeps");
    add_common(ab, ablate_opts);

    auto* vf = app.add_subcommand("verify", "run a property/theorem verification experiment");
    add_common(vf, verify_opts);
    std::string check;
    vf->add_option("--check", check, "one of: theorem1 theorem2 theorem3 assumption1 assumption2 rho sce_oe grad_align fore_back")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            const auto cfg = resolve_config(gen_opts);
            rcsim::cmd_generate(cfg, cfg.output_dir);
            std::cout << "dataset written to " << cfg.output_dir << "\n";
        } else if (tr->parsed()) {
            const auto cfg = resolve_config(train_opts);
            const auto rec = rcsim::cmd_train(cfg, cfg.output_dir);
            std::cout << "run " << rec.config_hash << " seed " << rec.seed << " result " << rec.result_hash
                      << " (" << rec.wall_time_sec << "s)\n";
        } else if (ev->parsed()) {
            const auto cfg = resolve_config(eval_opts);
            rcsim::cmd_eval(cfg, checkpoint, data_jsonl, sidecar, cfg.output_dir);
            std::cout << "metrics written to " << cfg.output_dir << "\n";
        } else if (ab->parsed()) {
            const auto cfg = resolve_config(ablate_opts);
            rcsim::cmd_ablate(cfg, cfg.output_dir);
            std::cout << "sweep tables written to " << cfg.output_dir << "\n";
        } else if (vf->parsed()) {
            const auto cfg = resolve_config(verify_opts);
            const auto verdict = rcsim::cmd_verify(cfg, check, cfg.output_dir);
            std::cout << (verdict.pass ? "PASS" : "FAIL") << " " << verdict.check << ": " << verdict.detail
                      << "\n";
            if (!verdict.pass) return 3;
        }
    } catch (const rcsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const rcsim::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
