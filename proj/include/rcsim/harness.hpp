#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rcsim/metrics.hpp"
#include "rcsim/serialization.hpp"
#include "rcsim/trainer.hpp"
#include "rcsim/types.hpp"

namespace rcsim {

struct SweepConfig {
    std::vector<double> pi;
    std::vector<int> k_prime;
    std::vector<double> alpha;
    std::vector<std::string> kernel;

    bool empty() const { return pi.empty() && k_prime.empty() && alpha.empty() && kernel.empty(); }
};

struct ExperimentConfig {
    SynthConfig synth;
    QuerySetConfig queryset;
    TrainConfig train;
    std::vector<int> eval_k_values{20, 50, 100};
    SweepConfig sweeps;
    int repeats = 1;
    std::string output_dir = "out";
    double sce_oe_delta = 0.1;  // membership threshold for |SCE - OE|

    void validate() const;
};

void to_json(nlohmann::json& j, const SweepConfig& c);
void from_json(const nlohmann::json& j, SweepConfig& c);
void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

ExperimentConfig load_experiment_config(const std::string& path);

// Applies one "dotted.key=value" override; the value is parsed as JSON when
// possible, else taken as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

std::string config_hash(const ExperimentConfig& cfg);

struct RunRecord {
    std::string config_hash;
    std::uint64_t seed = 0;
    MetricsReport metrics_masked;
    std::optional<MetricsReport> metrics_background;
    DiagnosticsReport diagnostics;
    std::string plan_log_path;
    std::string result_hash;  // hash of the deterministic outputs, for replay checks
    double wall_time_sec = 0.0;
};

// Held-out sample from the same generative law: identical class means and
// confounder direction, fresh instance-level draws.
SynthConfig test_split_config(const SynthConfig& synth);

void cmd_generate(const ExperimentConfig& cfg, const std::string& out_dir);
RunRecord cmd_train(const ExperimentConfig& cfg, const std::string& out_dir);
void cmd_eval(const ExperimentConfig& cfg, const std::string& checkpoint_path, const std::string& data_jsonl,
              const std::string& sidecar, const std::string& out_dir);
void cmd_ablate(const ExperimentConfig& cfg, const std::string& out_dir);

struct Verdict {
    std::string check;
    bool pass = false;
    double statistic = 0.0;
    double threshold = 0.0;
    std::int64_t n = 0;
    std::string detail;
};

void to_json(nlohmann::json& j, const Verdict& v);

const std::vector<std::string>& verify_check_names();
Verdict run_verify_check(const ExperimentConfig& cfg, const std::string& check);

// The long-tailed co-occurring benchmark world shared by the headline
// direction experiments (recall trade-off, background collapse, kernels).
ExperimentConfig headline_experiment(std::uint64_t seed, Sampler sampler, SamplingKernel kernel);
Verdict cmd_verify(const ExperimentConfig& cfg, const std::string& check, const std::string& out_dir);

// CSV writers with pinned headers and '.' decimal separator.
void write_metrics_csv(const MetricsReport& report, const std::string& path);
void write_histogram_csv(const std::vector<std::int64_t>& counts, const std::string& path);
void write_cooccurrence_csv(const std::vector<std::vector<std::int64_t>>& matrix, const std::string& path);
void write_plan_log(const TrainHistory& history, const std::string& path);

// Training+evaluation for one (config, seed) cell; shared by train/ablate/verify.
struct CellResult {
    TrainResult train;
    MetricsReport masked;
    MetricsReport background;
};
CellResult run_cell(const ExperimentConfig& cfg, std::uint64_t seed_offset);

}  // namespace rcsim
