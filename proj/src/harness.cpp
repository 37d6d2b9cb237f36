#include "rcsim/harness.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "rcsim/stats.hpp"
#include "rcsim/synthworld.hpp"

namespace rcsim {

namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
    synth.validate();
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
    if (eval_k_values.empty()) throw ConfigError("eval_k_values must be nonempty");
    for (int k : eval_k_values)
        if (k < 1) throw ConfigError("eval_k_values must be positive");
}

void to_json(nlohmann::json& j, const SweepConfig& c) {
    j = nlohmann::json{{"pi", c.pi}, {"k_prime", c.k_prime}, {"alpha", c.alpha}, {"kernel", c.kernel}};
}

void from_json(const nlohmann::json& j, SweepConfig& c) {
    if (j.contains("pi")) j.at("pi").get_to(c.pi);
    if (j.contains("k_prime")) j.at("k_prime").get_to(c.k_prime);
    if (j.contains("alpha")) j.at("alpha").get_to(c.alpha);
    if (j.contains("kernel")) j.at("kernel").get_to(c.kernel);
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = nlohmann::json{{"synth", c.synth},
                       {"queryset", c.queryset},
                       {"train", c.train},
                       {"eval_k_values", c.eval_k_values},
                       {"sweeps", c.sweeps},
                       {"repeats", c.repeats},
                       {"output_dir", c.output_dir},
                       {"sce_oe_delta", c.sce_oe_delta}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    if (j.contains("synth")) j.at("synth").get_to(c.synth);
    if (j.contains("queryset")) j.at("queryset").get_to(c.queryset);
    if (j.contains("train")) j.at("train").get_to(c.train);
    if (j.contains("eval_k_values")) j.at("eval_k_values").get_to(c.eval_k_values);
    if (j.contains("sweeps")) j.at("sweeps").get_to(c.sweeps);
    if (j.contains("repeats")) j.at("repeats").get_to(c.repeats);
    if (j.contains("output_dir")) j.at("output_dir").get_to(c.output_dir);
    if (j.contains("sce_oe_delta")) j.at("sce_oe_delta").get_to(c.sce_oe_delta);
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    try {
        return j.get<ExperimentConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
}

void apply_override(nlohmann::json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got: " + assignment);
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    nlohmann::json value;
    try {
        value = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception&) {
        value = raw;  // plain string
    }

    nlohmann::json* node = &config;
    std::stringstream parts(key);
    std::string part;
    std::vector<std::string> path;
    while (std::getline(parts, part, '.')) {
        if (part.empty()) throw ConfigError("--set key has an empty path segment: " + key);
        path.push_back(part);
    }
    if (path.empty()) throw ConfigError("--set key is empty");
    for (std::size_t i = 0; i + 1 < path.size(); ++i) node = &(*node)[path[i]];
    (*node)[path.back()] = value;
}

std::string config_hash(const ExperimentConfig& cfg) { return stable_hash(nlohmann::json(cfg)); }

SynthConfig test_split_config(const SynthConfig& synth) {
    SynthConfig test = synth;
    test.sample_seed = Rng::derive(synth.sample_seed != 0 ? synth.sample_seed : synth.seed, "test_split");
    return test;
}

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory: " + dir);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

void write_metrics_csv(const MetricsReport& report, const std::string& path) {
    auto out = open_out(path);
    out << "k,recall,mean_recall,mr,background_included,n_scenes\n";
    for (const auto& [k, r] : report.recall_at) {
        out << k << ',' << fmt_double(r) << ',' << fmt_double(report.mean_recall_at.at(k)) << ','
            << fmt_double(report.mr_at.at(k)) << ',' << (report.background_included ? 1 : 0) << ','
            << report.n_scenes << "\n";
    }
}

void write_histogram_csv(const std::vector<std::int64_t>& counts, const std::string& path) {
    auto out = open_out(path);
    out << "label,count\n";
    for (std::size_t k = 0; k < counts.size(); ++k) out << k << ',' << counts[k] << "\n";
}

void write_cooccurrence_csv(const std::vector<std::vector<std::int64_t>>& matrix, const std::string& path) {
    auto out = open_out(path);
    out << "class";
    for (std::size_t k = 0; k < matrix.size(); ++k) out << ",c" << k;
    out << "\n";
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        out << i;
        for (std::size_t jj = 0; jj < matrix[i].size(); ++jj) out << ',' << matrix[i][jj];
        out << "\n";
    }
}

void write_plan_log(const TrainHistory& history, const std::string& path) {
    auto out = open_out(path);
    for (const auto& entry : history.plans) {
        nlohmann::json j(entry.plan);
        j["t"] = entry.epoch;
        j["b"] = entry.batch;
        out << j.dump() << "\n";
    }
}

void cmd_generate(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);
    const Dataset ds = generate_world(cfg.synth);
    save_dataset(ds, out_dir + "/dataset.jsonl", out_dir + "/synth_config.json");
    write_histogram_csv(relation_histogram(ds), out_dir + "/histogram.csv");
    write_cooccurrence_csv(cooccurrence_matrix(ds), out_dir + "/cooccurrence.csv");
}

CellResult run_cell(const ExperimentConfig& cfg, std::uint64_t seed_offset) {
    ExperimentConfig cell = cfg;
    cell.synth.seed += seed_offset;
    cell.train.seed += seed_offset;
    cell.train.queryset = cell.queryset;

    CellResult result;
    const Dataset train_ds = generate_world(cell.synth);
    const Dataset test_ds = generate_world(test_split_config(cell.synth));
    result.train = train(train_ds, cell.train);
    result.masked = evaluate(result.train.model, test_ds, cell.eval_k_values, false);
    result.background = evaluate(result.train.model, test_ds, cell.eval_k_values, true);
    return result;
}

RunRecord cmd_train(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);
    const auto start = std::chrono::steady_clock::now();

    ExperimentConfig run_cfg = cfg;
    run_cfg.train.queryset = cfg.queryset;
    const Dataset train_ds = generate_world(run_cfg.synth);
    const Dataset test_ds = generate_world(test_split_config(run_cfg.synth));
    TrainResult tr = train(train_ds, run_cfg.train);

    RunRecord rec;
    rec.config_hash = config_hash(cfg);
    rec.seed = cfg.train.seed;

    const bool emit_masked = !cfg.train.mask_background_in_eval || *cfg.train.mask_background_in_eval;
    const bool emit_bg = !cfg.train.mask_background_in_eval || !*cfg.train.mask_background_in_eval;
    nlohmann::json metrics_json = nlohmann::json::object();
    if (emit_masked) {
        rec.metrics_masked = evaluate(tr.model, test_ds, cfg.eval_k_values, false);
        write_metrics_csv(rec.metrics_masked, out_dir + "/metrics_masked.csv");
        metrics_json["masked"] = rec.metrics_masked;
    }
    if (emit_bg) {
        rec.metrics_background = evaluate(tr.model, test_ds, cfg.eval_k_values, true);
        write_metrics_csv(*rec.metrics_background, out_dir + "/metrics_background.csv");
        metrics_json["background"] = *rec.metrics_background;
    }

    // diagnostics: correlation model checks plus gradient alignment of the
    // final model's first batch against the training set
    Rng diag_rng = Rng::stream(cfg.train.seed, "diagnostics");
    rec.diagnostics.rho_analytic = [&]() {
        try {
            return analytic_rho(cfg.synth.confounder);
        } catch (const DataError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    }();
    if (std::isfinite(rec.diagnostics.rho_analytic)) {
        rec.diagnostics.rho_empirical = empirical_rho(cfg.synth.confounder, 100000, diag_rng);
    } else {
        rec.diagnostics.rho_empirical = std::numeric_limits<double>::quiet_NaN();
    }
    std::vector<RelationshipInstance> all;
    for (const auto& s : train_ds.scenes)
        for (const auto& inst : s.instances) all.push_back(inst);
    const std::size_t head = std::min<std::size_t>(all.size(), static_cast<std::size_t>(cfg.train.batch_size));
    const std::vector<RelationshipInstance> first_batch(all.begin(), all.begin() + head);
    rec.diagnostics.grad_cosine = gradient_alignment(tr.model, first_batch, all);

    save_checkpoint(tr.model, out_dir + "/checkpoint.json", rec.config_hash);
    rec.plan_log_path = out_dir + "/plan_log.jsonl";
    write_plan_log(tr.history, rec.plan_log_path);

    // hash over the deterministic outputs only (no wall time)
    nlohmann::json result_material{{"config_hash", rec.config_hash},
                                   {"seed", rec.seed},
                                   {"metrics", metrics_json},
                                   {"step_count", tr.model.step_count},
                                   {"weights", tr.model.weights},
                                   {"bias", tr.model.bias}};
    nlohmann::json plans = nlohmann::json::array();
    for (const auto& p : tr.history.plans) plans.push_back(nlohmann::json(p.plan));
    result_material["plans"] = plans;
    rec.result_hash = stable_hash(result_material);

    rec.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    nlohmann::json record{{"config_hash", rec.config_hash},
                          {"seed", rec.seed},
                          {"metrics", metrics_json},
                          {"diagnostics", rec.diagnostics},
                          {"plan_log", rec.plan_log_path},
                          {"result_hash", rec.result_hash},
                          {"wall_time_sec", rec.wall_time_sec}};
    open_out(out_dir + "/run_record.json") << record.dump(2) << "\n";
    return rec;
}

void cmd_eval(const ExperimentConfig& cfg, const std::string& checkpoint_path, const std::string& data_jsonl,
              const std::string& sidecar, const std::string& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);
    const SoftmaxModel model = load_checkpoint(checkpoint_path);
    Dataset ds;
    if (!data_jsonl.empty()) {
        ds = load_dataset(data_jsonl, sidecar.empty() ? data_jsonl + ".config.json" : sidecar);
    } else {
        ds = generate_world(test_split_config(cfg.synth));
    }
    const bool emit_masked = !cfg.train.mask_background_in_eval || *cfg.train.mask_background_in_eval;
    const bool emit_bg = !cfg.train.mask_background_in_eval || !*cfg.train.mask_background_in_eval;
    if (emit_masked) write_metrics_csv(evaluate(model, ds, cfg.eval_k_values, false), out_dir + "/metrics_masked.csv");
    if (emit_bg) write_metrics_csv(evaluate(model, ds, cfg.eval_k_values, true), out_dir + "/metrics_background.csv");
}

namespace {

struct SweepStats {
    std::vector<double> recall;
    std::vector<double> mean_recall;
};

void write_sweep_header(std::ofstream& out, const std::string& param, const std::vector<int>& k_values) {
    out << param << ",fixed,repeats";
    for (int k : k_values) out << ",R@" << k << "_mean,R@" << k << "_std,mR@" << k << "_mean,mR@" << k << "_std";
    out << "\n";
}

void write_sweep_row(std::ofstream& out, const std::string& value, const std::string& fixed, int repeats,
                     const std::vector<int>& k_values, const std::map<int, SweepStats>& stats) {
    out << value << ',' << fixed << ',' << repeats;
    for (int k : k_values) {
        const auto& s = stats.at(k);
        out << ',' << fmt_double(mean_of(s.recall)) << ',' << fmt_double(stddev_of(s.recall)) << ','
            << fmt_double(mean_of(s.mean_recall)) << ',' << fmt_double(stddev_of(s.mean_recall));
    }
    out << "\n";
}

std::map<int, SweepStats> run_sweep_cell(const ExperimentConfig& cell) {
    std::map<int, SweepStats> stats;
    for (int r = 0; r < cell.repeats; ++r) {
        const CellResult res = run_cell(cell, static_cast<std::uint64_t>(r));
        for (int k : cell.eval_k_values) {
            stats[k].recall.push_back(res.masked.recall_at.at(k));
            stats[k].mean_recall.push_back(res.masked.mean_recall_at.at(k));
        }
    }
    return stats;
}

}  // namespace

void cmd_ablate(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    if (cfg.sweeps.empty()) throw ConfigError("ablate requires a nonempty sweeps section");
    ensure_dir(out_dir);

    // one-by-one sweeps in the fixed order: pi, k_prime, alpha, kernel
    if (!cfg.sweeps.pi.empty()) {
        auto out = open_out(out_dir + "/ablate_pi.csv");
        write_sweep_header(out, "pi", cfg.eval_k_values);
        for (double v : cfg.sweeps.pi) {
            ExperimentConfig cell = cfg;
            cell.train.are.pi = v;
            std::ostringstream fixed;
            fixed << "alpha=" << cfg.train.are.alpha << ";kernel=" << kernel_tag(cfg.train.are.kernel)
                  << ";sampler=" << sampler_tag(cfg.train.sampler);
            write_sweep_row(out, fmt_double(v), fixed.str(), cfg.repeats, cfg.eval_k_values, run_sweep_cell(cell));
        }
    }
    if (!cfg.sweeps.k_prime.empty()) {
        auto out = open_out(out_dir + "/ablate_k_prime.csv");
        write_sweep_header(out, "k_prime", cfg.eval_k_values);
        for (int v : cfg.sweeps.k_prime) {
            ExperimentConfig cell = cfg;
            cell.queryset.selection_mode = QuerySetConfig::SelectionMode::ExplicitK;
            cell.queryset.k_prime = v;
            std::ostringstream fixed;
            fixed << "pi=" << fmt_double(cfg.train.are.pi) << ";alpha=" << cfg.train.are.alpha
                  << ";kernel=" << kernel_tag(cfg.train.are.kernel);
            write_sweep_row(out, std::to_string(v), fixed.str(), cfg.repeats, cfg.eval_k_values, run_sweep_cell(cell));
        }
    }
    if (!cfg.sweeps.alpha.empty()) {
        auto out = open_out(out_dir + "/ablate_alpha.csv");
        write_sweep_header(out, "alpha", cfg.eval_k_values);
        for (double v : cfg.sweeps.alpha) {
            ExperimentConfig cell = cfg;
            cell.train.are.alpha = v;
            std::ostringstream fixed;
            fixed << "pi=" << fmt_double(cfg.train.are.pi) << ";kernel=" << kernel_tag(cfg.train.are.kernel);
            write_sweep_row(out, fmt_double(v), fixed.str(), cfg.repeats, cfg.eval_k_values, run_sweep_cell(cell));
        }
    }
    if (!cfg.sweeps.kernel.empty()) {
        auto out = open_out(out_dir + "/ablate_kernel.csv");
        write_sweep_header(out, "kernel", cfg.eval_k_values);
        for (const auto& tag : cfg.sweeps.kernel) {
            ExperimentConfig cell = cfg;
            cell.train.are.kernel = parse_kernel(tag);
            std::ostringstream fixed;
            fixed << "pi=" << fmt_double(cfg.train.are.pi) << ";alpha=" << cfg.train.are.alpha;
            write_sweep_row(out, tag, fixed.str(), cfg.repeats, cfg.eval_k_values, run_sweep_cell(cell));
        }
    }
}

void to_json(nlohmann::json& j, const Verdict& v) {
    j = nlohmann::json{{"check", v.check}, {"pass", v.pass},       {"statistic", v.statistic},
                       {"threshold", v.threshold}, {"n", v.n},     {"detail", v.detail}};
}

Verdict cmd_verify(const ExperimentConfig& cfg, const std::string& check, const std::string& out_dir) {
    const Verdict v = run_verify_check(cfg, check);
    ensure_dir(out_dir);
    open_out(out_dir + "/verify_" + check + ".json") << nlohmann::json(v).dump(2) << "\n";
    return v;
}

}  // namespace rcsim
