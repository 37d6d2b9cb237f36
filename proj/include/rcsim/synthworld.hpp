#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rcsim/types.hpp"

namespace rcsim {

// Zipf marginal over the foreground relation classes: p_k proportional to
// (k+1)^(-zipf_exponent), so frequencies are nonincreasing in class index.
std::vector<double> class_priors(const SynthConfig& cfg);

// Class means and the unit direction carrying the scene confounder; both are
// pure functions of cfg.seed (not sample_seed).
std::vector<std::vector<double>> class_means(const SynthConfig& cfg);
std::vector<double> confounder_direction(const SynthConfig& cfg);

// Analytic argmax-posterior predictor for the generative model: Gaussian
// class conditionals with shared covariance noise^2*I + a1^2*var_z*u*u^T.
// Usable standalone so tests can pin exact means and priors.
class GaussianBayes {
public:
    GaussianBayes(std::vector<std::vector<double>> means, std::vector<double> priors,
                  double noise_std, std::vector<double> confounder_dir, double confounder_var);

    static GaussianBayes from_config(const SynthConfig& cfg, bool balanced_priors);

    // Argmax of prior-weighted class-conditional density; ties break toward
    // the lower class index.
    int predict(const std::vector<double>& feature) const;

    // Log of prior-weighted density up to a shared additive constant.
    double score(const std::vector<double>& feature, int cls) const;

    int num_classes() const { return static_cast<int>(means_.size()); }

private:
    std::vector<std::vector<double>> means_;
    std::vector<double> log_priors_;
    std::vector<double> dir_;
    double inv_var_;       // 1 / noise^2
    double rank_one_coef_; // Sherman-Morrison coefficient for the confounder direction
};

Dataset generate_world(const SynthConfig& cfg);

int bayes_optimal_predict(const SynthConfig& cfg, const std::vector<double>& feature,
                          bool balanced_priors = false);

// Per-class instance counts, index K = background.
std::vector<std::int64_t> relation_histogram(const Dataset& ds);

// K x K symmetric matrix: off-diagonal entries count scenes containing both
// classes, the diagonal counts scenes containing a class at least twice.
std::vector<std::vector<std::int64_t>> cooccurrence_matrix(const Dataset& ds);

// One JSONL record per instance plus a config sidecar; doubles round-trip
// exactly.
void save_dataset(const Dataset& ds, const std::string& jsonl_path, const std::string& sidecar_path);
Dataset load_dataset(const std::string& jsonl_path, const std::string& sidecar_path);

}  // namespace rcsim
