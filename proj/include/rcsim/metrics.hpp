#pragma once

#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "rcsim/classifier.hpp"
#include "rcsim/rng.hpp"
#include "rcsim/types.hpp"

namespace rcsim {

struct MetricsReport {
    std::map<int, double> recall_at;                       // K-value -> R@K
    std::map<int, double> mean_recall_at;                  // K-value -> mR@K
    std::map<int, double> mr_at;                           // K-value -> (R@K + mR@K) / 2
    std::map<int, std::map<int, double>> per_class_recall; // K-value -> class -> recall
    bool background_included = false;
    int n_scenes = 0;
};

struct DiagnosticsReport {
    double rho_empirical = 0.0;
    double rho_analytic = 0.0;
    double sce = std::numeric_limits<double>::quiet_NaN();  // finite-support worlds only
    double oe = std::numeric_limits<double>::quiet_NaN();
    double grad_cosine = std::numeric_limits<double>::quiet_NaN();
};

// Ranked top-K recall over scenes. Every instance is scored by its best
// class confidence (background masked from the candidate set unless
// include_background), scenes rank instances by confidence, and a foreground
// instance counts as recalled iff it lands in the top K with its label
// predicted. mR averages per-class recalls over classes present in the data.
MetricsReport evaluate(const SoftmaxModel& model, const Dataset& ds, const std::vector<int>& k_values,
                       bool include_background);

// Closed-form Pearson correlation of the scalar confounder model.
double analytic_rho(const ConfounderConfig& cc);
double empirical_rho(const ConfounderConfig& cc, std::size_t n_samples, Rng& rng);

// Finite joint support of (scene context, feature, label) for the exact
// error decompositions.
struct DiscreteWorld {
    struct Atom {
        int x_id = 0;
        std::vector<double> feature;
        int label = 0;
        double prob = 0.0;
    };
    std::vector<Atom> atoms;

    void validate() const;
};

using ProbFn = std::function<std::vector<double>(const std::vector<double>&)>;

ProbFn prob_fn_from(const SoftmaxModel& model);

// Spurious-correlation error: misclassified probability mass when prediction
// is made from the (context, label)-conditional mean probability vector, so
// it captures errors introduced by scene-level aggregation.
double sce_estimate(const ProbFn& model, const DiscreteWorld& world);

// Overlapping error: misclassified probability mass under per-feature argmax.
double oe_estimate(const ProbFn& model, const DiscreteWorld& world);

// Cosine between the flattened batch gradient and full-data gradient;
// NaN when either gradient is exactly zero.
double gradient_alignment(const SoftmaxModel& model, const std::vector<RelationshipInstance>& batch,
                          const std::vector<RelationshipInstance>& full_data);

}  // namespace rcsim
