#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "rcsim/queryset.hpp"
#include "rcsim/rng.hpp"
#include "rcsim/types.hpp"

namespace rcsim {

struct AreConfig {
    double alpha = 0.2;
    double lambda = 0.01;
    double pi = 3.0;  // background:foreground target ratio; +inf disables background removal
    SamplingKernel kernel = SamplingKernel::Mis;
    std::optional<double> loss_init;  // unset: ln(model class count)

    void validate() const {
        if (alpha < 0) throw ConfigError("alpha must be nonnegative");
        if (lambda < 0) throw ConfigError("lambda must be nonnegative");
        if (pi < 0) throw ConfigError("pi must be nonnegative");
    }
};

// Last observed per-batch mean loss for each query-set class.
class ClassLossTracker {
public:
    ClassLossTracker(const std::vector<int>& classes, double loss_init);

    // batch_eval holds (class, per-instance loss) pairs; classes outside the
    // query set are ignored, absent classes keep their previous value.
    void update(const std::vector<std::pair<int, double>>& batch_eval);

    const std::map<int, double>& losses() const { return losses_; }
    bool observed(int cls) const;

private:
    std::map<int, double> losses_;
    std::map<int, bool> observed_;
};

struct SamplingPlan {
    std::map<int, double> losses;               // tracker snapshot the plan was computed from
    std::map<int, double> probs;                // query distribution
    std::map<int, std::int64_t> add_counts;     // per-class instances to draw
    std::int64_t bg_budget = 0;
    std::int64_t fg_in_batch = 0;
};

// Softmax over negated scaled losses, max-shift stabilized; sums to 1 within
// 1e-12 and is nonincreasing in each class loss.
std::map<int, double> query_distribution(const ClassLossTracker& tracker, double alpha);

// Per-class draw counts: round-half-up of lambda * P_k * |Q_k|.
std::map<int, std::int64_t> sampling_sizes(const std::map<int, double>& probs, double lambda,
                                           const std::map<int, std::size_t>& pool_sizes);

// round(pi * (sum of add counts + foreground already in the batch));
// an infinite pi yields the no-removal sentinel.
std::int64_t background_budget(const std::map<int, std::int64_t>& add_counts, std::int64_t fg_count, double pi);

// Uniform subset of size min(|bg|, budget), original order preserved.
std::vector<RelationshipInstance> retain_background(const std::vector<RelationshipInstance>& bg_instances,
                                                    std::int64_t budget, Rng& rng);

SamplingPlan make_plan(const ClassLossTracker& tracker, const AreConfig& cfg, const QuerySet& qs,
                       std::int64_t fg_in_batch);

enum class Provenance { Original, Added, RetainedBackground };

struct AssembledBatch {
    std::vector<RelationshipInstance> instances;
    std::vector<Provenance> provenance;  // parallel to instances
};

// Base batch with background past the budget dropped and per-plan draws
// appended; original foreground is never dropped.
AssembledBatch assemble_batch(const std::vector<RelationshipInstance>& base_batch, const SamplingPlan& plan,
                              QuerySet& qs, SamplingKernel kernel, int background_label, Rng& rng,
                              const SoftmaxModel* model = nullptr);

}  // namespace rcsim
