#include "rcsim/are.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace rcsim {

ClassLossTracker::ClassLossTracker(const std::vector<int>& classes, double loss_init) {
    if (!std::isfinite(loss_init)) throw ConfigError("loss_init must be finite");
    for (int k : classes) {
        losses_[k] = loss_init;
        observed_[k] = false;
    }
}

void ClassLossTracker::update(const std::vector<std::pair<int, double>>& batch_eval) {
    std::map<int, double> sums;
    std::map<int, std::int64_t> counts;
    for (const auto& [cls, loss] : batch_eval) {
        if (!std::isfinite(loss)) throw DataError("non-finite loss in batch evaluation");
        if (!losses_.count(cls)) continue;
        sums[cls] += loss;
        ++counts[cls];
    }
    for (const auto& [cls, sum] : sums) {
        losses_[cls] = sum / static_cast<double>(counts[cls]);
        observed_[cls] = true;
    }
}

bool ClassLossTracker::observed(int cls) const {
    auto it = observed_.find(cls);
    return it != observed_.end() && it->second;
}

std::map<int, double> query_distribution(const ClassLossTracker& tracker, double alpha) {
    if (alpha < 0) throw ConfigError("alpha must be nonnegative");
    const auto& losses = tracker.losses();
    std::map<int, double> probs;
    if (losses.empty()) return probs;
    double max_exponent = -std::numeric_limits<double>::infinity();
    for (const auto& [cls, loss] : losses) max_exponent = std::max(max_exponent, -alpha * loss);
    double sum = 0.0;
    for (const auto& [cls, loss] : losses) {
        const double v = std::exp(-alpha * loss - max_exponent);
        probs[cls] = v;
        sum += v;
    }
    for (auto& [cls, p] : probs) p /= sum;
    return probs;
}

std::map<int, std::int64_t> sampling_sizes(const std::map<int, double>& probs, double lambda,
                                           const std::map<int, std::size_t>& pool_sizes) {
    if (lambda < 0) throw ConfigError("lambda must be nonnegative");
    std::map<int, std::int64_t> sizes;
    for (const auto& [cls, p] : probs) {
        auto it = pool_sizes.find(cls);
        const double pool = it == pool_sizes.end() ? 0.0 : static_cast<double>(it->second);
        sizes[cls] = static_cast<std::int64_t>(std::floor(lambda * p * pool + 0.5));
    }
    return sizes;
}

std::int64_t background_budget(const std::map<int, std::int64_t>& add_counts, std::int64_t fg_count, double pi) {
    if (pi < 0) throw ConfigError("pi must be nonnegative");
    if (fg_count < 0) throw ConfigError("foreground count must be nonnegative");
    if (std::isinf(pi)) return std::numeric_limits<std::int64_t>::max();
    std::int64_t total = fg_count;
    for (const auto& [cls, n] : add_counts) {
        if (n < 0) throw ConfigError("add counts must be nonnegative");
        total += n;
    }
    const double v = pi * static_cast<double>(total);
    if (v >= static_cast<double>(std::numeric_limits<std::int64_t>::max())) return std::numeric_limits<std::int64_t>::max();
    return static_cast<std::int64_t>(std::floor(v + 0.5));
}

std::vector<RelationshipInstance> retain_background(const std::vector<RelationshipInstance>& bg_instances,
                                                    std::int64_t budget, Rng& rng) {
    if (budget < 0) throw ConfigError("background budget must be nonnegative");
    const std::size_t keep = std::min<std::size_t>(bg_instances.size(), static_cast<std::size_t>(
        std::min<std::int64_t>(budget, static_cast<std::int64_t>(bg_instances.size()))));
    const auto idx = rng.sample_indices(bg_instances.size(), keep);
    std::vector<RelationshipInstance> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(bg_instances[i]);
    return out;
}

SamplingPlan make_plan(const ClassLossTracker& tracker, const AreConfig& cfg, const QuerySet& qs,
                       std::int64_t fg_in_batch) {
    cfg.validate();
    SamplingPlan plan;
    plan.losses = tracker.losses();
    plan.probs = query_distribution(tracker, cfg.alpha);
    // plan against the full per-class pool sizes; the shrinking remainder is
    // a draw-level concern and would otherwise stall the budget at zero
    plan.add_counts = sampling_sizes(plan.probs, cfg.lambda, qs.source_sizes());
    plan.fg_in_batch = fg_in_batch;
    plan.bg_budget = background_budget(plan.add_counts, fg_in_batch, cfg.pi);
    return plan;
}

AssembledBatch assemble_batch(const std::vector<RelationshipInstance>& base_batch, const SamplingPlan& plan,
                              QuerySet& qs, SamplingKernel kernel, int background_label, Rng& rng,
                              const SoftmaxModel* model) {
    std::vector<RelationshipInstance> bg;
    for (const auto& inst : base_batch) {
        if (inst.relation_label == background_label) bg.push_back(inst);
    }
    const auto retained = retain_background(bg, plan.bg_budget, rng);
    std::set<std::int64_t> retained_ids;
    for (const auto& inst : retained) retained_ids.insert(inst.instance_id);

    AssembledBatch out;
    out.instances.reserve(base_batch.size());
    for (const auto& inst : base_batch) {
        if (inst.relation_label == background_label) {
            if (!retained_ids.count(inst.instance_id)) continue;
            out.instances.push_back(inst);
            out.provenance.push_back(Provenance::RetainedBackground);
        } else {
            out.instances.push_back(inst);
            out.provenance.push_back(Provenance::Original);
        }
    }
    for (const auto& [cls, n] : plan.add_counts) {
        if (n <= 0) continue;
        auto drawn = qs.draw(cls, static_cast<std::size_t>(n), kernel, rng, model);
        for (auto& inst : drawn) {
            out.instances.push_back(std::move(inst));
            out.provenance.push_back(Provenance::Added);
        }
    }
    return out;
}

}  // namespace rcsim
