#pragma once

#include <map>
#include <utility>
#include <vector>

#include "rcsim/classifier.hpp"
#include "rcsim/rng.hpp"
#include "rcsim/types.hpp"

namespace rcsim {

using ObjectPair = std::pair<int, int>;          // (subject_class, object_class)
using PairCounts = std::map<ObjectPair, int>;    // ordered => lexicographic pair order

// Sampling pool for a single relation class.
struct PairPool {
    std::vector<RelationshipInstance> instances;
    PairCounts pair_counts;

    static PairPool from_instances(std::vector<RelationshipInstance> insts);
};

struct InfoReport {
    double entropy = 0.0;
    double conditional_entropy = 0.0;
    double mutual_information = 0.0;
    std::map<ObjectPair, double> per_pair_delta;
};

// Plug-in entropy of the object-pair distribution, in nats.
double pair_entropy(const PairCounts& counts);
double pair_entropy(const PairPool& pool);

// Residual uncertainty about the pool composition after drawing `selected`
// without replacement: the entropy of the pair types the selection has not
// covered, with frequencies taken from the post-removal pool. Empty selection
// gives back pair_entropy; a selection covering every remaining type gives 0.
double conditional_entropy(const PairCounts& pool, const PairCounts& selected);
double conditional_entropy(const PairPool& pool, const std::vector<RelationshipInstance>& selected);

double mutual_information(const PairCounts& pool, const PairCounts& selected);
double mutual_information(const PairPool& pool, const std::vector<RelationshipInstance>& selected);

// Estimated mutual-information gain of drawing `candidate` next: pointwise
// coupling of the pair under the current pool plus the same term under the
// selected set. Terms with an undefined log contribute 0.
double delta_information(const PairCounts& pool, const PairCounts& selected, const ObjectPair& candidate);
double delta_information(const PairPool& pool, const std::vector<RelationshipInstance>& selected,
                         const ObjectPair& candidate);

InfoReport info_report(const PairPool& pool, const std::vector<RelationshipInstance>& selected);

// Pass-based diversity sampler: each pass takes one instance per distinct
// pair among the remaining instances; a final overshooting pass picks the
// shortfall uniformly from that pass's unique set.
std::vector<RelationshipInstance> unique_pair_sample(const PairPool& pool, std::size_t n, Rng& rng);

// Greedy reference oracle: repeatedly picks the unselected pair type with the
// largest exact mutual-information gain (ties toward the rarer pair, then
// lexicographic order), resetting the unselected set once every available
// type has been taken. Refuses pools beyond oracle scale (n <= 64, pair
// types <= 16).
std::vector<RelationshipInstance> max_mi_sample(const PairPool& pool, std::size_t n);

std::vector<RelationshipInstance> random_sample(const PairPool& pool, std::size_t n, Rng& rng);

// Classic uncertainty criteria on model probabilities; top-n, ties by
// instance id. variant must be LeastConfidence, MaxEntropy or Margin.
std::vector<RelationshipInstance> uncertainty_sample(const PairPool& pool, std::size_t n,
                                                     const SoftmaxModel& model, SamplingKernel variant);

}  // namespace rcsim
