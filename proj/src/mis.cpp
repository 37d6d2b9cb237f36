#include "rcsim/mis.hpp"

#include <algorithm>
#include <cmath>

namespace rcsim {

namespace {

ObjectPair pair_of(const RelationshipInstance& inst) {
    return {inst.subject_class, inst.object_class};
}

PairCounts count_pairs(const std::vector<RelationshipInstance>& insts) {
    PairCounts counts;
    for (const auto& inst : insts) ++counts[pair_of(inst)];
    return counts;
}

int total_count(const PairCounts& counts) {
    int n = 0;
    for (const auto& [pair, c] : counts) n += c;
    return n;
}

// pool minus selected, validating multiset containment
PairCounts subtract(const PairCounts& pool, const PairCounts& selected) {
    PairCounts rem = pool;
    for (const auto& [pair, c] : selected) {
        auto it = rem.find(pair);
        if (it == rem.end() || it->second < c) throw DataError("selected set is not contained in the pool");
        it->second -= c;
        if (it->second == 0) rem.erase(it);
    }
    return rem;
}

double coupling_term(const PairCounts& counts, const ObjectPair& pair) {
    const int n = total_count(counts);
    if (n == 0) return 0.0;
    auto it = counts.find(pair);
    if (it == counts.end() || it->second == 0) return 0.0;
    int subj_total = 0;
    int obj_total = 0;
    for (const auto& [p, c] : counts) {
        if (p.first == pair.first) subj_total += c;
        if (p.second == pair.second) obj_total += c;
    }
    const double joint = static_cast<double>(it->second) / n;
    const double p_subj = static_cast<double>(subj_total) / n;
    const double p_obj = static_cast<double>(obj_total) / n;
    return joint * std::log(joint / (p_subj * p_obj));
}

}  // namespace

PairPool PairPool::from_instances(std::vector<RelationshipInstance> insts) {
    PairPool pool;
    pool.pair_counts = count_pairs(insts);
    pool.instances = std::move(insts);
    return pool;
}

double pair_entropy(const PairCounts& counts) {
    const int n = total_count(counts);
    if (n == 0) throw DataError("pair_entropy of an empty pool");
    double h = 0.0;
    for (const auto& [pair, c] : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
    }
    return h;
}

double pair_entropy(const PairPool& pool) { return pair_entropy(pool.pair_counts); }

double conditional_entropy(const PairCounts& pool, const PairCounts& selected) {
    if (total_count(pool) == 0) throw DataError("conditional_entropy of an empty pool");
    const PairCounts rem = subtract(pool, selected);
    const int n_rem = total_count(rem);
    if (n_rem == 0) return 0.0;
    double h = 0.0;
    for (const auto& [pair, c] : rem) {
        if (c == 0) continue;
        auto it = selected.find(pair);
        if (it != selected.end() && it->second > 0) continue;  // type already revealed
        const double p = static_cast<double>(c) / n_rem;
        h -= p * std::log(p);
    }
    return h;
}

double conditional_entropy(const PairPool& pool, const std::vector<RelationshipInstance>& selected) {
    return conditional_entropy(pool.pair_counts, count_pairs(selected));
}

double mutual_information(const PairCounts& pool, const PairCounts& selected) {
    return pair_entropy(pool) - conditional_entropy(pool, selected);
}

double mutual_information(const PairPool& pool, const std::vector<RelationshipInstance>& selected) {
    return mutual_information(pool.pair_counts, count_pairs(selected));
}

double delta_information(const PairCounts& pool, const PairCounts& selected, const ObjectPair& candidate) {
    auto it = pool.find(candidate);
    if (it == pool.end() || it->second == 0) throw DataError("candidate pair not present in pool");
    return coupling_term(pool, candidate) + coupling_term(selected, candidate);
}

double delta_information(const PairPool& pool, const std::vector<RelationshipInstance>& selected,
                         const ObjectPair& candidate) {
    return delta_information(pool.pair_counts, count_pairs(selected), candidate);
}

InfoReport info_report(const PairPool& pool, const std::vector<RelationshipInstance>& selected) {
    InfoReport rep;
    rep.entropy = pair_entropy(pool);
    const PairCounts sel = count_pairs(selected);
    rep.conditional_entropy = conditional_entropy(pool.pair_counts, sel);
    rep.mutual_information = rep.entropy - rep.conditional_entropy;
    const PairCounts rem = subtract(pool.pair_counts, sel);
    for (const auto& [pair, c] : rem) {
        if (c > 0) rep.per_pair_delta[pair] = delta_information(rem, sel, pair);
    }
    return rep;
}

std::vector<RelationshipInstance> unique_pair_sample(const PairPool& pool, std::size_t n, Rng& rng) {
    std::vector<RelationshipInstance> result;
    if (n == 0) return result;
    std::vector<const RelationshipInstance*> remaining;
    remaining.reserve(pool.instances.size());
    for (const auto& inst : pool.instances) remaining.push_back(&inst);

    while (result.size() < n && !remaining.empty()) {
        // one representative per distinct pair, in pool order
        std::vector<std::size_t> reps;
        PairCounts seen;
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            if (seen[pair_of(*remaining[i])]++ == 0) reps.push_back(i);
        }
        std::vector<std::size_t> chosen;
        if (result.size() + reps.size() <= n) {
            chosen = reps;
        } else {
            const std::size_t need = n - result.size();
            auto picks = rng.sample_indices(reps.size(), need);
            for (auto p : picks) chosen.push_back(reps[p]);
        }
        std::vector<bool> take(remaining.size(), false);
        for (auto i : chosen) {
            take[i] = true;
            result.push_back(*remaining[i]);
        }
        std::vector<const RelationshipInstance*> next;
        next.reserve(remaining.size() - chosen.size());
        for (std::size_t i = 0; i < remaining.size(); ++i)
            if (!take[i]) next.push_back(remaining[i]);
        remaining = std::move(next);
    }
    return result;
}

std::vector<RelationshipInstance> max_mi_sample(const PairPool& pool, std::size_t n) {
    if (n > 64) throw ConfigError("max_mi_sample is an oracle: n must be <= 64");
    if (pool.pair_counts.size() > 16) throw ConfigError("max_mi_sample is an oracle: at most 16 pair types");

    PairCounts remaining = pool.pair_counts;
    PairCounts selected;
    std::map<ObjectPair, std::vector<const RelationshipInstance*>> queues;
    for (const auto& inst : pool.instances) queues[pair_of(inst)].push_back(&inst);
    std::map<ObjectPair, bool> picked_since_reset;

    std::vector<RelationshipInstance> result;
    while (result.size() < n) {
        std::vector<ObjectPair> candidates;
        for (const auto& [pair, c] : remaining)
            if (c > 0 && !picked_since_reset[pair]) candidates.push_back(pair);
        if (candidates.empty()) {
            picked_since_reset.clear();
            for (const auto& [pair, c] : remaining)
                if (c > 0) candidates.push_back(pair);
            if (candidates.empty()) break;  // pool exhausted
        }
        // exact stepwise gain: argmax of MI(selected + {pair}) over the fixed
        // pool, i.e. argmin of the residual entropy after the pick; ties
        // break toward the rarer pair, then lexicographic order
        auto residual_after = [&](const ObjectPair& pair) {
            ++selected[pair];
            const double r = conditional_entropy(pool.pair_counts, selected);
            if (--selected[pair] == 0) selected.erase(pair);
            return r;
        };
        ObjectPair best = candidates.front();
        double best_residual = residual_after(best);
        for (std::size_t i = 1; i < candidates.size(); ++i) {
            const double r = residual_after(candidates[i]);
            if (r < best_residual || (r == best_residual && remaining[candidates[i]] < remaining[best])) {
                best_residual = r;
                best = candidates[i];
            }
        }
        auto& q = queues[best];
        result.push_back(*q[q.size() - static_cast<std::size_t>(remaining[best])]);
        --remaining[best];
        ++selected[best];
        picked_since_reset[best] = true;
    }
    return result;
}

std::vector<RelationshipInstance> random_sample(const PairPool& pool, std::size_t n, Rng& rng) {
    const auto idx = rng.sample_indices(pool.instances.size(), n);
    std::vector<RelationshipInstance> result;
    result.reserve(idx.size());
    for (auto i : idx) result.push_back(pool.instances[i]);
    return result;
}

std::vector<RelationshipInstance> uncertainty_sample(const PairPool& pool, std::size_t n,
                                                     const SoftmaxModel& model, SamplingKernel variant) {
    struct Scored {
        double score;
        std::int64_t id;
        const RelationshipInstance* inst;
    };
    std::vector<Scored> scored;
    scored.reserve(pool.instances.size());
    for (const auto& inst : pool.instances) {
        const auto p = forward_probs(model, inst.feature);
        double s = 0.0;
        switch (variant) {
            case SamplingKernel::LeastConfidence:
                s = 1.0 - *std::max_element(p.begin(), p.end());
                break;
            case SamplingKernel::MaxEntropy:
                for (double v : p) s -= v * std::log(v);
                break;
            case SamplingKernel::Margin: {
                double top1 = -1.0, top2 = -1.0;
                for (double v : p) {
                    if (v > top1) {
                        top2 = top1;
                        top1 = v;
                    } else if (v > top2) {
                        top2 = v;
                    }
                }
                s = -(top1 - top2);  // smallest gap first
                break;
            }
            default:
                throw ConfigError("uncertainty_sample expects an uncertainty kernel variant");
        }
        scored.push_back({s, inst.instance_id, &inst});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    std::vector<RelationshipInstance> result;
    const std::size_t take = std::min(n, scored.size());
    result.reserve(take);
    for (std::size_t i = 0; i < take; ++i) result.push_back(*scored[i].inst);
    return result;
}

}  // namespace rcsim
