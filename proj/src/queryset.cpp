#include "rcsim/queryset.hpp"

#include <algorithm>
#include <set>

#include "rcsim/mis.hpp"

namespace rcsim {

void QuerySetConfig::validate(int num_relation_classes) const {
    if (selection_mode == SelectionMode::ExplicitK) {
        if (k_prime < 1) throw ConfigError("k_prime must be positive");
        if (k_prime >= num_relation_classes) throw ConfigError("k_prime must be smaller than the number of relation classes");
    } else {
        if (!(target_fraction > 0.0 && target_fraction <= 1.0)) throw ConfigError("target_fraction must be in (0,1]");
    }
}

QuerySet QuerySet::build(const Dataset& ds, const QuerySetConfig& qcfg) {
    const int K = ds.config.num_relation_classes;
    qcfg.validate(K);

    std::vector<std::int64_t> counts(K, 0);
    std::int64_t total_fg = 0;
    for (const auto& s : ds.scenes) {
        for (const auto& inst : s.instances) {
            if (inst.relation_label < K) {
                ++counts[inst.relation_label];
                ++total_fg;
            }
        }
    }
    if (total_fg == 0) throw DataError("dataset has no foreground instances");

    // ascending frequency, ties toward the lower class index
    std::vector<int> order(K);
    for (int k = 0; k < K; ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return counts[a] < counts[b]; });

    std::vector<int> selected;
    if (qcfg.selection_mode == QuerySetConfig::SelectionMode::ExplicitK) {
        selected.assign(order.begin(), order.begin() + qcfg.k_prime);
    } else {
        // largest tail suffix whose cumulative share stays within the target;
        // at least one class always stays outside the query set
        std::int64_t cum = 0;
        for (int k : order) {
            if (static_cast<int>(selected.size()) + 1 >= K) break;
            if (static_cast<double>(cum + counts[k]) > qcfg.target_fraction * static_cast<double>(total_fg)) break;
            cum += counts[k];
            selected.push_back(k);
        }
    }
    std::sort(selected.begin(), selected.end());

    QuerySet qs;
    qs.classes_ = selected;
    for (int k : selected) {
        qs.source_[k] = {};
        qs.consumed_[k] = 0;
        qs.cycles_[k] = 0;
    }
    for (const auto& s : ds.scenes) {
        for (const auto& inst : s.instances) {
            auto it = qs.source_.find(inst.relation_label);
            if (it != qs.source_.end()) it->second.push_back(inst);
        }
    }
    for (int k : selected) {
        auto& idx = qs.remaining_[k];
        idx.resize(qs.source_[k].size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    }
    return qs;
}

const std::vector<RelationshipInstance>& QuerySet::source_for(int cls) const {
    auto it = source_.find(cls);
    if (it == source_.end()) throw DataError("class is not in the query set");
    return it->second;
}

std::size_t QuerySet::pool_size(int cls) const {
    source_for(cls);
    return remaining_.at(cls).size();
}

std::size_t QuerySet::source_size(int cls) const { return source_for(cls).size(); }

std::map<int, std::size_t> QuerySet::pool_sizes() const {
    std::map<int, std::size_t> sizes;
    for (int k : classes_) sizes[k] = remaining_.at(k).size();
    return sizes;
}

std::map<int, std::size_t> QuerySet::source_sizes() const {
    std::map<int, std::size_t> sizes;
    for (int k : classes_) sizes[k] = source_.at(k).size();
    return sizes;
}

std::int64_t QuerySet::consumed(int cls) const {
    source_for(cls);
    return consumed_.at(cls);
}

std::int64_t QuerySet::replenish_cycles(int cls) const {
    source_for(cls);
    return cycles_.at(cls);
}

bool QuerySet::replenish(int cls) {
    const auto& src = source_for(cls);
    auto& idx = remaining_.at(cls);
    if (idx.size() == src.size()) return false;
    idx.resize(src.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    consumed_[cls] = 0;
    ++cycles_[cls];
    return true;
}

std::vector<RelationshipInstance> QuerySet::draw(int cls, std::size_t n, SamplingKernel kernel, Rng& rng,
                                                 const SoftmaxModel* model) {
    const auto& src = source_for(cls);
    std::vector<RelationshipInstance> out;
    if (n == 0) return out;
    std::set<std::int64_t> taken_ids;
    auto& idx = remaining_.at(cls);

    while (out.size() < n) {
        if (idx.empty()) replenish(cls);
        std::vector<std::size_t> eligible;
        eligible.reserve(idx.size());
        for (auto i : idx)
            if (!taken_ids.count(src[i].instance_id)) eligible.push_back(i);
        if (eligible.empty()) break;  // n exceeds the class population

        std::vector<RelationshipInstance> view;
        view.reserve(eligible.size());
        for (auto i : eligible) view.push_back(src[i]);
        PairPool pool = PairPool::from_instances(std::move(view));

        const std::size_t need = n - out.size();
        std::vector<RelationshipInstance> picks;
        switch (kernel) {
            case SamplingKernel::Random:
                picks = random_sample(pool, need, rng);
                break;
            case SamplingKernel::Mis:
                picks = unique_pair_sample(pool, need, rng);
                break;
            case SamplingKernel::MaxMi:
                picks = max_mi_sample(pool, need);
                break;
            case SamplingKernel::LeastConfidence:
            case SamplingKernel::MaxEntropy:
            case SamplingKernel::Margin:
                if (!model) throw ConfigError("uncertainty kernels require a model");
                picks = uncertainty_sample(pool, need, *model, kernel);
                break;
        }

        std::set<std::int64_t> picked_ids;
        for (const auto& inst : picks) picked_ids.insert(inst.instance_id);
        idx.erase(std::remove_if(idx.begin(), idx.end(),
                                 [&](std::size_t i) { return picked_ids.count(src[i].instance_id) > 0; }),
                  idx.end());
        for (auto& inst : picks) {
            taken_ids.insert(inst.instance_id);
            out.push_back(std::move(inst));
        }
        consumed_[cls] += static_cast<std::int64_t>(picks.size());
    }
    return out;
}

nlohmann::json QuerySet::dump_state() const {
    nlohmann::json state = nlohmann::json::object();
    for (int k : classes_) {
        std::vector<std::int64_t> ids;
        const auto& src = source_.at(k);
        for (auto i : remaining_.at(k)) ids.push_back(src[i].instance_id);
        state[std::to_string(k)] = ids;
    }
    return state;
}

void QuerySet::restore_state(const nlohmann::json& state) {
    for (int k : classes_) {
        const auto& src = source_.at(k);
        std::map<std::int64_t, std::size_t> by_id;
        for (std::size_t i = 0; i < src.size(); ++i) by_id[src[i].instance_id] = i;
        const auto key = std::to_string(k);
        if (!state.contains(key)) throw DataError("query set state is missing class " + key);
        auto& idx = remaining_.at(k);
        idx.clear();
        for (const auto& id : state.at(key)) {
            auto it = by_id.find(id.get<std::int64_t>());
            if (it == by_id.end()) throw DataError("query set state references an unknown instance id");
            idx.push_back(it->second);
        }
        consumed_[k] = static_cast<std::int64_t>(src.size() - idx.size());
    }
}

}  // namespace rcsim
