#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "json.hpp"
#include "rcsim/classifier.hpp"
#include "rcsim/rng.hpp"
#include "rcsim/types.hpp"

namespace rcsim {

struct QuerySetConfig {
    enum class SelectionMode { ExplicitK, Fraction };
    SelectionMode selection_mode = SelectionMode::Fraction;
    int k_prime = 1;               // explicit mode: number of least-frequent classes
    double target_fraction = 0.2;  // fraction mode: cumulative instance-share cap

    void validate(int num_relation_classes) const;
};

// Per-class pools of tail-class foreground features, drawn without
// replacement and replenished from the source dataset on exhaustion.
class QuerySet {
public:
    static QuerySet build(const Dataset& ds, const QuerySetConfig& qcfg);

    const std::vector<int>& classes() const { return classes_; }  // ascending class index
    bool contains(int cls) const { return source_.count(cls) > 0; }
    std::size_t pool_size(int cls) const;    // remaining instances this cycle
    std::size_t source_size(int cls) const;  // all instances of the class in the dataset
    std::map<int, std::size_t> pool_sizes() const;
    std::map<int, std::size_t> source_sizes() const;

    // Draws exactly n instances, replenishing mid-draw when the pool empties.
    // An instance taken earlier in the same draw is never re-selected, so the
    // result can fall short only when n exceeds the class population.
    std::vector<RelationshipInstance> draw(int cls, std::size_t n, SamplingKernel kernel, Rng& rng,
                                           const SoftmaxModel* model = nullptr);

    // Resets the class pool to the full source; returns false (and leaves the
    // pool untouched) when it is already full.
    bool replenish(int cls);

    std::int64_t consumed(int cls) const;
    std::int64_t replenish_cycles(int cls) const;

    // State round-trip as class -> remaining instance ids.
    nlohmann::json dump_state() const;
    void restore_state(const nlohmann::json& state);

private:
    std::vector<int> classes_;
    std::map<int, std::vector<RelationshipInstance>> source_;
    std::map<int, std::vector<std::size_t>> remaining_;  // indices into source_, draw order
    std::map<int, std::int64_t> consumed_;
    std::map<int, std::int64_t> cycles_;

    const std::vector<RelationshipInstance>& source_for(int cls) const;
};

}  // namespace rcsim
