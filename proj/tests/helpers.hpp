#pragma once

#include <utility>
#include <vector>

#include "rcsim/mis.hpp"
#include "rcsim/types.hpp"

namespace testutil {

inline rcsim::RelationshipInstance make_instance(std::int64_t id, int subj, int obj, int label,
                                                 std::vector<double> feature = {0.0}) {
    rcsim::RelationshipInstance inst;
    inst.instance_id = id;
    inst.scene_id = 0;
    inst.subject_class = subj;
    inst.object_class = obj;
    inst.relation_label = label;
    inst.feature = std::move(feature);
    return inst;
}

// pool from (subject, object, count) triples; ids are sequential
inline rcsim::PairPool make_pool(const std::vector<std::tuple<int, int, int>>& spec, int label = 0) {
    std::vector<rcsim::RelationshipInstance> insts;
    std::int64_t id = 0;
    for (const auto& [subj, obj, count] : spec) {
        for (int i = 0; i < count; ++i) insts.push_back(make_instance(id++, subj, obj, label));
    }
    return rcsim::PairPool::from_instances(std::move(insts));
}

}  // namespace testutil
