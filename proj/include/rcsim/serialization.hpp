#pragma once

// JSON (de)serialization for the config and report types. Object keys are
// stored sorted by nlohmann::json, which keeps hashes of dumped configs
// stable under field reordering in input files.

#include "json.hpp"
#include "rcsim/are.hpp"
#include "rcsim/metrics.hpp"
#include "rcsim/queryset.hpp"
#include "rcsim/trainer.hpp"
#include "rcsim/types.hpp"

namespace rcsim {

void to_json(nlohmann::json& j, const ConfounderConfig& c);
void from_json(const nlohmann::json& j, ConfounderConfig& c);

void to_json(nlohmann::json& j, const SynthConfig& c);
void from_json(const nlohmann::json& j, SynthConfig& c);

void to_json(nlohmann::json& j, const QuerySetConfig& c);
void from_json(const nlohmann::json& j, QuerySetConfig& c);

// pi serializes as the string "inf" when infinite (JSON has no infinity)
void to_json(nlohmann::json& j, const AreConfig& c);
void from_json(const nlohmann::json& j, AreConfig& c);

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

void to_json(nlohmann::json& j, const SamplingPlan& p);
void from_json(const nlohmann::json& j, SamplingPlan& p);

void to_json(nlohmann::json& j, const MetricsReport& r);
void to_json(nlohmann::json& j, const DiagnosticsReport& r);

// FNV-1a over a canonical dump; stable across runs and platforms.
std::string stable_hash(const nlohmann::json& j);

}  // namespace rcsim
