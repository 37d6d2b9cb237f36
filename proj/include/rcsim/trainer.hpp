#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcsim/are.hpp"
#include "rcsim/classifier.hpp"
#include "rcsim/queryset.hpp"
#include "rcsim/types.hpp"

namespace rcsim {

enum class Sampler { Baseline, Are };

Sampler parse_sampler(const std::string& tag);
std::string sampler_tag(Sampler s);

struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 10;
    int batch_size = 64;
    Sampler sampler = Sampler::Baseline;
    AreConfig are;
    QuerySetConfig queryset;
    std::uint64_t seed = 1;
    // unset: the harness evaluates both with and without the background class
    std::optional<bool> mask_background_in_eval;

    void validate(const Dataset& ds) const;
};

struct PlanLogEntry {
    int epoch = 0;
    int batch = 0;
    SamplingPlan plan;
};

struct BatchStats {
    int epoch = 0;
    int batch = 0;
    double mean_loss = 0.0;
    std::size_t size = 0;
    std::size_t original_fg = 0;
    std::size_t retained_bg = 0;
    std::size_t added = 0;
};

struct EpochStats {
    int epoch = 0;
    double mean_loss = 0.0;       // per-instance mean over the epoch's batches
    double train_accuracy = 0.0;  // argmax over all classes vs label
};

struct TrainHistory {
    std::vector<BatchStats> batches;
    std::vector<PlanLogEntry> plans;  // empty under the baseline sampler
    std::vector<EpochStats> epochs;
};

struct TrainResult {
    SoftmaxModel model;
    TrainHistory history;
};

// Epoch loop: shuffle scenes, slice scene-contiguous instance batches of
// batch_size, optionally recompose each batch from the previous batches'
// losses, then take one SGD step. Deterministic under (ds, cfg).
TrainResult train(const Dataset& ds, const TrainConfig& cfg);

}  // namespace rcsim
