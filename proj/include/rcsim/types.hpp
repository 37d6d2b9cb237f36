#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rcsim {

// Error categories map onto CLI exit codes (config -> 1, data -> 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SamplingKernel { Random, Mis, MaxMi, LeastConfidence, MaxEntropy, Margin };

SamplingKernel parse_kernel(const std::string& tag);
std::string kernel_tag(SamplingKernel k);

// Scalar confounder model: X = a1*Z + eps1, Y = a2*Z + eps2.
struct ConfounderConfig {
    double a1 = 0.0;
    double a2 = 0.0;
    double var_z = 1.0;
    double var_eps1 = 1.0;
    double var_eps2 = 1.0;

    void validate() const {
        if (var_z < 0 || var_eps1 < 0 || var_eps2 < 0) throw ConfigError("confounder variances must be nonnegative");
    }
};

struct SynthConfig {
    int num_relation_classes = 10;   // K foreground classes; background is index K
    int num_object_classes = 8;
    int feature_dim = 16;
    double zipf_exponent = 1.0;      // long-tail severity over relation classes
    // optional explicit prior weights (nonincreasing, one per class);
    // overrides the Zipf law when nonempty
    std::vector<double> class_weights;
    double pair_zipf_exponent = 1.0; // object-pair skew within each class
    double cooccurrence_strength = 0.0;
    int cluster_width = 2;           // contiguous class-index block per co-occurrence cluster
    ConfounderConfig confounder;
    int num_scenes = 200;
    int relations_per_scene_min = 4;
    int relations_per_scene_max = 8;
    double background_fraction = 0.0;
    double class_mean_separation = 3.0;
    double class_noise_std = 1.0;
    std::uint64_t seed = 1;
    // When nonzero, reseeds only the instance-level draws (scenes, labels,
    // features) while class means and the confounder direction stay tied to
    // `seed`; used to sample held-out data from the same generative law.
    std::uint64_t sample_seed = 0;

    int background_label() const { return num_relation_classes; }

    void validate() const {
        if (num_relation_classes < 1) throw ConfigError("num_relation_classes must be positive");
        if (num_object_classes < 1) throw ConfigError("num_object_classes must be positive");
        if (feature_dim < 1) throw ConfigError("feature_dim must be positive");
        if (zipf_exponent < 0 || pair_zipf_exponent < 0) throw ConfigError("zipf exponents must be nonnegative");
        if (!class_weights.empty()) {
            if (static_cast<int>(class_weights.size()) != num_relation_classes)
                throw ConfigError("class_weights must have one entry per relation class");
            for (std::size_t i = 0; i < class_weights.size(); ++i) {
                if (class_weights[i] <= 0) throw ConfigError("class_weights must be positive");
                if (i > 0 && class_weights[i] > class_weights[i - 1])
                    throw ConfigError("class_weights must be nonincreasing");
            }
        }
        if (cooccurrence_strength < 0 || cooccurrence_strength > 1) throw ConfigError("cooccurrence_strength must be in [0,1]");
        if (cluster_width < 1) throw ConfigError("cluster_width must be positive");
        if (num_scenes < 1) throw ConfigError("num_scenes must be positive");
        if (relations_per_scene_min < 1 || relations_per_scene_max < relations_per_scene_min)
            throw ConfigError("relations_per_scene range must be a nonempty positive range");
        if (background_fraction < 0 || background_fraction >= 1) throw ConfigError("background_fraction must be in [0,1)");
        if (class_mean_separation <= 0) throw ConfigError("class_mean_separation must be positive");
        if (class_noise_std <= 0) throw ConfigError("class_noise_std must be positive");
        confounder.validate();
    }
};

struct RelationshipInstance {
    std::int64_t instance_id = -1;  // position in dataset serialization order
    int scene_id = -1;
    int subject_class = 0;
    int object_class = 0;
    int relation_label = 0;  // in [0, K]; K is the background sentinel
    std::vector<double> feature;
};

struct Scene {
    int scene_id = -1;
    int cluster_id = -1;  // latent co-occurrence cluster; -1 when unknown (e.g. reloaded)
    std::vector<RelationshipInstance> instances;
};

struct Dataset {
    std::vector<Scene> scenes;
    SynthConfig config;

    std::size_t num_instances() const {
        std::size_t n = 0;
        for (const auto& s : scenes) n += s.instances.size();
        return n;
    }
    std::size_t num_foreground() const {
        std::size_t n = 0;
        for (const auto& s : scenes)
            for (const auto& inst : s.instances)
                if (inst.relation_label < config.num_relation_classes) ++n;
        return n;
    }
};

}  // namespace rcsim
