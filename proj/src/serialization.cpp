#include "rcsim/serialization.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>

namespace rcsim {

namespace {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

void to_json(nlohmann::json& j, const ConfounderConfig& c) {
    j = nlohmann::json{{"a1", c.a1},
                       {"a2", c.a2},
                       {"var_z", c.var_z},
                       {"var_eps1", c.var_eps1},
                       {"var_eps2", c.var_eps2}};
}

void from_json(const nlohmann::json& j, ConfounderConfig& c) {
    read_opt(j, "a1", c.a1);
    read_opt(j, "a2", c.a2);
    read_opt(j, "var_z", c.var_z);
    read_opt(j, "var_eps1", c.var_eps1);
    read_opt(j, "var_eps2", c.var_eps2);
}

void to_json(nlohmann::json& j, const SynthConfig& c) {
    j = nlohmann::json{{"num_relation_classes", c.num_relation_classes},
                       {"num_object_classes", c.num_object_classes},
                       {"feature_dim", c.feature_dim},
                       {"zipf_exponent", c.zipf_exponent},
                       {"class_weights", c.class_weights},
                       {"pair_zipf_exponent", c.pair_zipf_exponent},
                       {"cooccurrence_strength", c.cooccurrence_strength},
                       {"cluster_width", c.cluster_width},
                       {"confounder", c.confounder},
                       {"num_scenes", c.num_scenes},
                       {"relations_per_scene_min", c.relations_per_scene_min},
                       {"relations_per_scene_max", c.relations_per_scene_max},
                       {"background_fraction", c.background_fraction},
                       {"class_mean_separation", c.class_mean_separation},
                       {"class_noise_std", c.class_noise_std},
                       {"seed", c.seed},
                       {"sample_seed", c.sample_seed}};
}

void from_json(const nlohmann::json& j, SynthConfig& c) {
    read_opt(j, "num_relation_classes", c.num_relation_classes);
    read_opt(j, "num_object_classes", c.num_object_classes);
    read_opt(j, "feature_dim", c.feature_dim);
    read_opt(j, "zipf_exponent", c.zipf_exponent);
    read_opt(j, "class_weights", c.class_weights);
    read_opt(j, "pair_zipf_exponent", c.pair_zipf_exponent);
    read_opt(j, "cooccurrence_strength", c.cooccurrence_strength);
    read_opt(j, "cluster_width", c.cluster_width);
    read_opt(j, "confounder", c.confounder);
    read_opt(j, "num_scenes", c.num_scenes);
    read_opt(j, "relations_per_scene_min", c.relations_per_scene_min);
    read_opt(j, "relations_per_scene_max", c.relations_per_scene_max);
    read_opt(j, "background_fraction", c.background_fraction);
    read_opt(j, "class_mean_separation", c.class_mean_separation);
    read_opt(j, "class_noise_std", c.class_noise_std);
    read_opt(j, "seed", c.seed);
    read_opt(j, "sample_seed", c.sample_seed);
}

void to_json(nlohmann::json& j, const QuerySetConfig& c) {
    j = nlohmann::json{{"selection_mode", c.selection_mode == QuerySetConfig::SelectionMode::Fraction ? "fraction" : "explicit_k"},
                       {"k_prime", c.k_prime},
                       {"target_fraction", c.target_fraction}};
}

void from_json(const nlohmann::json& j, QuerySetConfig& c) {
    if (j.contains("selection_mode")) {
        const auto mode = j.at("selection_mode").get<std::string>();
        if (mode == "fraction") {
            c.selection_mode = QuerySetConfig::SelectionMode::Fraction;
        } else if (mode == "explicit_k") {
            c.selection_mode = QuerySetConfig::SelectionMode::ExplicitK;
        } else {
            throw ConfigError("unknown selection_mode: " + mode);
        }
    }
    read_opt(j, "k_prime", c.k_prime);
    read_opt(j, "target_fraction", c.target_fraction);
}

void to_json(nlohmann::json& j, const AreConfig& c) {
    j = nlohmann::json{{"alpha", c.alpha},
                       {"lambda", c.lambda},
                       {"kernel", kernel_tag(c.kernel)}};
    if (std::isinf(c.pi)) {
        j["pi"] = "inf";
    } else {
        j["pi"] = c.pi;
    }
    if (c.loss_init) {
        j["loss_init"] = *c.loss_init;
    } else {
        j["loss_init"] = nullptr;
    }
}

void from_json(const nlohmann::json& j, AreConfig& c) {
    read_opt(j, "alpha", c.alpha);
    read_opt(j, "lambda", c.lambda);
    if (j.contains("pi")) {
        if (j.at("pi").is_string()) {
            if (j.at("pi").get<std::string>() != "inf") throw ConfigError("pi must be a number or \"inf\"");
            c.pi = std::numeric_limits<double>::infinity();
        } else {
            c.pi = j.at("pi").get<double>();
        }
    }
    if (j.contains("kernel")) c.kernel = parse_kernel(j.at("kernel").get<std::string>());
    if (j.contains("loss_init") && !j.at("loss_init").is_null()) c.loss_init = j.at("loss_init").get<double>();
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = nlohmann::json{{"learning_rate", c.learning_rate},
                       {"epochs", c.epochs},
                       {"batch_size", c.batch_size},
                       {"sampler", sampler_tag(c.sampler)},
                       {"are", c.are},
                       {"seed", c.seed}};
    if (c.mask_background_in_eval) {
        j["mask_background_in_eval"] = *c.mask_background_in_eval;
    } else {
        j["mask_background_in_eval"] = nullptr;
    }
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
    read_opt(j, "learning_rate", c.learning_rate);
    read_opt(j, "epochs", c.epochs);
    read_opt(j, "batch_size", c.batch_size);
    if (j.contains("sampler")) c.sampler = parse_sampler(j.at("sampler").get<std::string>());
    read_opt(j, "are", c.are);
    read_opt(j, "seed", c.seed);
    if (j.contains("mask_background_in_eval") && !j.at("mask_background_in_eval").is_null())
        c.mask_background_in_eval = j.at("mask_background_in_eval").get<bool>();
}

namespace {

template <typename V>
nlohmann::json class_map_to_json(const std::map<int, V>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : m) j[std::to_string(k)] = v;
    return j;
}

template <typename V>
std::map<int, V> class_map_from_json(const nlohmann::json& j) {
    std::map<int, V> m;
    for (auto it = j.begin(); it != j.end(); ++it) m[std::stoi(it.key())] = it.value().get<V>();
    return m;
}

}  // namespace

void to_json(nlohmann::json& j, const SamplingPlan& p) {
    j = nlohmann::json{{"losses", class_map_to_json(p.losses)},
                       {"probs", class_map_to_json(p.probs)},
                       {"add_counts", class_map_to_json(p.add_counts)},
                       {"bg_budget", p.bg_budget},
                       {"fg_in_batch", p.fg_in_batch}};
}

void from_json(const nlohmann::json& j, SamplingPlan& p) {
    p.losses = class_map_from_json<double>(j.at("losses"));
    p.probs = class_map_from_json<double>(j.at("probs"));
    p.add_counts = class_map_from_json<std::int64_t>(j.at("add_counts"));
    p.bg_budget = j.at("bg_budget").get<std::int64_t>();
    p.fg_in_batch = j.at("fg_in_batch").get<std::int64_t>();
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
    nlohmann::json per_class = nlohmann::json::object();
    for (const auto& [k, recalls] : r.per_class_recall) per_class[std::to_string(k)] = class_map_to_json(recalls);
    j = nlohmann::json{{"recall_at", class_map_to_json(r.recall_at)},
                       {"mean_recall_at", class_map_to_json(r.mean_recall_at)},
                       {"mr_at", class_map_to_json(r.mr_at)},
                       {"per_class_recall", per_class},
                       {"background_included", r.background_included},
                       {"n_scenes", r.n_scenes}};
}

void to_json(nlohmann::json& j, const DiagnosticsReport& r) {
    auto put = [&j](const char* key, double v) {
        if (std::isfinite(v)) {
            j[key] = v;
        } else {
            j[key] = nullptr;
        }
    };
    j = nlohmann::json::object();
    put("rho_empirical", r.rho_empirical);
    put("rho_analytic", r.rho_analytic);
    put("sce", r.sce);
    put("oe", r.oe);
    put("grad_cosine", r.grad_cosine);
}

std::string stable_hash(const nlohmann::json& j) {
    const std::string dump = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace rcsim
