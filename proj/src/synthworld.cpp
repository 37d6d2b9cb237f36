#include "rcsim/synthworld.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "json.hpp"
#include "rcsim/rng.hpp"
#include "rcsim/serialization.hpp"

namespace rcsim {

namespace {

std::vector<double> zipf_probs(int n, double exponent) {
    std::vector<double> p(n);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        p[k] = std::pow(static_cast<double>(k + 1), -exponent);
        sum += p[k];
    }
    for (auto& v : p) v /= sum;
    return p;
}

std::vector<double> cdf_of(const std::vector<double>& p) {
    std::vector<double> c(p.size());
    std::partial_sum(p.begin(), p.end(), c.begin());
    c.back() = 1.0;
    return c;
}

std::size_t draw_from_cdf(const std::vector<double>& cdf, Rng& rng) {
    const double u = rng.uniform();
    return std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
}

std::vector<double> unit_gaussian_direction(Rng& rng, int dim) {
    std::vector<double> v(dim);
    double norm = 0.0;
    do {
        norm = 0.0;
        for (auto& x : v) {
            x = rng.normal();
            norm += x * x;
        }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
}

}  // namespace

std::vector<double> class_priors(const SynthConfig& cfg) {
    if (!cfg.class_weights.empty()) {
        std::vector<double> p = cfg.class_weights;
        const double sum = std::accumulate(p.begin(), p.end(), 0.0);
        for (auto& v : p) v /= sum;
        return p;
    }
    return zipf_probs(cfg.num_relation_classes, cfg.zipf_exponent);
}

std::vector<std::vector<double>> class_means(const SynthConfig& cfg) {
    Rng rng = Rng::stream(cfg.seed, "class_means");
    std::vector<std::vector<double>> means(cfg.num_relation_classes);
    for (auto& m : means) {
        m = unit_gaussian_direction(rng, cfg.feature_dim);
        for (auto& x : m) x *= cfg.class_mean_separation;
    }
    return means;
}

std::vector<double> confounder_direction(const SynthConfig& cfg) {
    Rng rng = Rng::stream(cfg.seed, "confounder_direction");
    return unit_gaussian_direction(rng, cfg.feature_dim);
}

GaussianBayes::GaussianBayes(std::vector<std::vector<double>> means, std::vector<double> priors,
                             double noise_std, std::vector<double> confounder_dir, double confounder_var)
    : means_(std::move(means)), dir_(std::move(confounder_dir)) {
    if (means_.empty()) throw ConfigError("GaussianBayes needs at least one class");
    if (priors.size() != means_.size()) throw ConfigError("GaussianBayes priors/means size mismatch");
    log_priors_.resize(priors.size());
    for (std::size_t k = 0; k < priors.size(); ++k) log_priors_[k] = std::log(priors[k]);
    const double var = noise_std * noise_std;
    inv_var_ = 1.0 / var;
    // (var*I + c*u*u^T)^-1 = I/var - c/(var*(var+c)) * u*u^T for unit u
    rank_one_coef_ = confounder_var > 0 ? confounder_var / (var * (var + confounder_var)) : 0.0;
}

GaussianBayes GaussianBayes::from_config(const SynthConfig& cfg, bool balanced_priors) {
    std::vector<double> priors;
    if (balanced_priors) {
        priors.assign(cfg.num_relation_classes, 1.0 / cfg.num_relation_classes);
    } else {
        priors = class_priors(cfg);
    }
    const double a1 = cfg.confounder.a1;
    return GaussianBayes(class_means(cfg), std::move(priors), cfg.class_noise_std,
                         confounder_direction(cfg), a1 * a1 * cfg.confounder.var_z);
}

double GaussianBayes::score(const std::vector<double>& feature, int cls) const {
    const auto& mu = means_[cls];
    if (feature.size() != mu.size()) throw DataError("feature dimension mismatch");
    double sq = 0.0;
    double along = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double d = feature[i] - mu[i];
        sq += d * d;
        along += dir_[i] * d;
    }
    const double mahal = sq * inv_var_ - rank_one_coef_ * along * along;
    return log_priors_[cls] - 0.5 * mahal;
}

int GaussianBayes::predict(const std::vector<double>& feature) const {
    int best = 0;
    double best_score = score(feature, 0);
    for (int k = 1; k < num_classes(); ++k) {
        const double s = score(feature, k);
        if (s > best_score) {
            best_score = s;
            best = k;
        }
    }
    return best;
}

int bayes_optimal_predict(const SynthConfig& cfg, const std::vector<double>& feature, bool balanced_priors) {
    return GaussianBayes::from_config(cfg, balanced_priors).predict(feature);
}

Dataset generate_world(const SynthConfig& cfg) {
    cfg.validate();
    const int K = cfg.num_relation_classes;
    const int O = cfg.num_object_classes;
    const std::uint64_t sample_root = cfg.sample_seed != 0 ? cfg.sample_seed : cfg.seed;

    const auto priors = class_priors(cfg);
    const auto prior_cdf = cdf_of(priors);
    const auto means = class_means(cfg);
    const auto u = confounder_direction(cfg);

    // Contiguous class-index blocks; a cluster's mass is the sum of its class
    // priors, so the label marginal is the Zipf marginal regardless of
    // cooccurrence_strength.
    const int num_clusters = (K + cfg.cluster_width - 1) / cfg.cluster_width;
    std::vector<double> cluster_mass(num_clusters, 0.0);
    std::vector<std::vector<double>> cluster_cdf(num_clusters);
    for (int c = 0; c < num_clusters; ++c) {
        const int lo = c * cfg.cluster_width;
        const int hi = std::min(K, lo + cfg.cluster_width);
        std::vector<double> within(priors.begin() + lo, priors.begin() + hi);
        cluster_mass[c] = std::accumulate(within.begin(), within.end(), 0.0);
        for (auto& v : within) v /= cluster_mass[c];
        cluster_cdf[c] = cdf_of(within);
    }
    const auto cluster_mass_cdf = cdf_of(cluster_mass);

    const auto pair_probs = zipf_probs(O * O, cfg.pair_zipf_exponent);
    const auto pair_cdf = cdf_of(pair_probs);

    Rng structure = Rng::stream(sample_root, "scene_structure");
    Rng features = Rng::stream(sample_root, "features");

    const double z_std = std::sqrt(cfg.confounder.var_z);
    const double bg_std = cfg.class_mean_separation + cfg.class_noise_std;

    Dataset ds;
    ds.config = cfg;
    ds.scenes.resize(cfg.num_scenes);
    std::int64_t next_id = 0;
    for (int s = 0; s < cfg.num_scenes; ++s) {
        Scene& scene = ds.scenes[s];
        scene.scene_id = s;
        scene.cluster_id = static_cast<int>(draw_from_cdf(cluster_mass_cdf, structure));
        const int n = static_cast<int>(structure.uniform_int(cfg.relations_per_scene_min, cfg.relations_per_scene_max));
        const double z = features.normal(0.0, z_std);
        scene.instances.resize(n);
        for (int j = 0; j < n; ++j) {
            RelationshipInstance& inst = scene.instances[j];
            inst.instance_id = next_id++;
            inst.scene_id = s;
            const bool is_bg = structure.uniform() < cfg.background_fraction;
            if (is_bg) {
                inst.relation_label = K;
            } else if (structure.uniform() < cfg.cooccurrence_strength) {
                const int lo = scene.cluster_id * cfg.cluster_width;
                inst.relation_label = lo + static_cast<int>(draw_from_cdf(cluster_cdf[scene.cluster_id], structure));
            } else {
                inst.relation_label = static_cast<int>(draw_from_cdf(prior_cdf, structure));
            }
            // pair skew shares one Zipf law, rotated per class so dominant
            // pairs differ across classes
            const std::uint64_t raw = draw_from_cdf(pair_cdf, structure);
            const std::uint64_t rotated = (raw + static_cast<std::uint64_t>(inst.relation_label) * 2654435761ULL) % static_cast<std::uint64_t>(O * O);
            inst.subject_class = static_cast<int>(rotated / O);
            inst.object_class = static_cast<int>(rotated % O);

            inst.feature.resize(cfg.feature_dim);
            if (inst.relation_label == K) {
                for (auto& x : inst.feature) x = features.normal(0.0, bg_std);
            } else {
                const auto& mu = means[inst.relation_label];
                const double shift = cfg.confounder.a1 * z;
                for (int i = 0; i < cfg.feature_dim; ++i) {
                    inst.feature[i] = mu[i] + shift * u[i] + features.normal(0.0, cfg.class_noise_std);
                }
            }
        }
    }
    return ds;
}

std::vector<std::int64_t> relation_histogram(const Dataset& ds) {
    std::vector<std::int64_t> counts(ds.config.num_relation_classes + 1, 0);
    for (const auto& s : ds.scenes)
        for (const auto& inst : s.instances) ++counts[inst.relation_label];
    return counts;
}

std::vector<std::vector<std::int64_t>> cooccurrence_matrix(const Dataset& ds) {
    const int K = ds.config.num_relation_classes;
    std::vector<std::vector<std::int64_t>> m(K, std::vector<std::int64_t>(K, 0));
    for (const auto& s : ds.scenes) {
        std::map<int, int> present;
        for (const auto& inst : s.instances)
            if (inst.relation_label < K) ++present[inst.relation_label];
        for (auto it = present.begin(); it != present.end(); ++it) {
            if (it->second >= 2) ++m[it->first][it->first];
            for (auto jt = std::next(it); jt != present.end(); ++jt) {
                ++m[it->first][jt->first];
                ++m[jt->first][it->first];
            }
        }
    }
    return m;
}

void save_dataset(const Dataset& ds, const std::string& jsonl_path, const std::string& sidecar_path) {
    std::ofstream out(jsonl_path);
    if (!out) throw DataError("cannot open for writing: " + jsonl_path);
    for (const auto& s : ds.scenes) {
        for (const auto& inst : s.instances) {
            nlohmann::json rec{{"scene_id", inst.scene_id},
                               {"subj", inst.subject_class},
                               {"obj", inst.object_class},
                               {"label", inst.relation_label},
                               {"feature", inst.feature}};
            out << rec.dump() << "\n";
        }
    }
    std::ofstream side(sidecar_path);
    if (!side) throw DataError("cannot open for writing: " + sidecar_path);
    side << nlohmann::json(ds.config).dump(2) << "\n";
}

Dataset load_dataset(const std::string& jsonl_path, const std::string& sidecar_path) {
    std::ifstream side(sidecar_path);
    if (!side) throw DataError("cannot open sidecar: " + sidecar_path);
    Dataset ds;
    ds.config = nlohmann::json::parse(side).get<SynthConfig>();

    std::ifstream in(jsonl_path);
    if (!in) throw DataError("cannot open dataset: " + jsonl_path);
    std::map<int, std::size_t> scene_index;
    std::string line;
    std::int64_t id = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto rec = nlohmann::json::parse(line);
        RelationshipInstance inst;
        inst.instance_id = id++;
        inst.scene_id = rec.at("scene_id").get<int>();
        inst.subject_class = rec.at("subj").get<int>();
        inst.object_class = rec.at("obj").get<int>();
        inst.relation_label = rec.at("label").get<int>();
        inst.feature = rec.at("feature").get<std::vector<double>>();
        if (inst.feature.size() != static_cast<std::size_t>(ds.config.feature_dim))
            throw DataError("feature length does not match sidecar feature_dim");
        auto it = scene_index.find(inst.scene_id);
        if (it == scene_index.end()) {
            it = scene_index.emplace(inst.scene_id, ds.scenes.size()).first;
            Scene scene;
            scene.scene_id = inst.scene_id;
            ds.scenes.push_back(std::move(scene));
        }
        ds.scenes[it->second].instances.push_back(std::move(inst));
    }
    return ds;
}

std::string kernel_tag(SamplingKernel k) {
    switch (k) {
        case SamplingKernel::Random: return "rnd";
        case SamplingKernel::Mis: return "mis";
        case SamplingKernel::MaxMi: return "max_mi";
        case SamplingKernel::LeastConfidence: return "lcs";
        case SamplingKernel::MaxEntropy: return "mes";
        case SamplingKernel::Margin: return "ms";
    }
    throw ConfigError("unknown kernel");
}

SamplingKernel parse_kernel(const std::string& tag) {
    if (tag == "rnd") return SamplingKernel::Random;
    if (tag == "mis") return SamplingKernel::Mis;
    if (tag == "max_mi") return SamplingKernel::MaxMi;
    if (tag == "lcs") return SamplingKernel::LeastConfidence;
    if (tag == "mes") return SamplingKernel::MaxEntropy;
    if (tag == "ms") return SamplingKernel::Margin;
    throw ConfigError("unknown sampling kernel tag: " + tag);
}

}  // namespace rcsim
