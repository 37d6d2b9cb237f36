#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "rcsim/rng.hpp"
#include "rcsim/synthworld.hpp"

using namespace rcsim;

namespace {

SynthConfig base_config() {
    SynthConfig cfg;
    cfg.num_relation_classes = 5;
    cfg.num_object_classes = 4;
    cfg.feature_dim = 6;
    cfg.zipf_exponent = 1.0;
    cfg.num_scenes = 300;
    cfg.relations_per_scene_min = 4;
    cfg.relations_per_scene_max = 8;
    cfg.background_fraction = 0.0;
    cfg.seed = 123;
    return cfg;
}

std::string dump_to_string(const Dataset& ds) {
    const auto tmp = std::filesystem::temp_directory_path();
    const auto data = (tmp / "rcsim_det_test.jsonl").string();
    const auto side = (tmp / "rcsim_det_test.json").string();
    save_dataset(ds, data, side);
    std::ifstream in(data);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("generation is deterministic under (cfg, seed)") {
    const auto cfg = base_config();
    const Dataset a = generate_world(cfg);
    const Dataset b = generate_world(cfg);
    CHECK(dump_to_string(a) == dump_to_string(b));

    SynthConfig other = cfg;
    other.seed = 124;
    CHECK(dump_to_string(generate_world(other)) != dump_to_string(a));
}

TEST_CASE("uniform two-class world splits evenly within 3 sigma") {
    SynthConfig cfg = base_config();
    cfg.num_relation_classes = 2;
    cfg.zipf_exponent = 0.0;
    cfg.cooccurrence_strength = 0.0;
    cfg.num_scenes = 1000;
    cfg.relations_per_scene_min = cfg.relations_per_scene_max = 10;
    const Dataset ds = generate_world(cfg);
    const auto hist = relation_histogram(ds);
    const double n = static_cast<double>(hist[0] + hist[1]);
    const double sigma = std::sqrt(n * 0.25);
    CHECK(std::abs(static_cast<double>(hist[0]) - n / 2) <= 3 * sigma);
}

TEST_CASE("zipf(1) head/tail frequency ratio approximates the closed form") {
    SynthConfig cfg = base_config();
    cfg.zipf_exponent = 1.0;
    cfg.num_relation_classes = 5;
    cfg.num_scenes = 1200;
    cfg.relations_per_scene_min = cfg.relations_per_scene_max = 9;  // ~10800 foreground draws
    const Dataset ds = generate_world(cfg);
    const auto hist = relation_histogram(ds);
    // closed form: p0/p4 = (1/1)/(1/5) = 5
    const double ratio = static_cast<double>(hist[0]) / static_cast<double>(hist[4]);
    CHECK(ratio == doctest::Approx(5.0).epsilon(0.15));
}

TEST_CASE("histogram is monotone nonincreasing over foreground classes and matches a recount") {
    const Dataset ds = generate_world(base_config());
    const auto hist = relation_histogram(ds);
    std::map<int, std::int64_t> recount;
    std::int64_t total = 0;
    for (const auto& s : ds.scenes)
        for (const auto& inst : s.instances) {
            ++recount[inst.relation_label];
            ++total;
        }
    for (int k = 0; k < ds.config.num_relation_classes; ++k) {
        CHECK(hist[k] == recount[k]);
        if (k > 0) CHECK(hist[k] <= hist[k - 1]);
    }
    std::int64_t sum = 0;
    for (auto c : hist) sum += c;
    CHECK(sum == total);
}

TEST_CASE("all-background world has zero foreground counts") {
    SynthConfig cfg = base_config();
    cfg.background_fraction = 0.999999;  // background_fraction < 1 by contract
    const Dataset ds = generate_world(cfg);
    const auto hist = relation_histogram(ds);
    std::int64_t fg = 0;
    for (int k = 0; k < cfg.num_relation_classes; ++k) fg += hist[k];
    CHECK(fg == static_cast<std::int64_t>(ds.num_foreground()));
    CHECK(hist[cfg.num_relation_classes] == static_cast<std::int64_t>(ds.num_instances() - ds.num_foreground()));
}

TEST_CASE("invalid configs are rejected") {
    SynthConfig cfg = base_config();
    cfg.num_relation_classes = 0;
    CHECK_THROWS_AS(generate_world(cfg), ConfigError);
    cfg = base_config();
    cfg.relations_per_scene_max = 2;
    cfg.relations_per_scene_min = 5;
    CHECK_THROWS_AS(generate_world(cfg), ConfigError);
    cfg = base_config();
    cfg.background_fraction = 1.0;
    CHECK_THROWS_AS(generate_world(cfg), ConfigError);
}

TEST_CASE("cooccurrence matrix: single scene with classes {0,1}") {
    Dataset ds;
    ds.config = base_config();
    ds.config.num_relation_classes = 3;
    Scene scene;
    scene.scene_id = 0;
    for (int label : {0, 1}) {
        RelationshipInstance inst;
        inst.instance_id = label;
        inst.scene_id = 0;
        inst.relation_label = label;
        inst.feature.assign(ds.config.feature_dim, 0.0);
        scene.instances.push_back(inst);
    }
    ds.scenes.push_back(scene);
    const auto m = cooccurrence_matrix(ds);
    CHECK(m[0][1] == 1);
    CHECK(m[1][0] == 1);
    CHECK(m[0][0] == 0);
    CHECK(m[2][2] == 0);
}

TEST_CASE("cooccurrence matrix is symmetric and reconstructible by brute force") {
    SynthConfig cfg = base_config();
    cfg.cooccurrence_strength = 0.5;
    cfg.cluster_width = 2;
    const Dataset ds = generate_world(cfg);
    const auto m = cooccurrence_matrix(ds);
    const int K = cfg.num_relation_classes;

    std::vector<std::vector<std::int64_t>> brute(K, std::vector<std::int64_t>(K, 0));
    for (const auto& s : ds.scenes) {
        std::map<int, int> present;
        for (const auto& inst : s.instances)
            if (inst.relation_label < K) ++present[inst.relation_label];
        for (const auto& [a, ca] : present) {
            if (ca >= 2) ++brute[a][a];
            for (const auto& [b, cb] : present)
                if (a != b) ++brute[a][b];
        }
    }
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) {
            CHECK(m[i][j] == brute[i][j]);
            CHECK(m[i][j] == m[j][i]);
        }
}

TEST_CASE("full co-occurrence puts more pair mass within clusters than across") {
    SynthConfig cfg = base_config();
    cfg.num_relation_classes = 6;
    cfg.cluster_width = 2;
    cfg.cooccurrence_strength = 1.0;
    cfg.zipf_exponent = 0.5;
    cfg.num_scenes = 600;
    const Dataset ds = generate_world(cfg);
    const auto m = cooccurrence_matrix(ds);
    std::int64_t within = 0, across = 0;
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) {
            if (i / 2 == j / 2)
                within += m[i][j];
            else
                across += m[i][j];
        }
    CHECK(within > across);
}

TEST_CASE("no scenes yields a zero matrix") {
    Dataset ds;
    ds.config = base_config();
    const auto m = cooccurrence_matrix(ds);
    for (const auto& row : m)
        for (auto v : row) CHECK(v == 0);
}

TEST_CASE("bayes oracle: feature at a class mean with uniform priors") {
    SynthConfig cfg = base_config();
    cfg.class_mean_separation = 6.0;
    cfg.class_noise_std = 0.5;
    const auto means = class_means(cfg);
    CHECK(bayes_optimal_predict(cfg, means[2], /*balanced_priors=*/true) == 2);
}

TEST_CASE("bayes oracle: midpoint tie breaks toward the lower class index") {
    std::vector<std::vector<double>> means{{0.0, 0.0}, {2.0, 0.0}};
    std::vector<double> priors{0.5, 0.5};
    GaussianBayes oracle(means, priors, 1.0, {1.0, 0.0}, 0.0);
    CHECK(oracle.predict({1.0, 0.0}) == 0);
    CHECK(oracle.predict({0.9, 0.0}) == 0);
    CHECK(oracle.predict({1.1, 0.0}) == 1);
}

TEST_CASE("bayes oracle agrees with a dense-covariance density evaluation") {
    SynthConfig cfg = base_config();
    cfg.confounder.a1 = 1.5;
    cfg.confounder.var_z = 2.0;
    const auto means = class_means(cfg);
    const auto priors = class_priors(cfg);
    const auto dir = confounder_direction(cfg);
    const double cvar = cfg.confounder.a1 * cfg.confounder.a1 * cfg.confounder.var_z;

    Rng rng(99);
    int agree = 0;
    const int trials = 500;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> x(cfg.feature_dim);
        for (auto& v : x) v = rng.normal(0.0, 3.0);
        const int fast = bayes_optimal_predict(cfg, x);
        const int dense = oracle::dense_bayes_predict(means, priors, cfg.class_noise_std, dir, cvar, x);
        agree += fast == dense ? 1 : 0;
    }
    CHECK(agree == trials);
}

TEST_CASE("bayes oracle rejects dimension mismatches") {
    const auto cfg = base_config();
    CHECK_THROWS_AS(bayes_optimal_predict(cfg, {1.0, 2.0}), DataError);
}

TEST_CASE("dataset serialization round-trips features exactly") {
    const Dataset ds = generate_world(base_config());
    const auto tmp = std::filesystem::temp_directory_path();
    const auto data = (tmp / "rcsim_roundtrip.jsonl").string();
    const auto side = (tmp / "rcsim_roundtrip.json").string();
    save_dataset(ds, data, side);
    const Dataset back = load_dataset(data, side);

    REQUIRE(back.scenes.size() == ds.scenes.size());
    bool identical = true;
    for (std::size_t s = 0; s < ds.scenes.size(); ++s) {
        REQUIRE(back.scenes[s].instances.size() == ds.scenes[s].instances.size());
        for (std::size_t i = 0; i < ds.scenes[s].instances.size(); ++i) {
            const auto& a = ds.scenes[s].instances[i];
            const auto& b = back.scenes[s].instances[i];
            identical = identical && a.scene_id == b.scene_id && a.subject_class == b.subject_class &&
                        a.object_class == b.object_class && a.relation_label == b.relation_label &&
                        a.feature == b.feature;  // bit-exact doubles
        }
    }
    CHECK(identical);
    CHECK(back.config.seed == ds.config.seed);

    // saving the reloaded dataset reproduces the file byte for byte
    const auto data2 = (tmp / "rcsim_roundtrip2.jsonl").string();
    save_dataset(back, data2, (tmp / "rcsim_roundtrip2.json").string());
    std::ifstream f1(data), f2(data2);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());
}

TEST_CASE("confounder couples within-scene features along the shared direction") {
    // correlation of the projection along u between instance pairs of the
    // same scene, versus pairs from different scenes
    SynthConfig cfg = base_config();
    cfg.confounder.a1 = 2.0;
    cfg.confounder.var_z = 1.0;
    cfg.cooccurrence_strength = 0.5;
    cfg.num_scenes = 120;
    int same_higher = 0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        cfg.seed = 1000 + s;
        const Dataset ds = generate_world(cfg);
        const auto u = confounder_direction(cfg);
        const auto means = class_means(cfg);
        auto proj = [&](const RelationshipInstance& inst) {
            double v = 0.0;
            for (int i = 0; i < cfg.feature_dim; ++i) v += (inst.feature[i] - means[inst.relation_label][i]) * u[i];
            return v;
        };
        double same_cov = 0.0, cross_cov = 0.0;
        int same_n = 0, cross_n = 0;
        for (std::size_t a = 0; a < ds.scenes.size(); ++a) {
            const auto& insts = ds.scenes[a].instances;
            for (std::size_t i = 0; i + 1 < insts.size(); ++i) {
                same_cov += proj(insts[i]) * proj(insts[i + 1]);
                ++same_n;
            }
            const auto& next = ds.scenes[(a + 1) % ds.scenes.size()].instances;
            cross_cov += proj(insts[0]) * proj(next[0]);
            ++cross_n;
        }
        if (same_cov / same_n > cross_cov / cross_n) ++same_higher;
    }
    CHECK(same_higher >= 45);  // overwhelming majority across seeds
}

TEST_CASE("explicit class weights override the zipf law") {
    SynthConfig cfg = base_config();
    cfg.num_relation_classes = 3;
    cfg.class_weights = {100.0, 10.0, 1.0};
    const auto p = class_priors(cfg);
    CHECK(p[0] == doctest::Approx(100.0 / 111.0));
    CHECK(p[2] == doctest::Approx(1.0 / 111.0));
    cfg.class_weights = {1.0, 2.0, 3.0};  // increasing weights violate the invariant
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
