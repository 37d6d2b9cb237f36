#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "rcsim/metrics.hpp"
#include "rcsim/rng.hpp"
#include "rcsim/synthworld.hpp"
#include "rcsim/trainer.hpp"

using namespace rcsim;
using testutil::make_instance;

namespace {

// a model that scores class c highest for feature e_c (one-hot style)
SoftmaxModel identity_model(int num_classes, double scale = 5.0) {
    SoftmaxModel m = SoftmaxModel::zeros(num_classes, num_classes);
    for (int k = 0; k < num_classes; ++k) m.w(k, k) = scale;
    return m;
}

std::vector<double> one_hot(int dim, int idx, double v = 1.0) {
    std::vector<double> x(dim, 0.0);
    x[idx] = v;
    return x;
}

}  // namespace

TEST_CASE("evaluate: correctly top-ranked instances are recalled") {
    Dataset ds;
    ds.config.num_relation_classes = 2;
    ds.config.feature_dim = 3;  // classes 0,1 + background row 2
    Scene scene;
    scene.scene_id = 0;
    scene.instances.push_back(make_instance(0, 0, 0, 0, one_hot(3, 0)));
    scene.instances.push_back(make_instance(1, 0, 0, 1, one_hot(3, 1)));
    ds.scenes.push_back(scene);

    const auto model = identity_model(3);
    const auto rep = evaluate(model, ds, {20}, false);
    CHECK(rep.recall_at.at(20) == doctest::Approx(1.0));
    CHECK(rep.mean_recall_at.at(20) == doctest::Approx(1.0));
    CHECK(rep.mr_at.at(20) == doctest::Approx(1.0));
    CHECK(rep.n_scenes == 1);
}

TEST_CASE("evaluate: per-class recalls of [1, 0] average to 0.5 and MR is the mean") {
    Dataset ds;
    ds.config.num_relation_classes = 2;
    ds.config.feature_dim = 3;
    Scene scene;
    scene.scene_id = 0;
    scene.instances.push_back(make_instance(0, 0, 0, 0, one_hot(3, 0)));   // correct
    scene.instances.push_back(make_instance(1, 0, 0, 1, one_hot(3, 0)));   // predicted as 0 -> miss
    ds.scenes.push_back(scene);

    const auto rep = evaluate(identity_model(3), ds, {20}, false);
    CHECK(rep.per_class_recall.at(20).at(0) == doctest::Approx(1.0));
    CHECK(rep.per_class_recall.at(20).at(1) == doctest::Approx(0.0));
    CHECK(rep.mean_recall_at.at(20) == doctest::Approx(0.5));
    CHECK(rep.recall_at.at(20) == doctest::Approx(0.5));
    CHECK(rep.mr_at.at(20) == doctest::Approx(0.5 * (rep.recall_at.at(20) + rep.mean_recall_at.at(20))));
    CHECK_THROWS_AS(evaluate(identity_model(3), Dataset{}, {20}, false), DataError);
}

TEST_CASE("evaluate: top-K cutoff drops low-ranked foreground") {
    // scene with 3 instances, K=2: the lowest-confidence one cannot be recalled
    Dataset ds;
    ds.config.num_relation_classes = 2;
    ds.config.feature_dim = 3;
    Scene scene;
    scene.scene_id = 0;
    scene.instances.push_back(make_instance(0, 0, 0, 0, one_hot(3, 0, 3.0)));
    scene.instances.push_back(make_instance(1, 0, 0, 0, one_hot(3, 0, 2.0)));
    scene.instances.push_back(make_instance(2, 0, 0, 0, one_hot(3, 0, 1.0)));
    ds.scenes.push_back(scene);
    const auto rep = evaluate(identity_model(3), ds, {2, 20}, false);
    CHECK(rep.recall_at.at(2) == doctest::Approx(2.0 / 3));
    CHECK(rep.recall_at.at(20) == doctest::Approx(1.0));
}

TEST_CASE("masking monotonicity: per-class recall can only drop when background competes") {
    SynthConfig cfg;
    cfg.num_relation_classes = 4;
    cfg.num_object_classes = 3;
    cfg.feature_dim = 6;
    cfg.zipf_exponent = 1.0;
    cfg.num_scenes = 60;
    cfg.relations_per_scene_min = 10;
    cfg.relations_per_scene_max = 16;
    cfg.background_fraction = 0.6;
    cfg.seed = 5;
    const Dataset ds = generate_world(cfg);

    Rng rng(6);
    for (int t = 0; t < 5; ++t) {
        SoftmaxModel model = SoftmaxModel::zeros(5, 6);
        for (auto& w : model.weights) w = rng.normal(0.0, 0.7);
        const auto masked = evaluate(model, ds, {5, 20}, false);
        const auto with_bg = evaluate(model, ds, {5, 20}, true);
        for (const auto& [k, recalls] : masked.per_class_recall) {
            for (const auto& [cls, r] : recalls) {
                CHECK(r >= with_bg.per_class_recall.at(k).at(cls) - 1e-12);
            }
        }
    }
}

TEST_CASE("mR is invariant under duplicating one class's instances; R is not") {
    Dataset ds;
    ds.config.num_relation_classes = 2;
    ds.config.feature_dim = 3;
    Scene scene;
    scene.scene_id = 0;
    // class 0: one correct instance; class 1: one correct + one wrong
    scene.instances.push_back(make_instance(0, 0, 0, 0, one_hot(3, 0)));
    scene.instances.push_back(make_instance(1, 0, 0, 1, one_hot(3, 1)));
    scene.instances.push_back(make_instance(2, 0, 0, 1, one_hot(3, 0)));
    ds.scenes.push_back(scene);

    const int big_k = 1000000;  // large enough that ranking never cuts anything
    const auto before = evaluate(identity_model(3), ds, {big_k}, false);

    Dataset dup = ds;
    for (const auto& inst : ds.scenes[0].instances) {
        if (inst.relation_label == 0) {
            auto copy = inst;
            copy.instance_id += 100;
            dup.scenes[0].instances.push_back(copy);
        }
    }
    const auto after = evaluate(identity_model(3), dup, {big_k}, false);
    CHECK(after.mean_recall_at.at(big_k) == doctest::Approx(before.mean_recall_at.at(big_k)));
    CHECK(after.recall_at.at(big_k) != doctest::Approx(before.recall_at.at(big_k)));
}

TEST_CASE("analytic rho: perfect coupling, decoupled, and the half case") {
    CHECK(analytic_rho({1.0, 1.0, 1.0, 0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(analytic_rho({1.0, 0.0, 1.0, 1.0, 1.0}) == doctest::Approx(0.0));
    CHECK(analytic_rho({1.0, 1.0, 1.0, 1.0, 1.0}) == doctest::Approx(0.5));  // Cov=1, Var=2 each
    CHECK_THROWS_AS(analytic_rho({0.0, 0.0, 0.0, 0.0, 0.0}), DataError);
}

TEST_CASE("empirical rho converges to the closed form") {
    Rng rng(13);
    const double est = empirical_rho({1.0, 1.0, 1.0, 1.0, 1.0}, 100000, rng);
    CHECK(std::abs(est - 0.5) <= 0.05);
    const double null_est = empirical_rho({1.0, 0.0, 1.0, 1.0, 1.0}, 100000, rng);
    CHECK(std::abs(null_est) <= 0.05);
    const double exact = empirical_rho({1.0, 1.0, 1.0, 0.0, 0.0}, 1000, rng);
    CHECK(exact == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(empirical_rho({1, 1, 1, 1, 1}, 1, rng), DataError);
}

namespace {

DiscreteWorld two_by_two_world() {
    DiscreteWorld w;
    w.atoms = {{0, {-1.0}, 0, 0.30}, {0, {1.0}, 0, 0.05}, {0, {1.0}, 1, 0.10},
               {1, {1.0}, 1, 0.10}, {1, {-1.0}, 1, 0.15}, {1, {-1.0}, 0, 0.30}};
    return w;
}

ProbFn sign_rule() {
    return [](const std::vector<double>& f) {
        return f[0] < 0 ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0};
    };
}

}  // namespace

TEST_CASE("SCE and OE match the hand-computed 2x2 world") {
    // per-atom errors: 0.05 + 0.15 = 0.20; the (x=1, y=1) group mean
    // [0.6, 0.4] flips to class 0, so grouped error mass is 0.25
    CHECK(sce_estimate(sign_rule(), two_by_two_world()) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(oe_estimate(sign_rule(), two_by_two_world()) == doctest::Approx(0.20).epsilon(1e-12));
}

TEST_CASE("a perfect classifier scores zero on both error decompositions") {
    DiscreteWorld w;
    w.atoms = {{0, {-1.0}, 0, 0.40}, {0, {1.0}, 1, 0.10}, {1, {1.0}, 1, 0.40}, {1, {-1.0}, 0, 0.10}};
    CHECK(sce_estimate(sign_rule(), w) == doctest::Approx(0.0));
    CHECK(oe_estimate(sign_rule(), w) == doctest::Approx(0.0));
}

TEST_CASE("SCE/OE are exact: permuted enumeration order matches to 1e-12") {
    auto w = two_by_two_world();
    auto permuted = w;
    std::swap(permuted.atoms[0], permuted.atoms[4]);
    std::swap(permuted.atoms[1], permuted.atoms[3]);
    CHECK(sce_estimate(sign_rule(), permuted) == doctest::Approx(sce_estimate(sign_rule(), w)).epsilon(1e-12));
    CHECK(oe_estimate(sign_rule(), permuted) == doctest::Approx(oe_estimate(sign_rule(), w)).epsilon(1e-12));
}

TEST_CASE("bayes-style predictor dominates the always-majority rule on SCE") {
    // majority class is 0; the bayes-style rule reads the feature
    auto majority = [](const std::vector<double>&) { return std::vector<double>{1.0, 0.0}; };
    const auto w = two_by_two_world();
    CHECK(sce_estimate(sign_rule(), w) <= sce_estimate(majority, w));
    CHECK(oe_estimate(sign_rule(), w) <= oe_estimate(majority, w));
}

TEST_CASE("world validation rejects bad supports") {
    DiscreteWorld w;
    CHECK_THROWS_AS(sce_estimate(sign_rule(), w), DataError);
    w.atoms = {{0, {1.0}, 0, 0.5}};
    CHECK_THROWS_AS(sce_estimate(sign_rule(), w), DataError);  // mass != 1
}

TEST_CASE("gradient alignment: identical data gives 1, opposite labels flip the sign") {
    Rng rng(14);
    SoftmaxModel model = SoftmaxModel::zeros(2, 2);
    for (auto& w : model.weights) w = rng.normal();
    std::vector<RelationshipInstance> data;
    for (int i = 0; i < 10; ++i)
        data.push_back(make_instance(i, 0, 0, static_cast<int>(rng.uniform_index(2)), {rng.normal(), rng.normal()}));

    CHECK(gradient_alignment(model, data, data) == doctest::Approx(1.0).epsilon(1e-12));

    // an adversarial batch whose gradient is the exact negation: swap the two
    // labels in a two-class symmetric construction
    SoftmaxModel sym = SoftmaxModel::zeros(2, 1);
    std::vector<RelationshipInstance> fwd{make_instance(0, 0, 0, 0, {1.0}), make_instance(1, 0, 0, 1, {-1.0})};
    std::vector<RelationshipInstance> rev{make_instance(0, 0, 0, 1, {1.0}), make_instance(1, 0, 0, 0, {-1.0})};
    CHECK(gradient_alignment(sym, rev, fwd) == doctest::Approx(-1.0).epsilon(1e-9));

    // zero gradient reports the NaN sentinel
    SoftmaxModel confident = SoftmaxModel::zeros(2, 1);
    confident.w(0, 0) = 500.0;
    confident.w(1, 0) = -500.0;
    std::vector<RelationshipInstance> easy{make_instance(0, 0, 0, 0, {1.0})};
    CHECK(std::isnan(gradient_alignment(confident, easy, easy)));
}

TEST_CASE("balanced batches align better with the full-data gradient than class-pure ones") {
    SynthConfig cfg;
    cfg.num_relation_classes = 5;
    cfg.num_object_classes = 3;
    cfg.feature_dim = 8;
    cfg.zipf_exponent = 1.0;
    cfg.num_scenes = 100;
    cfg.relations_per_scene_min = 8;
    cfg.relations_per_scene_max = 12;
    cfg.background_fraction = 0.0;
    cfg.seed = 21;
    const Dataset ds = generate_world(cfg);
    std::vector<RelationshipInstance> all;
    for (const auto& s : ds.scenes)
        for (const auto& inst : s.instances) all.push_back(inst);
    std::vector<std::vector<const RelationshipInstance*>> by_class(5);
    for (const auto& inst : all) by_class[inst.relation_label].push_back(&inst);

    Rng rng(22);
    int wins = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        SoftmaxModel model = SoftmaxModel::zeros(6, 8);
        for (auto& w : model.weights) w = rng.normal(0.0, 0.1);
        std::vector<RelationshipInstance> balanced, pure;
        for (int k = 0; k < 5; ++k)
            for (int i = 0; i < 3; ++i)
                balanced.push_back(*by_class[k][rng.uniform_index(by_class[k].size())]);
        const int cls = static_cast<int>(rng.uniform_index(5));
        for (int i = 0; i < 15; ++i) pure.push_back(*by_class[cls][rng.uniform_index(by_class[cls].size())]);
        if (gradient_alignment(model, balanced, all) > gradient_alignment(model, pure, all)) ++wins;
    }
    CHECK(wins > trials / 2);
}
