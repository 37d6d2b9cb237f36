#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "rcsim/classifier.hpp"
#include "rcsim/rng.hpp"
#include "rcsim/trainer.hpp"

using namespace rcsim;
using testutil::make_instance;

namespace {

std::vector<RelationshipInstance> random_batch(Rng& rng, int n, int num_classes, int dim) {
    std::vector<RelationshipInstance> batch(n);
    for (int i = 0; i < n; ++i) {
        batch[i].instance_id = i;
        batch[i].relation_label = static_cast<int>(rng.uniform_index(num_classes));
        batch[i].feature.resize(dim);
        for (auto& x : batch[i].feature) x = rng.normal();
    }
    return batch;
}

SoftmaxModel random_model(Rng& rng, int num_classes, int dim) {
    SoftmaxModel m = SoftmaxModel::zeros(num_classes, dim);
    for (auto& w : m.weights) w = rng.normal();
    for (auto& b : m.bias) b = rng.normal();
    return m;
}

}  // namespace

TEST_CASE("forward: zero model gives uniform rows that sum to one") {
    const SoftmaxModel m = SoftmaxModel::zeros(4, 3);
    const auto p = forward_probs(m, {1.0, -2.0, 0.5});
    for (double v : p) CHECK(v == doctest::Approx(0.25));

    Rng rng(1);
    for (int t = 0; t < 100; ++t) {
        const auto model = random_model(rng, 5, 4);
        std::vector<double> x(4);
        for (auto& v : x) v = rng.normal(0.0, 10.0);
        const auto probs = forward_probs(model, x);
        double sum = 0;
        for (double v : probs) {
            CHECK(v > 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
    CHECK_THROWS_AS(forward_probs(m, {1.0}), DataError);
}

TEST_CASE("forward: probability of a class is monotone in its logit") {
    SoftmaxModel m = SoftmaxModel::zeros(3, 1);
    double prev = 0.0;
    for (double t : {0.0, 1.0, 5.0, 20.0, 200.0}) {
        m.bias[0] = t;
        const double p0 = forward_probs(m, {0.0})[0];
        CHECK(p0 >= prev);
        prev = p0;
    }
    CHECK(prev == doctest::Approx(1.0));
}

TEST_CASE("cross entropy: uniform, certain, and half-half cases") {
    LossResult uniform = cross_entropy({{0.25, 0.25, 0.25, 0.25}}, {2});
    CHECK(uniform.per_instance[0] == doctest::Approx(std::log(4.0)));
    LossResult certain = cross_entropy({{1.0, 0.0}}, {0});
    CHECK(certain.per_instance[0] == doctest::Approx(0.0));
    LossResult half = cross_entropy({{0.5, 0.5}}, {0});
    CHECK(half.per_instance[0] == doctest::Approx(std::log(2.0)));
    CHECK(half.mean == doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS(cross_entropy({{0.5, 0.5}}, {7}), DataError);
}

TEST_CASE("analytic gradient matches central finite differences") {
    Rng rng(7);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const auto model = random_model(rng, 4, 5);
        const auto batch = random_batch(rng, 5, 4, 5);
        const Gradients g = gradient(model, batch);
        const Gradients fd = oracle::finite_difference_gradient(model, batch);
        for (std::size_t i = 0; i < g.weights.size(); ++i) {
            const double denom = std::max(1e-8, std::abs(fd.weights[i]));
            if (std::abs(fd.weights[i]) > 1e-7)
                worst = std::max(worst, std::abs(g.weights[i] - fd.weights[i]) / denom);
        }
        for (std::size_t i = 0; i < g.bias.size(); ++i) {
            if (std::abs(fd.bias[i]) > 1e-7)
                worst = std::max(worst, std::abs(g.bias[i] - fd.bias[i]) / std::abs(fd.bias[i]));
        }
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("gradient vanishes for a confidently correct instance") {
    SoftmaxModel m = SoftmaxModel::zeros(2, 1);
    m.w(0, 0) = 30.0;
    m.w(1, 0) = -30.0;
    const auto batch = std::vector<RelationshipInstance>{make_instance(0, 0, 0, 0, {1.0})};
    const Gradients g = gradient(m, batch);
    double norm = 0.0;
    for (double v : g.weights) norm += v * v;
    for (double v : g.bias) norm += v * v;
    CHECK(std::sqrt(norm) < 1e-12);
}

TEST_CASE("duplicating every instance leaves the mean gradient unchanged") {
    Rng rng(8);
    const auto model = random_model(rng, 3, 4);
    const auto batch = random_batch(rng, 6, 3, 4);
    auto doubled = batch;
    doubled.insert(doubled.end(), batch.begin(), batch.end());
    const Gradients g1 = gradient(model, batch);
    const Gradients g2 = gradient(model, doubled);
    for (std::size_t i = 0; i < g1.weights.size(); ++i)
        CHECK(g1.weights[i] == doctest::Approx(g2.weights[i]).epsilon(1e-12));
}

TEST_CASE("sgd step: zero rate, exact update, two half steps on frozen grads") {
    Rng rng(9);
    auto model = random_model(rng, 3, 2);
    const auto before = model.weights;
    Gradients g;
    g.weights.assign(model.weights.size(), 0.25);
    g.bias.assign(model.bias.size(), -0.5);

    sgd_step(model, g, 0.0);
    CHECK(model.weights == before);
    CHECK(model.step_count == 1);

    auto a = model;
    sgd_step(a, g, 1.0);
    CHECK(a.weights[0] == doctest::Approx(model.weights[0] - 0.25));
    CHECK(a.bias[0] == doctest::Approx(model.bias[0] + 0.5));

    auto b = model;
    sgd_step(b, g, 0.5);
    sgd_step(b, g, 0.5);
    for (std::size_t i = 0; i < a.weights.size(); ++i)
        CHECK(a.weights[i] == doctest::Approx(b.weights[i]).epsilon(1e-15));
}

TEST_CASE("loss excluding a class: arithmetic and edge cases") {
    // two instances with controlled losses via a fixed model
    SoftmaxModel m = SoftmaxModel::zeros(2, 1);
    std::vector<RelationshipInstance> batch{make_instance(0, 0, 0, 0, {0.0}),
                                            make_instance(1, 0, 0, 1, {0.0})};
    // uniform probs -> each instance losses ln 2
    CHECK(loss_excluding_class(m, batch, 1) == doctest::Approx(std::log(2.0)));

    // excluding an absent class equals the full mean
    const auto probs = forward(m, batch);
    const auto full = cross_entropy(probs, {0, 1});
    CHECK(loss_excluding_class(m, batch, /*absent*/ 5) == doctest::Approx(full.mean));

    // excluding everything is an error
    std::vector<RelationshipInstance> mono{make_instance(0, 0, 0, 0, {0.0})};
    CHECK_THROWS_AS(loss_excluding_class(m, mono, 0), DataError);

    // random batches: equals a brute-force recount over retained instances
    Rng rng(10);
    for (int t = 0; t < 50; ++t) {
        const auto model = random_model(rng, 4, 3);
        const auto rb = random_batch(rng, 9, 4, 3);
        const int q = static_cast<int>(rng.uniform_index(4));
        double sum = 0;
        int n = 0;
        for (const auto& inst : rb) {
            if (inst.relation_label == q) continue;
            sum += -std::log(forward_probs(model, inst.feature)[inst.relation_label]);
            ++n;
        }
        if (n == 0) continue;
        CHECK(loss_excluding_class(model, rb, q) == doctest::Approx(sum / n).epsilon(1e-12));
    }
}

TEST_CASE("repeated small steps on a fixed batch do not increase the loss") {
    Rng rng(11);
    auto model = random_model(rng, 3, 4);
    const auto batch = random_batch(rng, 12, 3, 4);
    int nonincreasing = 0;
    const int steps = 200;
    double prev = cross_entropy(forward(model, batch), [&] {
                      std::vector<int> l(batch.size());
                      for (std::size_t i = 0; i < batch.size(); ++i) l[i] = batch[i].relation_label;
                      return l;
                  }()).mean;
    for (int s = 0; s < steps; ++s) {
        sgd_step(model, gradient(model, batch), 0.05);
        std::vector<int> labels(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) labels[i] = batch[i].relation_label;
        const double loss = cross_entropy(forward(model, batch), labels).mean;
        if (loss <= prev + 1e-12) ++nonincreasing;
        prev = loss;
    }
    CHECK(nonincreasing >= static_cast<int>(0.95 * steps));
}

TEST_CASE("checkpoints round-trip weights exactly") {
    Rng rng(12);
    const auto model = random_model(rng, 4, 6);
    const auto path = (std::filesystem::temp_directory_path() / "rcsim_ckpt.json").string();
    save_checkpoint(model, path, "cafebabe");
    std::string hash;
    const auto back = load_checkpoint(path, &hash);
    CHECK(hash == "cafebabe");
    CHECK(back.weights == model.weights);
    CHECK(back.bias == model.bias);
    CHECK(back.step_count == model.step_count);
}
