#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "rcsim/harness.hpp"
#include "rcsim/stats.hpp"
#include "rcsim/synthworld.hpp"

namespace rcsim {

namespace {

std::vector<RelationshipInstance> flatten(const Dataset& ds) {
    std::vector<RelationshipInstance> all;
    all.reserve(ds.num_instances());
    for (const auto& s : ds.scenes)
        for (const auto& inst : s.instances) all.push_back(inst);
    return all;
}

int foreground_argmax(const SoftmaxModel& model, const std::vector<double>& feature, int num_fg) {
    const auto p = forward_probs(model, feature);
    int best = 0;
    for (int c = 1; c < num_fg; ++c)
        if (p[c] > p[best]) best = c;
    return best;
}

// Balanced, well-separated 3-class world for the optimality checks; the
// confounder is off so the oracle covariance is isotropic.
SynthConfig theorem_world(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.num_relation_classes = 3;
    cfg.num_object_classes = 4;
    cfg.feature_dim = 8;
    cfg.zipf_exponent = 0.0;
    cfg.pair_zipf_exponent = 1.0;
    cfg.cooccurrence_strength = 0.0;
    cfg.num_scenes = 500;
    cfg.relations_per_scene_min = 6;
    cfg.relations_per_scene_max = 6;
    cfg.background_fraction = 0.0;
    cfg.class_mean_separation = 3.0;
    cfg.class_noise_std = 1.5;
    cfg.confounder.a1 = 0.0;
    cfg.confounder.var_z = 0.0;
    cfg.seed = seed;
    return cfg;
}

double bayes_agreement(const SoftmaxModel& model, const Dataset& ds) {
    const GaussianBayes oracle = GaussianBayes::from_config(ds.config, /*balanced_priors=*/true);
    std::size_t agree = 0, total = 0;
    for (const auto& s : ds.scenes) {
        for (const auto& inst : s.instances) {
            const int pred = foreground_argmax(model, inst.feature, ds.config.num_relation_classes);
            agree += pred == oracle.predict(inst.feature) ? 1 : 0;
            ++total;
        }
    }
    return total ? static_cast<double>(agree) / static_cast<double>(total) : 0.0;
}

SoftmaxModel fit_batches(const Dataset& ds, const std::vector<std::vector<RelationshipInstance>>& batches,
                         double lr, int epochs) {
    SoftmaxModel model = SoftmaxModel::zeros(ds.config.num_relation_classes + 1, ds.config.feature_dim);
    for (int e = 0; e < epochs; ++e)
        for (const auto& b : batches) sgd_step(model, gradient(model, b), lr);
    return model;
}

// Exactly class-balanced mini-batches: round-robin over per-class queues.
std::vector<std::vector<RelationshipInstance>> balanced_batches(const Dataset& ds, int per_class, Rng& rng) {
    const int K = ds.config.num_relation_classes;
    std::vector<std::vector<RelationshipInstance>> by_class(K);
    for (const auto& s : ds.scenes)
        for (const auto& inst : s.instances)
            if (inst.relation_label < K) by_class[inst.relation_label].push_back(inst);
    std::size_t min_count = by_class[0].size();
    for (auto& v : by_class) {
        rng.shuffle(v);
        min_count = std::min(min_count, v.size());
    }
    const std::size_t num_batches = min_count / per_class;
    std::vector<std::vector<RelationshipInstance>> batches(num_batches);
    for (std::size_t b = 0; b < num_batches; ++b) {
        for (int k = 0; k < K; ++k)
            for (int i = 0; i < per_class; ++i) batches[b].push_back(by_class[k][b * per_class + i]);
    }
    return batches;
}

double tail_class_recall(const SoftmaxModel& model, const Dataset& ds, int cls) {
    std::size_t hits = 0, total = 0;
    for (const auto& s : ds.scenes) {
        for (const auto& inst : s.instances) {
            if (inst.relation_label != cls) continue;
            ++total;
            hits += foreground_argmax(model, inst.feature, ds.config.num_relation_classes) == cls ? 1 : 0;
        }
    }
    return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

Verdict verify_theorem1(const ExperimentConfig& cfg) {
    const Dataset ds = generate_world(theorem_world(cfg.train.seed));
    TrainConfig tc;
    tc.learning_rate = 0.5;
    tc.epochs = 100;
    tc.batch_size = static_cast<int>(ds.num_instances());  // full batch
    tc.sampler = Sampler::Baseline;
    tc.seed = cfg.train.seed;
    const TrainResult tr = train(ds, tc);
    Verdict v;
    v.check = "theorem1";
    v.statistic = bayes_agreement(tr.model, ds);
    v.threshold = 0.95;
    v.n = static_cast<std::int64_t>(ds.num_instances());
    v.pass = v.statistic >= v.threshold;
    std::ostringstream d;
    d << "full-batch training vs analytic argmax, agreement=" << v.statistic;
    v.detail = d.str();
    return v;
}

Verdict verify_theorem2(const ExperimentConfig& cfg) {
    // balanced mini-batches reach the oracle
    const Dataset ds = generate_world(theorem_world(cfg.train.seed));
    Rng rng = Rng::stream(cfg.train.seed, "balanced_batches");
    const auto batches = balanced_batches(ds, 20, rng);
    const SoftmaxModel model = fit_batches(ds, batches, 0.5, 100);
    const double agreement = bayes_agreement(model, ds);

    // an imbalanced (100:10:1) baseline reaches strictly lower tail recall
    const int seeds = 20;
    std::int64_t wins = 0, ties = 0;
    for (int s = 0; s < seeds; ++s) {
        SynthConfig balanced_cfg = theorem_world(cfg.train.seed + 1000 + s);
        SynthConfig skew_cfg = balanced_cfg;
        skew_cfg.class_weights = {100.0, 10.0, 1.0};

        TrainConfig tc;
        tc.learning_rate = 0.5;
        tc.epochs = 60;
        tc.batch_size = 60;
        tc.sampler = Sampler::Baseline;
        tc.seed = balanced_cfg.seed;

        const Dataset bal_ds = generate_world(balanced_cfg);
        const Dataset skew_ds = generate_world(skew_cfg);
        const double bal_recall = tail_class_recall(train(bal_ds, tc).model, bal_ds, 2);
        const double skew_recall = tail_class_recall(train(skew_ds, tc).model, skew_ds, 2);
        if (bal_recall > skew_recall)
            ++wins;
        else if (bal_recall == skew_recall)
            ++ties;
    }
    const double p = sign_test_p(wins, seeds - ties);

    Verdict v;
    v.check = "theorem2";
    v.statistic = agreement;
    v.threshold = 0.95;
    v.n = seeds;
    v.pass = agreement >= 0.95 && p < 0.05;
    std::ostringstream d;
    d << "balanced-batch agreement=" << agreement << "; balanced>imbalanced tail recall wins=" << wins << "/"
      << seeds << " (sign test p=" << p << ")";
    v.detail = d.str();
    return v;
}

// The long-tailed co-occurring world used for the headline direction checks.
SynthConfig skewed_world(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.num_relation_classes = 10;
    cfg.num_object_classes = 8;
    cfg.feature_dim = 16;
    cfg.zipf_exponent = 1.0;
    cfg.pair_zipf_exponent = 1.0;
    cfg.cooccurrence_strength = 0.8;
    cfg.cluster_width = 2;
    cfg.num_scenes = 750;
    cfg.relations_per_scene_min = 24;
    cfg.relations_per_scene_max = 40;
    cfg.background_fraction = 0.7;
    cfg.class_mean_separation = 3.0;
    cfg.class_noise_std = 1.8;
    cfg.confounder.a1 = 2.0;
    cfg.confounder.a2 = 1.0;
    cfg.confounder.var_z = 1.0;
    cfg.seed = seed;
    return cfg;
}

Verdict verify_theorem3(const ExperimentConfig& cfg) {
    const int seeds = 10;
    std::vector<double> base_mr, are_mr, base_r, are_r;
    for (int s = 0; s < seeds; ++s) {
        ExperimentConfig base = headline_experiment(cfg.synth.seed, Sampler::Baseline, SamplingKernel::Mis);
        ExperimentConfig are = headline_experiment(cfg.synth.seed, Sampler::Are, SamplingKernel::Mis);
        const CellResult rb = run_cell(base, static_cast<std::uint64_t>(s));
        const CellResult ra = run_cell(are, static_cast<std::uint64_t>(s));
        base_mr.push_back(rb.masked.mean_recall_at.at(20));
        are_mr.push_back(ra.masked.mean_recall_at.at(20));
        base_r.push_back(rb.masked.recall_at.at(20));
        are_r.push_back(ra.masked.recall_at.at(20));
    }
    const double mr_gain = (mean_of(are_mr) - mean_of(base_mr)) / mean_of(base_mr);
    const double r_drop = (mean_of(base_r) - mean_of(are_r)) / mean_of(base_r);
    Verdict v;
    v.check = "theorem3";
    v.statistic = mr_gain;
    v.threshold = 0.20;
    v.n = seeds;
    v.pass = mr_gain >= 0.20 && r_drop <= 0.15;
    std::ostringstream d;
    d << "mR@20 " << mean_of(base_mr) << " -> " << mean_of(are_mr) << " (rel gain " << mr_gain << "), R@20 "
      << mean_of(base_r) << " -> " << mean_of(are_r) << " (rel drop " << r_drop << ")";
    v.detail = d.str();
    return v;
}

Verdict verify_assumption1(const ExperimentConfig& cfg) {
    Rng rng = Rng::stream(cfg.train.seed, "assumption1");
    const int trials = 1000;
    const int num_classes = 4;
    const int dim = 6;
    std::int64_t violations = 0;
    std::int64_t checked = 0;
    for (int t = 0; t < trials; ++t) {
        SoftmaxModel model = SoftmaxModel::zeros(num_classes, dim);
        for (auto& w : model.weights) w = rng.normal(0.0, 0.5);
        for (auto& b : model.bias) b = rng.normal(0.0, 0.5);
        const int n = 4 + static_cast<int>(rng.uniform_index(12));
        std::vector<RelationshipInstance> batch(n);
        for (int i = 0; i < n; ++i) {
            batch[i].instance_id = i;
            batch[i].relation_label = static_cast<int>(rng.uniform_index(num_classes));
            batch[i].feature.resize(dim);
            for (auto& x : batch[i].feature) x = rng.normal();
        }
        const auto probs = forward(model, batch);
        std::vector<int> labels(n);
        for (int i = 0; i < n; ++i) labels[i] = batch[i].relation_label;
        const auto losses = cross_entropy(probs, labels);

        const int q = batch[static_cast<std::size_t>(rng.uniform_index(n))].relation_label;
        double q_sum = 0;
        std::int64_t q_count = 0;
        for (int i = 0; i < n; ++i) {
            if (labels[i] == q) {
                q_sum += losses.per_instance[i];
                ++q_count;
            }
        }
        if (q_count == n) continue;  // exclusion would empty the batch
        const double q_mean = q_sum / static_cast<double>(q_count);
        if (std::abs(q_mean - losses.mean) <= 1e-12 * (1.0 + std::abs(losses.mean))) continue;
        ++checked;
        const double excl = loss_excluding_class(model, batch, q);
        if (excl == losses.mean) ++violations;
    }
    Verdict v;
    v.check = "assumption1";
    v.statistic = static_cast<double>(violations);
    v.threshold = 0.0;
    v.n = checked;
    v.pass = violations == 0 && checked > 0;
    std::ostringstream d;
    d << "loss_excluding_class equals batch mean in " << violations << "/" << checked
      << " batches whose excluded-class mean differs";
    v.detail = d.str();
    return v;
}

Verdict verify_assumption2(const ExperimentConfig& cfg) {
    Rng rng = Rng::stream(cfg.train.seed, "assumption2");
    const int trials = 100;
    std::int64_t mismatches = 0;
    for (int t = 0; t < trials; ++t) {
        const int num_classes = 3, dim = 5, n = 8;
        SoftmaxModel model = SoftmaxModel::zeros(num_classes, dim);
        for (auto& w : model.weights) w = rng.normal();
        auto make_batch = [&](int salt) {
            std::vector<RelationshipInstance> b(n);
            for (int i = 0; i < n; ++i) {
                b[i].instance_id = salt * 100 + i;
                b[i].relation_label = static_cast<int>(rng.uniform_index(num_classes));
                b[i].feature.resize(dim);
                for (auto& x : b[i].feature) x = rng.normal();
            }
            return b;
        };
        const auto batch = make_batch(0);
        auto other = make_batch(1);
        const Gradients g1 = gradient(model, batch);
        // mutate the other batch arbitrarily between evaluations
        for (auto& inst : other) {
            inst.relation_label = (inst.relation_label + 1) % num_classes;
            for (auto& x : inst.feature) x += rng.normal();
        }
        const Gradients g2 = gradient(model, batch);
        const bool identical =
            std::memcmp(g1.weights.data(), g2.weights.data(), g1.weights.size() * sizeof(double)) == 0 &&
            std::memcmp(g1.bias.data(), g2.bias.data(), g1.bias.size() * sizeof(double)) == 0;
        if (!identical) ++mismatches;
    }
    Verdict v;
    v.check = "assumption2";
    v.statistic = static_cast<double>(mismatches);
    v.threshold = 0.0;
    v.n = trials;
    v.pass = mismatches == 0;
    v.detail = "per-batch gradients bit-identical under mutation of other batches";
    return v;
}

Verdict verify_rho(const ExperimentConfig& cfg) {
    ConfounderConfig coupled{1.0, 1.0, 1.0, 1.0, 1.0};
    ConfounderConfig decoupled{1.0, 0.0, 1.0, 1.0, 1.0};
    Rng rng = Rng::stream(cfg.train.seed, "rho");
    const double emp_coupled = empirical_rho(coupled, 100000, rng);
    const double emp_null = empirical_rho(decoupled, 100000, rng);
    const double dev = std::max(std::abs(emp_coupled - analytic_rho(coupled)), std::abs(emp_null));
    Verdict v;
    v.check = "rho";
    v.statistic = dev;
    v.threshold = 0.05;
    v.n = 100000;
    v.pass = dev <= 0.05;
    std::ostringstream d;
    d << "analytic=" << analytic_rho(coupled) << " empirical=" << emp_coupled << "; a2=0 empirical=" << emp_null;
    v.detail = d.str();
    return v;
}

// Two contexts, two classes, 1-D features; hand-computed expectations.
// Sign rule predictor: class 0 for negative features. Per-atom errors carry
// mass 0.05 + 0.15 = 0.20; group (x=1,y=1) aggregates to [0.6,0.4] and flips,
// so grouped error mass is 0.25.
DiscreteWorld hand_world() {
    DiscreteWorld w;
    w.atoms = {{0, {-1.0}, 0, 0.30}, {0, {1.0}, 0, 0.05}, {0, {1.0}, 1, 0.10},
               {1, {1.0}, 1, 0.10}, {1, {-1.0}, 1, 0.15}, {1, {-1.0}, 0, 0.30}};
    return w;
}

DiscreteWorld noiseless_world() {
    DiscreteWorld w;
    w.atoms = {{0, {-1.0}, 0, 0.40}, {0, {1.0}, 1, 0.10}, {1, {1.0}, 1, 0.40}, {1, {-1.0}, 0, 0.10}};
    return w;
}

ProbFn sign_rule() {
    return [](const std::vector<double>& f) {
        return f[0] < 0 ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0};
    };
}

Verdict verify_sce_oe(const ExperimentConfig& cfg) {
    const double sce = sce_estimate(sign_rule(), hand_world());
    const double oe = oe_estimate(sign_rule(), hand_world());
    const double sce_perfect = sce_estimate(sign_rule(), noiseless_world());
    const double oe_perfect = oe_estimate(sign_rule(), noiseless_world());
    const double dev = std::max({std::abs(sce - 0.25), std::abs(oe - 0.20), sce_perfect, oe_perfect});
    Verdict v;
    v.check = "sce_oe";
    v.statistic = dev;
    v.threshold = 1e-9;
    v.n = static_cast<std::int64_t>(hand_world().atoms.size());
    v.pass = dev <= 1e-9 && std::abs(sce - oe) <= cfg.sce_oe_delta;
    std::ostringstream d;
    d << "SCE=" << sce << " OE=" << oe << " (hand values 0.25/0.20); perfect classifier SCE=" << sce_perfect
      << " OE=" << oe_perfect << "; |SCE-OE|<=" << cfg.sce_oe_delta;
    v.detail = d.str();
    return v;
}

Verdict verify_grad_align(const ExperimentConfig& cfg) {
    SynthConfig world = skewed_world(cfg.synth.seed);
    world.background_fraction = 0.0;
    world.num_scenes = 150;
    world.relations_per_scene_min = 10;
    world.relations_per_scene_max = 14;
    const Dataset ds = generate_world(world);
    const auto all = flatten(ds);
    const int K = world.num_relation_classes;

    std::vector<std::vector<const RelationshipInstance*>> by_class(K);
    for (const auto& inst : all) by_class[inst.relation_label].push_back(&inst);

    Rng rng = Rng::stream(cfg.train.seed, "grad_align");
    const int trials = 100;
    const int per_class = 3;
    std::int64_t wins = 0, ties = 0;
    std::vector<double> cos_bal, cos_pure;
    for (int t = 0; t < trials; ++t) {
        SoftmaxModel model = SoftmaxModel::zeros(K + 1, world.feature_dim);
        for (auto& w : model.weights) w = rng.normal(0.0, 0.1);

        std::vector<RelationshipInstance> balanced;
        for (int k = 0; k < K; ++k)
            for (int i = 0; i < per_class; ++i)
                balanced.push_back(*by_class[k][rng.uniform_index(by_class[k].size())]);

        const int pure_class = static_cast<int>(rng.uniform_index(K));
        std::vector<RelationshipInstance> pure;
        for (int i = 0; i < per_class * K; ++i)
            pure.push_back(*by_class[pure_class][rng.uniform_index(by_class[pure_class].size())]);

        const double cb = gradient_alignment(model, balanced, all);
        const double cp = gradient_alignment(model, pure, all);
        cos_bal.push_back(cb);
        cos_pure.push_back(cp);
        if (cb > cp)
            ++wins;
        else if (cb == cp)
            ++ties;
    }
    const double p = sign_test_p(wins, trials - ties);
    Verdict v;
    v.check = "grad_align";
    v.statistic = p;
    v.threshold = 0.05;
    v.n = trials;
    v.pass = p < 0.05 && mean_of(cos_bal) > mean_of(cos_pure);
    std::ostringstream d;
    d << "mean cosine balanced=" << mean_of(cos_bal) << " class-pure=" << mean_of(cos_pure) << ", wins=" << wins
      << "/" << trials << ", sign test p=" << p;
    v.detail = d.str();
    return v;
}

Verdict verify_fore_back(const ExperimentConfig& cfg) {
    // background-dominated variant of the headline world: the retention
    // budget binds only when batches carry more than pi backgrounds per
    // foreground
    auto world = [&](Sampler sampler) {
        ExperimentConfig c = headline_experiment(cfg.synth.seed, sampler, SamplingKernel::Mis);
        c.synth.background_fraction = 0.9;
        c.synth.num_scenes = 500;
        return c;
    };
    const int seeds = 10;
    std::vector<double> base_masked, base_bg, are_bg;
    for (int s = 0; s < seeds; ++s) {
        ExperimentConfig base = world(Sampler::Baseline);
        ExperimentConfig are = world(Sampler::Are);
        const CellResult rb = run_cell(base, static_cast<std::uint64_t>(s));
        const CellResult ra = run_cell(are, static_cast<std::uint64_t>(s));
        base_masked.push_back(rb.masked.mean_recall_at.at(20));
        base_bg.push_back(rb.background.mean_recall_at.at(20));
        are_bg.push_back(ra.background.mean_recall_at.at(20));
    }
    const double drop = (mean_of(base_masked) - mean_of(base_bg)) / mean_of(base_masked);
    Verdict v;
    v.check = "fore_back";
    v.statistic = drop;
    v.threshold = 0.50;
    v.n = seeds;
    v.pass = drop >= 0.50 && mean_of(are_bg) > mean_of(base_bg);
    std::ostringstream d;
    d << "baseline mR@20 masked=" << mean_of(base_masked) << " background-included=" << mean_of(base_bg)
      << " (rel drop " << drop << "); background-included mR@20 with recomposition=" << mean_of(are_bg);
    v.detail = d.str();
    return v;
}

}  // namespace

ExperimentConfig headline_experiment(std::uint64_t seed, Sampler sampler, SamplingKernel kernel) {
    ExperimentConfig cfg;
    cfg.synth = skewed_world(seed);
    cfg.queryset.selection_mode = QuerySetConfig::SelectionMode::Fraction;
    cfg.queryset.target_fraction = 0.2;
    cfg.train.sampler = sampler;
    cfg.train.are.alpha = 0.2;
    cfg.train.are.lambda = 0.01;
    cfg.train.are.pi = 3.0;
    cfg.train.are.kernel = kernel;
    cfg.train.learning_rate = 0.2;
    cfg.train.epochs = 40;
    cfg.train.batch_size = 32;
    cfg.train.seed = seed;
    cfg.eval_k_values = {20};
    return cfg;
}

const std::vector<std::string>& verify_check_names() {
    static const std::vector<std::string> names{"theorem1",    "theorem2",    "theorem3",
                                                "assumption1", "assumption2", "rho",
                                                "sce_oe",      "grad_align",  "fore_back"};
    return names;
}

Verdict run_verify_check(const ExperimentConfig& cfg, const std::string& check) {
    if (check == "theorem1") return verify_theorem1(cfg);
    if (check == "theorem2") return verify_theorem2(cfg);
    if (check == "theorem3") return verify_theorem3(cfg);
    if (check == "assumption1") return verify_assumption1(cfg);
    if (check == "assumption2") return verify_assumption2(cfg);
    if (check == "rho") return verify_rho(cfg);
    if (check == "sce_oe") return verify_sce_oe(cfg);
    if (check == "grad_align") return verify_grad_align(cfg);
    if (check == "fore_back") return verify_fore_back(cfg);
    throw ConfigError("unknown verify check: " + check);
}

}  // namespace rcsim
