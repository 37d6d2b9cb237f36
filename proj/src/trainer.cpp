#include "rcsim/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "rcsim/rng.hpp"

namespace rcsim {

Sampler parse_sampler(const std::string& tag) {
    if (tag == "baseline") return Sampler::Baseline;
    if (tag == "are") return Sampler::Are;
    throw ConfigError("unknown sampler tag: " + tag);
}

std::string sampler_tag(Sampler s) { return s == Sampler::Baseline ? "baseline" : "are"; }

void TrainConfig::validate(const Dataset& ds) const {
    if (learning_rate <= 0) throw ConfigError("learning_rate must be positive");
    if (epochs < 1) throw ConfigError("epochs must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be positive");
    if (static_cast<std::size_t>(batch_size) > ds.num_instances())
        throw ConfigError("batch_size exceeds the dataset instance count");
    if (sampler == Sampler::Are) {
        are.validate();
        queryset.validate(ds.config.num_relation_classes);
    }
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
    cfg.validate(ds);
    const int K = ds.config.num_relation_classes;
    const int num_classes = K + 1;

    TrainResult result;
    result.model = SoftmaxModel::zeros(num_classes, ds.config.feature_dim);
    SoftmaxModel& model = result.model;

    Rng shuffle_rng = Rng::stream(cfg.seed, "shuffle");
    Rng sampling_rng = Rng::stream(cfg.seed, "sampling");

    std::optional<QuerySet> qs;
    std::optional<ClassLossTracker> tracker;
    if (cfg.sampler == Sampler::Are) {
        qs.emplace(QuerySet::build(ds, cfg.queryset));
        const double loss_init = cfg.are.loss_init.value_or(std::log(static_cast<double>(num_classes)));
        tracker.emplace(qs->classes(), loss_init);
    }

    std::vector<std::size_t> scene_order(ds.scenes.size());
    for (std::size_t i = 0; i < scene_order.size(); ++i) scene_order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(scene_order);
        std::vector<RelationshipInstance> stream;
        stream.reserve(ds.num_instances());
        for (auto si : scene_order)
            for (const auto& inst : ds.scenes[si].instances) stream.push_back(inst);

        double epoch_loss_sum = 0.0;
        std::size_t epoch_loss_count = 0;
        int batch_index = 0;
        for (std::size_t start = 0; start < stream.size(); start += cfg.batch_size, ++batch_index) {
            const std::size_t end = std::min(stream.size(), start + cfg.batch_size);
            std::vector<RelationshipInstance> base(stream.begin() + start, stream.begin() + end);

            std::vector<RelationshipInstance> batch;
            BatchStats stats;
            stats.epoch = epoch;
            stats.batch = batch_index;
            if (cfg.sampler == Sampler::Are) {
                std::int64_t fg = 0;
                for (const auto& inst : base)
                    if (inst.relation_label != K) ++fg;
                const SamplingPlan plan = make_plan(*tracker, cfg.are, *qs, fg);
                AssembledBatch assembled =
                    assemble_batch(base, plan, *qs, cfg.are.kernel, K, sampling_rng, &model);
                for (std::size_t i = 0; i < assembled.provenance.size(); ++i) {
                    switch (assembled.provenance[i]) {
                        case Provenance::Original: ++stats.original_fg; break;
                        case Provenance::RetainedBackground: ++stats.retained_bg; break;
                        case Provenance::Added: ++stats.added; break;
                    }
                }
                result.history.plans.push_back({epoch, batch_index, plan});
                batch = std::move(assembled.instances);
            } else {
                batch = std::move(base);
                for (const auto& inst : batch) {
                    if (inst.relation_label == K)
                        ++stats.retained_bg;
                    else
                        ++stats.original_fg;
                }
            }

            if (batch.empty()) {  // a zero-budget plan can empty an all-background batch
                stats.mean_loss = 0.0;
                stats.size = 0;
                result.history.batches.push_back(stats);
                continue;
            }
            const auto probs = forward(model, batch);
            std::vector<int> labels(batch.size());
            for (std::size_t i = 0; i < batch.size(); ++i) labels[i] = batch[i].relation_label;
            const LossResult losses = cross_entropy(probs, labels);

            const Gradients grads = gradient(model, batch);
            sgd_step(model, grads, cfg.learning_rate);

            if (tracker) {
                std::vector<std::pair<int, double>> eval;
                eval.reserve(batch.size());
                for (std::size_t i = 0; i < batch.size(); ++i)
                    eval.emplace_back(labels[i], losses.per_instance[i]);
                tracker->update(eval);
            }

            stats.mean_loss = losses.mean;
            stats.size = batch.size();
            result.history.batches.push_back(stats);
            for (double l : losses.per_instance) epoch_loss_sum += l;
            epoch_loss_count += losses.per_instance.size();
        }

        EpochStats es;
        es.epoch = epoch;
        es.mean_loss = epoch_loss_count ? epoch_loss_sum / static_cast<double>(epoch_loss_count) : 0.0;
        std::size_t correct = 0;
        std::size_t total = 0;
        for (const auto& scene : ds.scenes) {
            for (const auto& inst : scene.instances) {
                const auto p = forward_probs(model, inst.feature);
                const int pred = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
                correct += pred == inst.relation_label ? 1 : 0;
                ++total;
            }
        }
        es.train_accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
        result.history.epochs.push_back(es);
    }
    return result;
}

}  // namespace rcsim
