#include "rcsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rcsim {

MetricsReport evaluate(const SoftmaxModel& model, const Dataset& ds, const std::vector<int>& k_values,
                       bool include_background) {
    if (ds.num_instances() == 0) throw DataError("evaluate called on an empty dataset");
    const int K = ds.config.num_relation_classes;
    const int candidates = include_background ? model.num_classes : K;

    MetricsReport report;
    report.background_included = include_background;
    report.n_scenes = static_cast<int>(ds.scenes.size());

    std::map<int, std::int64_t> class_total;
    std::map<int, std::map<int, std::int64_t>> class_hits;  // k -> class -> hits
    std::map<int, std::int64_t> micro_hits;                 // k -> hits
    std::int64_t total_fg = 0;

    struct Ranked {
        double confidence;
        std::int64_t id;
        int pred;
        int label;
    };

    for (const auto& scene : ds.scenes) {
        std::vector<Ranked> ranked;
        ranked.reserve(scene.instances.size());
        for (const auto& inst : scene.instances) {
            const auto p = forward_probs(model, inst.feature);
            int pred = 0;
            double best = p[0];
            for (int c = 1; c < candidates; ++c) {
                if (p[c] > best) {
                    best = p[c];
                    pred = c;
                }
            }
            ranked.push_back({best, inst.instance_id, pred, inst.relation_label});
        }
        std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
            if (a.confidence != b.confidence) return a.confidence > b.confidence;
            return a.id < b.id;
        });
        for (std::size_t rank = 0; rank < ranked.size(); ++rank) {
            const auto& r = ranked[rank];
            if (r.label >= K) continue;  // only foreground ground truth is recallable
            ++class_total[r.label];
            ++total_fg;
            if (r.pred != r.label) continue;
            for (int k : k_values) {
                if (rank < static_cast<std::size_t>(k)) {
                    ++micro_hits[k];
                    ++class_hits[k][r.label];
                }
            }
        }
    }
    if (total_fg == 0) throw DataError("evaluate needs at least one foreground instance");

    for (int k : k_values) {
        report.recall_at[k] = static_cast<double>(micro_hits[k]) / static_cast<double>(total_fg);
        double sum = 0.0;
        for (const auto& [cls, total] : class_total) {
            const double r = static_cast<double>(class_hits[k][cls]) / static_cast<double>(total);
            report.per_class_recall[k][cls] = r;
            sum += r;
        }
        report.mean_recall_at[k] = sum / static_cast<double>(class_total.size());
        report.mr_at[k] = 0.5 * (report.recall_at[k] + report.mean_recall_at[k]);
    }
    return report;
}

double analytic_rho(const ConfounderConfig& cc) {
    const double cov = cc.a1 * cc.a2 * cc.var_z;  // E[Z]=0, E[Z^2]=var_z
    const double var_x = cc.a1 * cc.a1 * cc.var_z + cc.var_eps1;
    const double var_y = cc.a2 * cc.a2 * cc.var_z + cc.var_eps2;
    if (var_x <= 0 || var_y <= 0) throw DataError("correlation undefined: a marginal has zero variance");
    return cov / std::sqrt(var_x * var_y);
}

double empirical_rho(const ConfounderConfig& cc, std::size_t n_samples, Rng& rng) {
    if (n_samples < 2) throw DataError("empirical_rho needs at least two samples");
    const double sz = std::sqrt(cc.var_z);
    const double s1 = std::sqrt(cc.var_eps1);
    const double s2 = std::sqrt(cc.var_eps2);
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double z = rng.normal(0.0, sz);
        const double x = cc.a1 * z + rng.normal(0.0, s1);
        const double y = cc.a2 * z + rng.normal(0.0, s2);
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    const double n = static_cast<double>(n_samples);
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double vx = sxx / n - (sx / n) * (sx / n);
    const double vy = syy / n - (sy / n) * (sy / n);
    if (vx <= 0 || vy <= 0) throw DataError("degenerate sample in empirical_rho");
    return cov / std::sqrt(vx * vy);
}

void DiscreteWorld::validate() const {
    if (atoms.empty()) throw DataError("discrete world has empty support");
    double total = 0.0;
    for (const auto& a : atoms) {
        if (a.prob <= 0) throw DataError("discrete world probabilities must be positive");
        total += a.prob;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DataError("discrete world probabilities must sum to 1");
}

ProbFn prob_fn_from(const SoftmaxModel& model) {
    return [model](const std::vector<double>& feature) { return forward_probs(model, feature); };
}

namespace {

int argmax_class(const std::vector<double>& probs) {
    return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

}  // namespace

double sce_estimate(const ProbFn& model, const DiscreteWorld& world) {
    world.validate();
    // group atoms by (context, label)
    std::map<std::pair<int, int>, std::vector<const DiscreteWorld::Atom*>> groups;
    for (const auto& atom : world.atoms) groups[{atom.x_id, atom.label}].push_back(&atom);

    double error = 0.0;
    for (const auto& [key, atoms] : groups) {
        double group_prob = 0.0;
        std::vector<double> mean_probs;
        for (const auto* atom : atoms) {
            const auto p = model(atom->feature);
            if (mean_probs.empty()) mean_probs.assign(p.size(), 0.0);
            for (std::size_t c = 0; c < p.size(); ++c) mean_probs[c] += atom->prob * p[c];
            group_prob += atom->prob;
        }
        for (auto& v : mean_probs) v /= group_prob;
        if (argmax_class(mean_probs) != key.second) error += group_prob;
    }
    return error;
}

double oe_estimate(const ProbFn& model, const DiscreteWorld& world) {
    world.validate();
    double error = 0.0;
    for (const auto& atom : world.atoms) {
        if (argmax_class(model(atom.feature)) != atom.label) error += atom.prob;
    }
    return error;
}

double gradient_alignment(const SoftmaxModel& model, const std::vector<RelationshipInstance>& batch,
                          const std::vector<RelationshipInstance>& full_data) {
    const Gradients gb = gradient(model, batch);
    const Gradients gd = gradient(model, full_data);
    double dot = 0, nb = 0, nd = 0;
    for (std::size_t i = 0; i < gb.weights.size(); ++i) {
        dot += gb.weights[i] * gd.weights[i];
        nb += gb.weights[i] * gb.weights[i];
        nd += gd.weights[i] * gd.weights[i];
    }
    for (std::size_t i = 0; i < gb.bias.size(); ++i) {
        dot += gb.bias[i] * gd.bias[i];
        nb += gb.bias[i] * gb.bias[i];
        nd += gd.bias[i] * gd.bias[i];
    }
    if (nb == 0.0 || nd == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return dot / std::sqrt(nb * nd);
}

}  // namespace rcsim
