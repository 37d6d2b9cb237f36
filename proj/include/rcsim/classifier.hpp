#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rcsim/types.hpp"

namespace rcsim {

// Linear softmax relationship classifier. Row layout is [K foreground
// classes, background] so foreground indices stay contiguous for metrics.
struct SoftmaxModel {
    int num_classes = 0;
    int dim = 0;
    std::vector<double> weights;  // row-major num_classes x dim
    std::vector<double> bias;
    std::int64_t step_count = 0;

    static SoftmaxModel zeros(int num_classes, int dim) {
        SoftmaxModel m;
        m.num_classes = num_classes;
        m.dim = dim;
        m.weights.assign(static_cast<std::size_t>(num_classes) * dim, 0.0);
        m.bias.assign(num_classes, 0.0);
        return m;
    }

    double& w(int k, int i) { return weights[static_cast<std::size_t>(k) * dim + i]; }
    double w(int k, int i) const { return weights[static_cast<std::size_t>(k) * dim + i]; }
};

struct Gradients {
    std::vector<double> weights;
    std::vector<double> bias;
};

struct LossResult {
    std::vector<double> per_instance;
    double mean = 0.0;
};

// Max-shift stabilized softmax; rows sum to 1 within 1e-12 and stay positive.
std::vector<double> forward_probs(const SoftmaxModel& model, const std::vector<double>& feature);
std::vector<std::vector<double>> forward(const SoftmaxModel& model, const std::vector<RelationshipInstance>& batch);

LossResult cross_entropy(const std::vector<std::vector<double>>& probs, const std::vector<int>& labels);

// Analytic softmax cross-entropy gradient, mean-reduced over the batch.
Gradients gradient(const SoftmaxModel& model, const std::vector<RelationshipInstance>& batch);

void sgd_step(SoftmaxModel& model, const Gradients& grads, double learning_rate);

// Mean cross-entropy over the batch with instances of class q removed.
double loss_excluding_class(const SoftmaxModel& model, const std::vector<RelationshipInstance>& batch, int excluded_class);

void save_checkpoint(const SoftmaxModel& model, const std::string& path, const std::string& config_hash);
SoftmaxModel load_checkpoint(const std::string& path, std::string* config_hash = nullptr);

}  // namespace rcsim
