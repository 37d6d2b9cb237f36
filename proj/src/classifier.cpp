#include "rcsim/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace rcsim {

std::vector<double> forward_probs(const SoftmaxModel& model, const std::vector<double>& feature) {
    if (static_cast<int>(feature.size()) != model.dim) throw DataError("feature dimension mismatch");
    std::vector<double> logits(model.num_classes);
    for (int k = 0; k < model.num_classes; ++k) {
        double z = model.bias[k];
        const double* row = model.weights.data() + static_cast<std::size_t>(k) * model.dim;
        for (int i = 0; i < model.dim; ++i) z += row[i] * feature[i];
        logits[k] = z;
    }
    const double shift = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (auto& z : logits) {
        z = std::exp(z - shift);
        sum += z;
    }
    for (auto& z : logits) z /= sum;
    return logits;
}

std::vector<std::vector<double>> forward(const SoftmaxModel& model, const std::vector<RelationshipInstance>& batch) {
    std::vector<std::vector<double>> probs;
    probs.reserve(batch.size());
    for (const auto& inst : batch) probs.push_back(forward_probs(model, inst.feature));
    return probs;
}

LossResult cross_entropy(const std::vector<std::vector<double>>& probs, const std::vector<int>& labels) {
    if (probs.size() != labels.size()) throw DataError("probs/labels size mismatch");
    LossResult out;
    out.per_instance.reserve(probs.size());
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const int y = labels[i];
        if (y < 0 || y >= static_cast<int>(probs[i].size())) throw DataError("label out of range");
        const double loss = -std::log(probs[i][y]);
        out.per_instance.push_back(loss);
        total += loss;
    }
    out.mean = probs.empty() ? 0.0 : total / static_cast<double>(probs.size());
    return out;
}

Gradients gradient(const SoftmaxModel& model, const std::vector<RelationshipInstance>& batch) {
    if (batch.empty()) throw DataError("gradient of an empty batch");
    Gradients g;
    g.weights.assign(model.weights.size(), 0.0);
    g.bias.assign(model.bias.size(), 0.0);
    for (const auto& inst : batch) {
        const auto p = forward_probs(model, inst.feature);
        for (int k = 0; k < model.num_classes; ++k) {
            const double err = p[k] - (k == inst.relation_label ? 1.0 : 0.0);
            g.bias[k] += err;
            double* row = g.weights.data() + static_cast<std::size_t>(k) * model.dim;
            for (int i = 0; i < model.dim; ++i) row[i] += err * inst.feature[i];
        }
    }
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (auto& v : g.weights) v *= inv_n;
    for (auto& v : g.bias) v *= inv_n;
    return g;
}

void sgd_step(SoftmaxModel& model, const Gradients& grads, double learning_rate) {
    for (std::size_t i = 0; i < model.weights.size(); ++i) model.weights[i] -= learning_rate * grads.weights[i];
    for (std::size_t i = 0; i < model.bias.size(); ++i) model.bias[i] -= learning_rate * grads.bias[i];
    ++model.step_count;
}

double loss_excluding_class(const SoftmaxModel& model, const std::vector<RelationshipInstance>& batch, int excluded_class) {
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& inst : batch) {
        if (inst.relation_label == excluded_class) continue;
        const auto p = forward_probs(model, inst.feature);
        total += -std::log(p[inst.relation_label]);
        ++n;
    }
    if (n == 0) throw DataError("all batch instances excluded");
    return total / static_cast<double>(n);
}

void save_checkpoint(const SoftmaxModel& model, const std::string& path, const std::string& config_hash) {
    nlohmann::json j{{"num_classes", model.num_classes},
                     {"dim", model.dim},
                     {"weights", model.weights},
                     {"bias", model.bias},
                     {"step_count", model.step_count},
                     {"config_hash", config_hash}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out << j.dump(2) << "\n";
}

SoftmaxModel load_checkpoint(const std::string& path, std::string* config_hash) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read checkpoint: " + path);
    const auto j = nlohmann::json::parse(in);
    SoftmaxModel m;
    m.num_classes = j.at("num_classes").get<int>();
    m.dim = j.at("dim").get<int>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<std::vector<double>>();
    m.step_count = j.at("step_count").get<std::int64_t>();
    if (config_hash) *config_hash = j.value("config_hash", "");
    return m;
}

}  // namespace rcsim
