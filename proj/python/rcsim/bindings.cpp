#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rcsim/are.hpp"
#include "rcsim/classifier.hpp"
#include "rcsim/harness.hpp"
#include "rcsim/metrics.hpp"
#include "rcsim/mis.hpp"
#include "rcsim/queryset.hpp"
#include "rcsim/rng.hpp"
#include "rcsim/synthworld.hpp"
#include "rcsim/trainer.hpp"

namespace py = pybind11;
using namespace rcsim;

PYBIND11_MODULE(_core, m) {
    m.doc() = "synthetic scene-graph world, batch recomposition sampling and softmax training";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DataError>(m, "DataError");

    py::enum_<SamplingKernel>(m, "SamplingKernel")
        .value("RANDOM", SamplingKernel::Random)
        .value("MIS", SamplingKernel::Mis)
        .value("MAX_MI", SamplingKernel::MaxMi)
        .value("LEAST_CONFIDENCE", SamplingKernel::LeastConfidence)
        .value("MAX_ENTROPY", SamplingKernel::MaxEntropy)
        .value("MARGIN", SamplingKernel::Margin);
    m.def("parse_kernel", &parse_kernel);
    m.def("kernel_tag", &kernel_tag);

    py::enum_<Sampler>(m, "Sampler").value("BASELINE", Sampler::Baseline).value("ARE", Sampler::Are);

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>())
        .def_static("stream", [](std::uint64_t root, const std::string& name) { return Rng::stream(root, name); })
        .def("uniform", &Rng::uniform)
        .def("normal", py::overload_cast<>(&Rng::normal));

    py::class_<ConfounderConfig>(m, "ConfounderConfig")
        .def(py::init<>())
        .def_readwrite("a1", &ConfounderConfig::a1)
        .def_readwrite("a2", &ConfounderConfig::a2)
        .def_readwrite("var_z", &ConfounderConfig::var_z)
        .def_readwrite("var_eps1", &ConfounderConfig::var_eps1)
        .def_readwrite("var_eps2", &ConfounderConfig::var_eps2);

    py::class_<SynthConfig>(m, "SynthConfig")
        .def(py::init<>())
        .def_readwrite("num_relation_classes", &SynthConfig::num_relation_classes)
        .def_readwrite("num_object_classes", &SynthConfig::num_object_classes)
        .def_readwrite("feature_dim", &SynthConfig::feature_dim)
        .def_readwrite("zipf_exponent", &SynthConfig::zipf_exponent)
        .def_readwrite("class_weights", &SynthConfig::class_weights)
        .def_readwrite("pair_zipf_exponent", &SynthConfig::pair_zipf_exponent)
        .def_readwrite("cooccurrence_strength", &SynthConfig::cooccurrence_strength)
        .def_readwrite("cluster_width", &SynthConfig::cluster_width)
        .def_readwrite("confounder", &SynthConfig::confounder)
        .def_readwrite("num_scenes", &SynthConfig::num_scenes)
        .def_readwrite("relations_per_scene_min", &SynthConfig::relations_per_scene_min)
        .def_readwrite("relations_per_scene_max", &SynthConfig::relations_per_scene_max)
        .def_readwrite("background_fraction", &SynthConfig::background_fraction)
        .def_readwrite("class_mean_separation", &SynthConfig::class_mean_separation)
        .def_readwrite("class_noise_std", &SynthConfig::class_noise_std)
        .def_readwrite("seed", &SynthConfig::seed)
        .def_readwrite("sample_seed", &SynthConfig::sample_seed)
        .def_property_readonly("background_label", &SynthConfig::background_label);

    py::class_<RelationshipInstance>(m, "RelationshipInstance")
        .def(py::init<>())
        .def_readwrite("instance_id", &RelationshipInstance::instance_id)
        .def_readwrite("scene_id", &RelationshipInstance::scene_id)
        .def_readwrite("subject_class", &RelationshipInstance::subject_class)
        .def_readwrite("object_class", &RelationshipInstance::object_class)
        .def_readwrite("relation_label", &RelationshipInstance::relation_label)
        .def_readwrite("feature", &RelationshipInstance::feature);

    py::class_<Scene>(m, "Scene")
        .def_readonly("scene_id", &Scene::scene_id)
        .def_readonly("cluster_id", &Scene::cluster_id)
        .def_readonly("instances", &Scene::instances);

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("scenes", &Dataset::scenes)
        .def_readonly("config", &Dataset::config)
        .def("num_instances", &Dataset::num_instances)
        .def("num_foreground", &Dataset::num_foreground);

    m.def("generate_world", &generate_world);
    m.def("relation_histogram", &relation_histogram);
    m.def("cooccurrence_matrix", &cooccurrence_matrix);
    m.def("bayes_optimal_predict", &bayes_optimal_predict, py::arg("cfg"), py::arg("feature"),
          py::arg("balanced_priors") = false);
    m.def("class_priors", &class_priors);
    m.def("save_dataset", &save_dataset);
    m.def("load_dataset", &load_dataset);

    py::class_<QuerySetConfig> qsc(m, "QuerySetConfig");
    py::enum_<QuerySetConfig::SelectionMode>(qsc, "SelectionMode")
        .value("EXPLICIT_K", QuerySetConfig::SelectionMode::ExplicitK)
        .value("FRACTION", QuerySetConfig::SelectionMode::Fraction);
    qsc.def(py::init<>())
        .def_readwrite("selection_mode", &QuerySetConfig::selection_mode)
        .def_readwrite("k_prime", &QuerySetConfig::k_prime)
        .def_readwrite("target_fraction", &QuerySetConfig::target_fraction);

    py::class_<QuerySet>(m, "QuerySet")
        .def_static("build", &QuerySet::build)
        .def_property_readonly("classes", &QuerySet::classes)
        .def("pool_size", &QuerySet::pool_size)
        .def("source_size", &QuerySet::source_size)
        .def("draw", &QuerySet::draw, py::arg("cls"), py::arg("n"), py::arg("kernel"), py::arg("rng"),
             py::arg("model") = nullptr)
        .def("replenish", &QuerySet::replenish)
        .def("consumed", &QuerySet::consumed)
        .def("dump_state", [](const QuerySet& qs) { return qs.dump_state().dump(); });

    py::class_<AreConfig>(m, "AreConfig")
        .def(py::init<>())
        .def_readwrite("alpha", &AreConfig::alpha)
        .def_readwrite("lambda_", &AreConfig::lambda)
        .def_readwrite("pi", &AreConfig::pi)
        .def_readwrite("kernel", &AreConfig::kernel)
        .def_readwrite("loss_init", &AreConfig::loss_init);

    py::class_<ClassLossTracker>(m, "ClassLossTracker")
        .def(py::init<const std::vector<int>&, double>())
        .def("update", &ClassLossTracker::update)
        .def_property_readonly("losses", &ClassLossTracker::losses)
        .def("observed", &ClassLossTracker::observed);

    m.def("query_distribution", &query_distribution);
    m.def("sampling_sizes", &sampling_sizes);
    m.def("background_budget", &background_budget);

    py::class_<PairPool>(m, "PairPool")
        .def_static("from_instances", &PairPool::from_instances)
        .def_readonly("instances", &PairPool::instances)
        .def_readonly("pair_counts", &PairPool::pair_counts);

    m.def("pair_entropy", py::overload_cast<const PairPool&>(&pair_entropy));
    m.def("conditional_entropy",
          py::overload_cast<const PairPool&, const std::vector<RelationshipInstance>&>(&conditional_entropy));
    m.def("mutual_information",
          py::overload_cast<const PairPool&, const std::vector<RelationshipInstance>&>(&mutual_information));
    m.def("delta_information",
          py::overload_cast<const PairPool&, const std::vector<RelationshipInstance>&, const ObjectPair&>(
              &delta_information));
    m.def("unique_pair_sample", &unique_pair_sample);
    m.def("max_mi_sample", &max_mi_sample);

    py::class_<SoftmaxModel>(m, "SoftmaxModel")
        .def_static("zeros", &SoftmaxModel::zeros)
        .def_readwrite("num_classes", &SoftmaxModel::num_classes)
        .def_readwrite("dim", &SoftmaxModel::dim)
        .def_readwrite("weights", &SoftmaxModel::weights)
        .def_readwrite("bias", &SoftmaxModel::bias)
        .def_readonly("step_count", &SoftmaxModel::step_count);

    m.def("forward_probs", &forward_probs);
    m.def("gradient_alignment", &gradient_alignment);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("sampler", &TrainConfig::sampler)
        .def_readwrite("are", &TrainConfig::are)
        .def_readwrite("queryset", &TrainConfig::queryset)
        .def_readwrite("seed", &TrainConfig::seed);

    py::class_<EpochStats>(m, "EpochStats")
        .def_readonly("epoch", &EpochStats::epoch)
        .def_readonly("mean_loss", &EpochStats::mean_loss)
        .def_readonly("train_accuracy", &EpochStats::train_accuracy);

    py::class_<TrainHistory>(m, "TrainHistory").def_readonly("epochs", &TrainHistory::epochs);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("model", &TrainResult::model)
        .def_readonly("history", &TrainResult::history);

    m.def("train", &train);

    py::class_<MetricsReport>(m, "MetricsReport")
        .def_readonly("recall_at", &MetricsReport::recall_at)
        .def_readonly("mean_recall_at", &MetricsReport::mean_recall_at)
        .def_readonly("mr_at", &MetricsReport::mr_at)
        .def_readonly("per_class_recall", &MetricsReport::per_class_recall)
        .def_readonly("background_included", &MetricsReport::background_included)
        .def_readonly("n_scenes", &MetricsReport::n_scenes);

    m.def("evaluate", &evaluate);
    m.def("analytic_rho", &analytic_rho);
    m.def("empirical_rho", [](const ConfounderConfig& cc, std::size_t n, std::uint64_t seed) {
        Rng rng(seed);
        return empirical_rho(cc, n, rng);
    });
}
