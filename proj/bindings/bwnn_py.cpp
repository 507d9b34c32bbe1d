#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bwnn/experiment.hpp"
#include "bwnn/serialize.hpp"

namespace py = pybind11;
using namespace bwnn;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Natural gradient descent by bidirectional whitening: MLP training, "
              "Fisher-information estimation, PRONG/BPRONG optimizers.";

    py::register_exception<InvalidInputError>(m, "InvalidInputError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception<SingularityError>(m, "SingularityError", PyExc_RuntimeError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);
    py::register_exception<SizeError>(m, "SizeError", PyExc_ValueError);

    // linalg
    py::class_<linalg::SymEigen>(m, "SymEigen")
        .def_readonly("eigenvalues", &linalg::SymEigen::eigenvalues)
        .def_readonly("eigenvectors", &linalg::SymEigen::eigenvectors);
    py::class_<linalg::WhiteningTransform>(m, "WhiteningTransform")
        .def_readonly("forward", &linalg::WhiteningTransform::forward)
        .def_readonly("inverse", &linalg::WhiteningTransform::inverse)
        .def_readonly("epsilon", &linalg::WhiteningTransform::epsilon);
    m.def("sym_eigen", &linalg::sym_eigen, py::arg("a"));
    m.def("whitening_from_cov", &linalg::whitening_from_cov, py::arg("cov"), py::arg("epsilon"));

    // mlp
    py::enum_<mlp::Activation>(m, "Activation")
        .value("relu", mlp::Activation::relu)
        .value("sigmoid", mlp::Activation::sigmoid)
        .value("identity", mlp::Activation::identity)
        .value("softmax_output", mlp::Activation::softmax_output);
    py::class_<mlp::LayerParams>(m, "LayerParams")
        .def(py::init<>())
        .def_readwrite("weights", &mlp::LayerParams::weights)
        .def_readwrite("bias", &mlp::LayerParams::bias)
        .def_readwrite("activation", &mlp::LayerParams::activation);
    py::class_<mlp::Network>(m, "Network")
        .def(py::init<>())
        .def_readwrite("layers", &mlp::Network::layers)
        .def_property_readonly("depth", &mlp::Network::depth)
        .def_property_readonly("parameter_count", &mlp::Network::parameter_count);
    py::class_<mlp::ForwardTrace>(m, "ForwardTrace")
        .def_readonly("activations", &mlp::ForwardTrace::activations)
        .def_readonly("pre_activations", &mlp::ForwardTrace::pre_activations)
        .def_property_readonly("output",
                               [](const mlp::ForwardTrace& t) { return t.output(); });
    py::class_<mlp::BackwardTrace>(m, "BackwardTrace")
        .def_readonly("deltas", &mlp::BackwardTrace::deltas)
        .def_readonly("weight_grads", &mlp::BackwardTrace::weight_grads)
        .def_readonly("bias_grads", &mlp::BackwardTrace::bias_grads);
    m.def("init_network", &mlp::init_network, py::arg("widths"), py::arg("hidden"),
          py::arg("seed"));
    m.def("forward", &mlp::forward, py::arg("net"), py::arg("x"));
    m.def("nll_loss", &mlp::nll_loss, py::arg("output"), py::arg("labels"));
    m.def("backward", &mlp::backward, py::arg("net"), py::arg("trace"), py::arg("labels"));
    m.def("vectorize", &mlp::vectorize, py::arg("net"));
    m.def("devectorize", &mlp::devectorize, py::arg("shape_like"), py::arg("w"));
    m.def("sgd_step", &mlp::sgd_step, py::arg("net"), py::arg("grads"), py::arg("eta"));

    // fim
    py::enum_<fim::LabelMode>(m, "LabelMode")
        .value("model_sampled", fim::LabelMode::model_sampled)
        .value("empirical", fim::LabelMode::empirical);
    py::class_<fim::ExactFim>(m, "ExactFim")
        .def(py::init([](Matrix g) {
                 fim::ExactFim f;
                 f.matrix = std::move(g);
                 return f;
             }),
             py::arg("matrix"))
        .def_readwrite("matrix", &fim::ExactFim::matrix)
        .def_readonly("sample_count", &fim::ExactFim::sample_count)
        .def_readonly("label_mode", &fim::ExactFim::label_mode);
    py::class_<fim::KfacBlocks>(m, "KfacBlocks")
        .def_readonly("activation_moments", &fim::KfacBlocks::activation_moments)
        .def_readonly("delta_moments", &fim::KfacBlocks::delta_moments)
        .def_readonly("sample_count", &fim::KfacBlocks::sample_count);
    m.def("exact_fim", &fim::exact_fim, py::arg("net"), py::arg("inputs"),
          py::arg("labels") = Matrix(), py::arg("mode") = fim::LabelMode::model_sampled,
          py::arg("samples_per_input") = 1, py::arg("seed") = 0);
    m.def("kfac_blocks", &fim::kfac_blocks, py::arg("net"), py::arg("inputs"),
          py::arg("labels") = Matrix(), py::arg("mode") = fim::LabelMode::model_sampled,
          py::arg("seed") = 0);
    m.def("block_diag_fim", &fim::block_diag_fim, py::arg("blocks"));
    m.def("kronecker", &fim::kronecker, py::arg("a"), py::arg("b"));
    m.def("identity_distance", &fim::identity_distance, py::arg("g"));
    m.def("kron_identity_distance", &fim::kron_identity_distance, py::arg("a"), py::arg("b"));
    m.def("ngd_step", &fim::ngd_step, py::arg("net"), py::arg("grads"), py::arg("fim"),
          py::arg("eta"), py::arg("damping") = 1e-4);

    // whiten
    py::class_<whiten::WhitenedLayer>(m, "WhitenedLayer")
        .def(py::init<>())
        .def_readwrite("U", &whiten::WhitenedLayer::U)
        .def_readwrite("c", &whiten::WhitenedLayer::c)
        .def_readwrite("Wdag", &whiten::WhitenedLayer::Wdag)
        .def_readwrite("bdag", &whiten::WhitenedLayer::bdag)
        .def_readwrite("R", &whiten::WhitenedLayer::R)
        .def_readwrite("activation", &whiten::WhitenedLayer::activation);
    py::class_<whiten::WhitenedNetwork>(m, "WhitenedNetwork")
        .def(py::init<>())
        .def_readwrite("layers", &whiten::WhitenedNetwork::layers);
    py::class_<whiten::WhitenedForwardTrace>(m, "WhitenedForwardTrace")
        .def_readonly("activations", &whiten::WhitenedForwardTrace::activations)
        .def_readonly("whitened_inputs", &whiten::WhitenedForwardTrace::whitened_inputs)
        .def_readonly("pre_r", &whiten::WhitenedForwardTrace::pre_r)
        .def_readonly("pre_activations", &whiten::WhitenedForwardTrace::pre_activations)
        .def_property_readonly(
            "output", [](const whiten::WhitenedForwardTrace& t) { return t.output(); });
    py::class_<whiten::WhitenedBackwardTrace>(m, "WhitenedBackwardTrace")
        .def_readonly("deltas", &whiten::WhitenedBackwardTrace::deltas)
        .def_readonly("deltas_dag", &whiten::WhitenedBackwardTrace::deltas_dag)
        .def_readonly("weight_grads", &whiten::WhitenedBackwardTrace::weight_grads)
        .def_readonly("bias_grads", &whiten::WhitenedBackwardTrace::bias_grads);
    py::class_<whiten::ActivationStats>(m, "ActivationStats")
        .def_readonly("means", &whiten::ActivationStats::means)
        .def_readonly("covariances", &whiten::ActivationStats::covariances)
        .def_readonly("sample_count", &whiten::ActivationStats::sample_count);
    py::class_<whiten::DeltaStats>(m, "DeltaStats")
        .def_readonly("second_moments", &whiten::DeltaStats::second_moments)
        .def_readonly("sample_count", &whiten::DeltaStats::sample_count);
    m.def("wrap_standard", &whiten::wrap_standard, py::arg("net"));
    m.def("collapse_to_standard", &whiten::collapse_to_standard, py::arg("net"));
    m.def("forward_whitened", &whiten::forward_whitened, py::arg("net"), py::arg("x"));
    m.def("backward_whitened", &whiten::backward_whitened, py::arg("net"), py::arg("trace"),
          py::arg("labels"));
    m.def("estimate_activation_stats", &whiten::estimate_activation_stats, py::arg("net"),
          py::arg("stats_batch"));
    m.def("estimate_delta_stats", &whiten::estimate_delta_stats, py::arg("net"),
          py::arg("stats_batch"), py::arg("labels") = Matrix(),
          py::arg("mode") = fim::LabelMode::empirical, py::arg("seed") = 0);
    m.def("update_forward_whitening", &whiten::update_forward_whitening, py::arg("layer"),
          py::arg("input_mean"), py::arg("input_cov"), py::arg("epsilon"));
    m.def("update_back_whitening", &whiten::update_back_whitening, py::arg("layer"),
          py::arg("delta_moment"), py::arg("epsilon"));
    m.def(
        "forward_whitening_event",
        [](whiten::WhitenedNetwork net, const Matrix& batch, double eps) {
            whiten::forward_whitening_event(net, batch, eps);
            return net;
        },
        py::arg("net"), py::arg("stats_batch"), py::arg("epsilon"),
        "Returns an updated copy of the network.");
    m.def(
        "back_whitening_event",
        [](whiten::WhitenedNetwork net, const Matrix& batch, const Matrix& labels,
           fim::LabelMode mode, std::uint64_t seed, double eps) {
            whiten::back_whitening_event(net, batch, labels, mode, seed, eps);
            return net;
        },
        py::arg("net"), py::arg("stats_batch"), py::arg("labels") = Matrix(),
        py::arg("mode") = fim::LabelMode::empirical, py::arg("seed") = 0, py::arg("epsilon") = 1e-5,
        "Returns an updated copy of the network.");
    m.def("whitened_kfac_blocks", &whiten::whitened_kfac_blocks, py::arg("net"), py::arg("inputs"),
          py::arg("labels") = Matrix(), py::arg("mode") = fim::LabelMode::empirical,
          py::arg("seed") = 0);
    m.def("whitened_sgd_step", &whiten::sgd_step, py::arg("net"), py::arg("grads"),
          py::arg("eta"));

    // data
    py::enum_<data::Split>(m, "Split").value("train", data::Split::train).value("test",
                                                                                data::Split::test);
    py::class_<data::Dataset>(m, "Dataset")
        .def(py::init<>())
        .def_readwrite("inputs", &data::Dataset::inputs)
        .def_readwrite("labels", &data::Dataset::labels)
        .def_readwrite("name", &data::Dataset::name)
        .def_readwrite("split", &data::Dataset::split)
        .def_property_readonly("size", &data::Dataset::size)
        .def_property_readonly("dim", &data::Dataset::dim)
        .def_property_readonly("n_classes", &data::Dataset::n_classes)
        .def("head", &data::Dataset::head, py::arg("n"));
    py::class_<data::Batch>(m, "Batch")
        .def_readonly("inputs", &data::Batch::inputs)
        .def_readonly("labels", &data::Batch::labels);
    py::class_<data::BatchStream>(m, "BatchStream")
        .def(py::init<const data::Dataset&, Index, std::uint64_t>(), py::arg("dataset"),
             py::arg("batch_size"), py::arg("seed"), py::keep_alive<1, 2>())
        .def("next_epoch", &data::BatchStream::next_epoch)
        .def_property_readonly("batches_per_epoch", &data::BatchStream::batches_per_epoch)
        .def_property_readonly("epoch", &data::BatchStream::epoch);
    m.def("load_mnist_idx", &data::load_mnist_idx, py::arg("images_path"),
          py::arg("labels_path"));
    m.def(
        "make_synthetic",
        [](const std::string& task, Index n, std::uint64_t seed) {
            return data::make_synthetic(data::synthetic_task_from_name(task), n, seed);
        },
        py::arg("task"), py::arg("n"), py::arg("seed") = 0);

    // optim
    py::enum_<optim::OptimizerKind>(m, "OptimizerKind")
        .value("sgd", optim::OptimizerKind::sgd)
        .value("batchnorm", optim::OptimizerKind::batchnorm)
        .value("prong", optim::OptimizerKind::prong)
        .value("bprong", optim::OptimizerKind::bprong)
        .value("exact_ngd", optim::OptimizerKind::exact_ngd);
    py::class_<optim::ModelSpec>(m, "ModelSpec")
        .def(py::init<>())
        .def(py::init([](std::vector<Index> widths, mlp::Activation hidden) {
                 return optim::ModelSpec{std::move(widths), hidden};
             }),
             py::arg("widths"), py::arg("hidden") = mlp::Activation::relu)
        .def_readwrite("widths", &optim::ModelSpec::widths)
        .def_readwrite("hidden", &optim::ModelSpec::hidden);
    py::class_<optim::TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("optimizer", &optim::TrainConfig::optimizer)
        .def_readwrite("eta", &optim::TrainConfig::eta)
        .def_readwrite("batch_size", &optim::TrainConfig::batch_size)
        .def_readwrite("tau1", &optim::TrainConfig::tau1)
        .def_readwrite("c1", &optim::TrainConfig::c1)
        .def_readwrite("tau2", &optim::TrainConfig::tau2)
        .def_readwrite("c2", &optim::TrainConfig::c2)
        .def_readwrite("epsilon", &optim::TrainConfig::epsilon)
        .def_readwrite("stats_batch", &optim::TrainConfig::stats_batch)
        .def_readwrite("fisher_labels", &optim::TrainConfig::fisher_labels)
        .def_readwrite("seed", &optim::TrainConfig::seed)
        .def_readwrite("epochs", &optim::TrainConfig::epochs)
        .def_readwrite("damping", &optim::TrainConfig::damping)
        .def_readwrite("ngd_samples_per_input", &optim::TrainConfig::ngd_samples_per_input)
        .def("validate", &optim::TrainConfig::validate);
    py::class_<optim::MetricsRecord>(m, "MetricsRecord")
        .def_readonly("epoch", &optim::MetricsRecord::epoch)
        .def_readonly("updates", &optim::MetricsRecord::updates)
        .def_readonly("train_loss", &optim::MetricsRecord::train_loss)
        .def_readonly("validation_loss", &optim::MetricsRecord::validation_loss)
        .def_readonly("wall_clock_seconds", &optim::MetricsRecord::wall_clock_seconds);
    py::class_<optim::BatchNormLayer>(m, "BatchNormLayer")
        .def_readwrite("weights", &optim::BatchNormLayer::weights)
        .def_readwrite("bias", &optim::BatchNormLayer::bias)
        .def_readwrite("gamma", &optim::BatchNormLayer::gamma)
        .def_readwrite("beta", &optim::BatchNormLayer::beta)
        .def_readonly("running_mean", &optim::BatchNormLayer::running_mean)
        .def_readonly("running_var", &optim::BatchNormLayer::running_var);
    py::class_<optim::BatchNormNetwork>(m, "BatchNormNetwork")
        .def_readwrite("layers", &optim::BatchNormNetwork::layers)
        .def_readonly("epsilon", &optim::BatchNormNetwork::epsilon);
    py::class_<optim::TrainResult>(m, "TrainResult")
        .def_readonly("model", &optim::TrainResult::model)
        .def_readonly("metrics", &optim::TrainResult::metrics)
        .def_readonly("step_losses", &optim::TrainResult::step_losses);
    m.def("train", &optim::train, py::arg("config"), py::arg("spec"), py::arg("train_set"),
          py::arg("val_set"));
    m.def("train_sgd", &optim::train_sgd, py::arg("config"), py::arg("spec"),
          py::arg("train_set"), py::arg("val_set"));
    m.def("train_batchnorm", &optim::train_batchnorm, py::arg("config"), py::arg("spec"),
          py::arg("train_set"), py::arg("val_set"));
    m.def("train_prong", &optim::train_prong, py::arg("config"), py::arg("spec"),
          py::arg("train_set"), py::arg("val_set"));
    m.def("train_bprong", &optim::train_bprong, py::arg("config"), py::arg("spec"),
          py::arg("train_set"), py::arg("val_set"));
    m.def("train_exact_ngd", &optim::train_exact_ngd, py::arg("config"), py::arg("spec"),
          py::arg("train_set"), py::arg("val_set"));
    m.def("evaluate_loss", &optim::evaluate_loss, py::arg("model"), py::arg("dataset"));
    m.def("to_standard_network", &optim::to_standard_network, py::arg("model"));

    // serialization + diagnostics
    m.def("save_network",
          py::overload_cast<const mlp::Network&, const std::string&>(&serialize::save_network),
          py::arg("net"), py::arg("path"));
    m.def("save_whitened_network",
          py::overload_cast<const whiten::WhitenedNetwork&, const std::string&>(
              &serialize::save_network),
          py::arg("net"), py::arg("path"));
    m.def("load_network", &serialize::load_network, py::arg("path"));
    m.def("load_whitened_network", &serialize::load_whitened_network, py::arg("path"));
    m.def("checkpoint_is_whitened", &serialize::checkpoint_is_whitened, py::arg("path"));
    py::class_<experiment::FimDiagnosticsRow>(m, "FimDiagnosticsRow")
        .def_readonly("layer", &experiment::FimDiagnosticsRow::layer)
        .def_readonly("before", &experiment::FimDiagnosticsRow::before)
        .def_readonly("after", &experiment::FimDiagnosticsRow::after);
    py::class_<experiment::FimDiagnostics>(m, "FimDiagnostics")
        .def_readonly("rows", &experiment::FimDiagnostics::rows)
        .def_readonly("stats_batch", &experiment::FimDiagnostics::stats_batch)
        .def_readonly("seed", &experiment::FimDiagnostics::seed);
    m.def("diagnose_fim", &experiment::diagnose_fim, py::arg("net"), py::arg("dataset"),
          py::arg("stats_batch") = 1024, py::arg("mode") = fim::LabelMode::empirical,
          py::arg("seed") = 0, py::arg("epsilon") = 1e-5);
}
