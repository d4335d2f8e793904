// Python bindings for the main pipeline operations.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "csiloc/baselines.hpp"
#include "csiloc/errors.hpp"
#include "csiloc/experiment.hpp"
#include "csiloc/metrics.hpp"
#include "csiloc/outputs.hpp"

namespace py = pybind11;
using namespace csiloc;

PYBIND11_MODULE(_csiloc, m) {
    m.doc() = "CSI-fingerprint indoor positioning: multipath simulation, "
              "subspace feature estimation, and weighted-random-forest "
              "localization";

    py::register_exception<OutageError>(m, "OutageError");
    py::register_exception<SchemaError>(m, "SchemaError");
    py::register_exception<LoadError>(m, "LoadError");
    py::register_exception<NumericError>(m, "NumericError");

    py::class_<Vec3>(m, "Vec3")
        .def(py::init<>())
        .def(py::init([](double x, double y, double z) {
                 return Vec3{x, y, z};
             }),
             py::arg("x"), py::arg("y"), py::arg("z"))
        .def_readwrite("x", &Vec3::x)
        .def_readwrite("y", &Vec3::y)
        .def_readwrite("z", &Vec3::z)
        .def("__repr__", [](const Vec3 &v) {
            return "Vec3(" + std::to_string(v.x) + ", " + std::to_string(v.y) +
                   ", " + std::to_string(v.z) + ")";
        });

    py::class_<Partition>(m, "Partition")
        .def(py::init<>())
        .def_readwrite("axis", &Partition::axis)
        .def_readwrite("value", &Partition::value)
        .def_readwrite("lo", &Partition::lo)
        .def_readwrite("hi", &Partition::hi)
        .def_readwrite("z0", &Partition::z0)
        .def_readwrite("z1", &Partition::z1);

    py::class_<Scene>(m, "Scene")
        .def(py::init<>())
        .def_readwrite("width", &Scene::width)
        .def_readwrite("depth", &Scene::depth)
        .def_readwrite("height", &Scene::height)
        .def_readwrite("origin_x", &Scene::origin_x)
        .def_readwrite("origin_y", &Scene::origin_y)
        .def_readwrite("interior_partitions", &Scene::interior_partitions)
        .def_readwrite("carrier_freq", &Scene::carrier_freq)
        .def_readwrite("wall_permittivity", &Scene::wall_permittivity)
        .def_readwrite("scattering_coefficient", &Scene::scattering_coefficient)
        .def_readwrite("n_scatter_children", &Scene::n_scatter_children)
        .def_readwrite("min_detectable_power", &Scene::min_detectable_power)
        .def("validate", &Scene::validate);

    py::enum_<PathKind>(m, "PathKind")
        .value("LoS", PathKind::LoS)
        .value("Reflection", PathKind::Reflection)
        .value("Scattering", PathKind::Scattering)
        .value("Diffraction", PathKind::Diffraction);

    py::class_<PathComponent>(m, "PathComponent")
        .def(py::init<>())
        .def_readwrite("kind", &PathComponent::kind)
        .def_readwrite("order", &PathComponent::order)
        .def_readwrite("gain", &PathComponent::gain)
        .def_readwrite("delay", &PathComponent::delay)
        .def_readwrite("aaoa", &PathComponent::aaoa)
        .def_readwrite("eaoa", &PathComponent::eaoa)
        .def_readwrite("power_dbm", &PathComponent::power_dbm)
        .def_readwrite("interaction_points", &PathComponent::interaction_points);

    m.def("trace_paths", &trace_paths, py::arg("scene"), py::arg("tx"),
          py::arg("rx"), py::arg("max_reflection_order") = 3,
          py::arg("max_diffraction_order") = 1,
          "Image-method multipath tracing between tx and rx");

    py::class_<CirTap>(m, "CirTap")
        .def_readonly("delay", &CirTap::delay)
        .def_readonly("amplitude", &CirTap::amplitude)
        .def_readonly("kind", &CirTap::kind);
    py::class_<Cir>(m, "Cir")
        .def_readonly("taps", &Cir::taps)
        .def("kind_counts", &Cir::kind_counts);
    m.def("assemble_cir", &assemble_cir, py::arg("paths"));

    py::class_<CsiConfig>(m, "CsiConfig")
        .def(py::init<>())
        .def_readwrite("carrier_freq", &CsiConfig::carrier_freq)
        .def_readwrite("bandwidth", &CsiConfig::bandwidth)
        .def_readwrite("n_subcarriers", &CsiConfig::n_subcarriers)
        .def_readwrite("array_rows", &CsiConfig::array_rows)
        .def_readwrite("array_cols", &CsiConfig::array_cols)
        .def_readwrite("element_spacing", &CsiConfig::element_spacing)
        .def_readwrite("snr_db", &CsiConfig::snr_db)
        .def_readwrite("n_snapshots", &CsiConfig::n_snapshots)
        .def("sample_interval", &CsiConfig::sample_interval);

    py::class_<CsiSnapshot>(m, "CsiSnapshot")
        .def_readwrite("h", &CsiSnapshot::h)
        .def_readonly("noise_var", &CsiSnapshot::noise_var)
        .def_readonly("ap_id", &CsiSnapshot::ap_id)
        .def_readonly("array_rows", &CsiSnapshot::array_rows)
        .def_readonly("array_cols", &CsiSnapshot::array_cols);

    m.def("analytic_cfr", &analytic_cfr, py::arg("paths"), py::arg("config"));
    m.def("synthesize_csi", &synthesize_csi, py::arg("paths"), py::arg("config"),
          py::arg("seed"), py::arg("tx_position") = Vec3{},
          py::arg("ap_id") = std::string{});

    py::class_<SubarrayDims>(m, "SubarrayDims")
        .def(py::init([](int rows, int cols, int taps) {
                 return SubarrayDims{rows, cols, taps};
             }),
             py::arg("rows"), py::arg("cols"), py::arg("taps"))
        .def_readwrite("rows", &SubarrayDims::rows)
        .def_readwrite("cols", &SubarrayDims::cols)
        .def_readwrite("taps", &SubarrayDims::taps);

    py::class_<SmoothedCovariance>(m, "SmoothedCovariance")
        .def_readwrite("r", &SmoothedCovariance::r)
        .def_readonly("subarray_dims", &SmoothedCovariance::subarray_dims)
        .def_readonly("n_averages", &SmoothedCovariance::n_averages);

    m.def("fb_smooth", &fb_smooth, py::arg("snapshots"), py::arg("dims"));
    m.def("sample_covariance", &sample_covariance, py::arg("snapshots"),
          py::arg("dims"));
    m.def("fb_average", &fb_average, py::arg("r"));

    py::class_<MusicGrid>(m, "MusicGrid")
        .def(py::init<>())
        .def_readwrite("az_min", &MusicGrid::az_min)
        .def_readwrite("az_max", &MusicGrid::az_max)
        .def_readwrite("az_step", &MusicGrid::az_step)
        .def_readwrite("el_min", &MusicGrid::el_min)
        .def_readwrite("el_max", &MusicGrid::el_max)
        .def_readwrite("el_step", &MusicGrid::el_step)
        .def_readwrite("toa_min", &MusicGrid::toa_min)
        .def_readwrite("toa_max", &MusicGrid::toa_max)
        .def_readwrite("toa_step", &MusicGrid::toa_step);
    m.def("default_grid", &default_grid, py::arg("config"));

    py::class_<EstimatedPath>(m, "EstimatedPath")
        .def(py::init<>())
        .def_readwrite("aaoa", &EstimatedPath::aaoa)
        .def_readwrite("eaoa", &EstimatedPath::eaoa)
        .def_readwrite("toa", &EstimatedPath::toa)
        .def_readwrite("power_dbm", &EstimatedPath::power_dbm);

    m.def(
        "music_estimate",
        [](const SmoothedCovariance &cov, const CsiConfig &cfg,
           std::optional<int> n_sources, const MusicGrid &grid) {
            return music_estimate(cov, cfg, n_sources, grid);
        },
        py::arg("covariance"), py::arg("config"),
        py::arg("n_sources") = std::nullopt, py::arg("grid"));

    py::class_<MpFeature>(m, "MpFeature")
        .def(py::init<>())
        .def_readwrite("rss", &MpFeature::rss)
        .def_readwrite("aaoa", &MpFeature::aaoa)
        .def_readwrite("eaoa", &MpFeature::eaoa)
        .def_readwrite("toa", &MpFeature::toa);

    m.def("extract_mp", &extract_mp, py::arg("paths"));
    m.def("oracle_features", &oracle_features, py::arg("paths"));

    py::class_<Rect>(m, "Rect")
        .def(py::init([](double x0, double y0, double w, double h) {
                 return Rect{x0, y0, w, h};
             }),
             py::arg("x0"), py::arg("y0"), py::arg("width"), py::arg("height"))
        .def_readwrite("x0", &Rect::x0)
        .def_readwrite("y0", &Rect::y0)
        .def_readwrite("width", &Rect::width)
        .def_readwrite("height", &Rect::height);

    m.def("build_grid", &build_grid, py::arg("area"), py::arg("interval"));

    py::class_<FingerprintBase>(m, "FingerprintBase")
        .def(py::init<>())
        .def_readwrite("sn", &FingerprintBase::sn)
        .def_readwrite("coordinate", &FingerprintBase::coordinate)
        .def_readwrite("fingerprint", &FingerprintBase::fingerprint)
        .def_readwrite("grid_interval", &FingerprintBase::grid_interval)
        .def_readwrite("scenario_id", &FingerprintBase::scenario_id)
        .def_property_readonly("n_rps", &FingerprintBase::n_rps)
        .def_property_readonly("n_aps", &FingerprintBase::n_aps)
        .def("validate", &FingerprintBase::validate);

    m.def("save_db", &save, py::arg("db"), py::arg("path"));
    m.def("load_db", &load, py::arg("path"));
    m.def("db_to_csv", &to_csv, py::arg("db"));

    py::class_<TestRecord>(m, "TestRecord")
        .def(py::init<>())
        .def_readwrite("true_x", &TestRecord::true_x)
        .def_readwrite("true_y", &TestRecord::true_y)
        .def_readwrite("features", &TestRecord::features);

    py::class_<ForestParams>(m, "ForestParams")
        .def(py::init<>())
        .def_readwrite("n_trees", &ForestParams::n_trees)
        .def_readwrite("feature_subset_size", &ForestParams::feature_subset_size)
        .def_readwrite("max_depth", &ForestParams::max_depth)
        .def_readwrite("per_node_features", &ForestParams::per_node_features)
        .def_readwrite("bootstrap", &ForestParams::bootstrap)
        .def_readwrite("k", &ForestParams::k);

    py::class_<ForestModel>(m, "ForestModel")
        .def_readonly("label_set", &ForestModel::label_set)
        .def_readonly("train_seed", &ForestModel::train_seed)
        .def_readonly("feature_subset_size", &ForestModel::feature_subset_size)
        .def_property_readonly("n_trees", [](const ForestModel &mod) {
            return mod.trees.size();
        });

    m.def("gini", &gini, py::arg("class_counts"));
    m.def("train", &train, py::arg("db"), py::arg("params"), py::arg("seed"),
          "Train the per-axis WRF classifier pair (M_x, M_y)");
    m.def("train_joint", &train_joint, py::arg("db"), py::arg("params"),
          py::arg("seed"));
    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    py::class_<ScoredCandidate>(m, "ScoredCandidate")
        .def_readonly("value", &ScoredCandidate::value)
        .def_readonly("score", &ScoredCandidate::score);

    py::class_<PositionEstimate>(m, "PositionEstimate")
        .def_readonly("x", &PositionEstimate::x)
        .def_readonly("y", &PositionEstimate::y)
        .def_readonly("candidates_x", &PositionEstimate::candidates_x)
        .def_readonly("candidates_y", &PositionEstimate::candidates_y);

    m.def("predict_scores", &predict_scores, py::arg("model"), py::arg("features"),
          py::arg("k"));
    m.def("estimate_position", &estimate_position, py::arg("model_x"),
          py::arg("model_y"), py::arg("features"), py::arg("k") = 3);
    m.def("estimate_joint", &estimate_joint, py::arg("model"), py::arg("features"),
          py::arg("k") = 3);

    py::class_<WknnConfig>(m, "WknnConfig")
        .def(py::init<>())
        .def_readwrite("k", &WknnConfig::k)
        .def_readwrite("epsilon", &WknnConfig::epsilon)
        .def_readwrite("standardize", &WknnConfig::standardize);

    m.def("wknn_estimate", &wknn_estimate, py::arg("db"), py::arg("features"),
          py::arg("config"));
    m.def("rf_joint_estimate", &rf_joint_estimate, py::arg("model"),
          py::arg("features"));

    py::enum_<FeatureMode>(m, "FeatureMode")
        .value("Oracle", FeatureMode::Oracle)
        .value("Estimated", FeatureMode::Estimated);
    py::enum_<Algorithm>(m, "Algorithm")
        .value("Wrf", Algorithm::Wrf)
        .value("Rf", Algorithm::Rf)
        .value("Wknn", Algorithm::Wknn);

    py::class_<ApSpec>(m, "ApSpec")
        .def(py::init([](const std::string &id, const Vec3 &pos) {
                 return ApSpec{id, pos};
             }),
             py::arg("id"), py::arg("position"))
        .def_readwrite("id", &ApSpec::id)
        .def_readwrite("position", &ApSpec::position);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("scene", &ExperimentConfig::scene)
        .def_readwrite("area", &ExperimentConfig::area)
        .def_readwrite("aps", &ExperimentConfig::aps)
        .def_readwrite("rp_height", &ExperimentConfig::rp_height)
        .def_readwrite("scenario_id", &ExperimentConfig::scenario_id)
        .def_readwrite("grid_interval", &ExperimentConfig::grid_interval)
        .def_readwrite("max_reflection_order", &ExperimentConfig::max_reflection_order)
        .def_readwrite("max_diffraction_order", &ExperimentConfig::max_diffraction_order)
        .def_readwrite("tp_count", &ExperimentConfig::tp_count)
        .def_readwrite("tp_on_grid", &ExperimentConfig::tp_on_grid)
        .def_readwrite("tp_grid_offset", &ExperimentConfig::tp_grid_offset)
        .def_readwrite("feature_mode", &ExperimentConfig::feature_mode)
        .def_readwrite("algorithms", &ExperimentConfig::algorithms)
        .def_readwrite("k", &ExperimentConfig::k)
        .def_readwrite("n_trees", &ExperimentConfig::n_trees)
        .def_readwrite("seeds", &ExperimentConfig::seeds)
        .def_readwrite("timing_reps", &ExperimentConfig::timing_reps)
        .def_readwrite("csi", &ExperimentConfig::csi)
        .def_readwrite("subarray", &ExperimentConfig::subarray)
        .def_readwrite("music", &ExperimentConfig::music)
        .def_readwrite("music_grid_set", &ExperimentConfig::music_grid_set)
        .def("validate", &ExperimentConfig::validate);

    m.def("scenario_1", &scenario_1);
    m.def("scenario_2", &scenario_2);
    m.def("build_database", [](const ExperimentConfig &cfg) {
        return build_database(cfg);
    }, py::arg("config"));
    m.def("make_test_points", &make_test_points, py::arg("config"), py::arg("seed"));

    py::class_<ErrorStats>(m, "ErrorStats")
        .def_readonly("min", &ErrorStats::min)
        .def_readonly("max", &ErrorStats::max)
        .def_readonly("mean", &ErrorStats::mean);

    py::class_<AlgoSeedResult>(m, "AlgoSeedResult")
        .def_readonly("algo", &AlgoSeedResult::algo)
        .def_readonly("seed", &AlgoSeedResult::seed)
        .def_readonly("errors", &AlgoSeedResult::errors)
        .def_readonly("stats", &AlgoSeedResult::stats)
        .def_readonly("train_s", &AlgoSeedResult::train_s)
        .def_readonly("position_total_s", &AlgoSeedResult::position_total_s)
        .def_readonly("position_per_tp_s", &AlgoSeedResult::position_per_tp_s);

    py::class_<ResultSet>(m, "ResultSet")
        .def_readonly("entries", &ResultSet::entries)
        .def_readonly("tp_count", &ResultSet::tp_count)
        .def("pooled_errors", &ResultSet::pooled_errors, py::arg("algorithm"));

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("interval", &SweepRow::interval)
        .def_readonly("algo", &SweepRow::algo)
        .def_readonly("n_rps", &SweepRow::n_rps)
        .def_readonly("train_s", &SweepRow::train_s)
        .def_readonly("position_total_s", &SweepRow::position_total_s);

    m.def("run_experiment", &run_experiment, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("sweep", &sweep, py::arg("config"), py::arg("grid_intervals"),
          py::call_guard<py::gil_scoped_release>());
    m.def("error_cdf", &error_cdf, py::arg("errors"));
    m.def(
        "emit_outputs",
        [](const ResultSet &results, const std::string &out_dir,
           std::optional<std::vector<SweepRow>> sweep_rows) {
            return emit_outputs(results, out_dir,
                                sweep_rows ? &*sweep_rows : nullptr);
        },
        py::arg("results"), py::arg("out_dir"),
        py::arg("sweep_rows") = std::nullopt);

    m.attr("SPEED_OF_LIGHT") = kSpeedOfLight;
    m.attr("__version__") = "0.1.0";
}
