#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "shredrom/error.hpp"
#include "shredrom/pipeline.hpp"

namespace py = pybind11;
using namespace shredrom;

namespace {

py::array_t<double> states_array(const TrajectorySet& set) {
  py::array_t<double> out({set.n_scenarios(), set.n_times(), set.state_dim()});
  auto v = out.mutable_unchecked<3>();
  for (Index i = 0; i < set.n_scenarios(); ++i) {
    const Matrix& s = set.states[static_cast<std::size_t>(i)];
    for (Index k = 0; k < s.rows(); ++k)
      for (Index j = 0; j < s.cols(); ++j) v(i, k, j) = s(k, j);
  }
  return out;
}

TrajectorySet make_set(py::array_t<double, py::array::c_style | py::array::forcecast> states, Matrix params,
                       Vector times) {
  if (states.ndim() != 3) throw DimensionError("states must be 3-D (scenario, time, grid)");
  auto v = states.unchecked<3>();
  TrajectorySet set;
  for (py::ssize_t i = 0; i < v.shape(0); ++i) {
    Matrix s(v.shape(1), v.shape(2));
    for (py::ssize_t k = 0; k < v.shape(1); ++k)
      for (py::ssize_t j = 0; j < v.shape(2); ++j) s(k, j) = v(i, k, j);
    set.states.push_back(std::move(s));
  }
  set.params = std::move(params);
  set.times = std::move(times);
  set.validate();
  return set;
}

void print_line(const std::string& line) { py::print(line); }

}  // namespace

PYBIND11_MODULE(shredrom, m) {
  m.doc() = "Sparse-sensor reduced-order reconstruction of parametric KS trajectories";

  static py::exception<Error> error(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<LeakageError>(m, "LeakageError", error.ptr());
  py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", error.ptr());

  py::class_<ExperimentConfig>(m, "Config")
      .def(py::init([] { return ExperimentConfig::parse(""); }))
      .def_static("parse", &ExperimentConfig::parse, py::arg("text"))
      .def_static("load", &ExperimentConfig::load, py::arg("path"))
      .def_readwrite("master_seed", &ExperimentConfig::master_seed)
      .def_static("known_keys", &ExperimentConfig::known_keys)
      .def_property_readonly("n_trajectories", [](const ExperimentConfig& c) { return c.ks.n_trajectories; })
      .def_property_readonly("rank", [](const ExperimentConfig& c) { return c.pod.rank; })
      .def_property_readonly("lag", [](const ExperimentConfig& c) { return c.dataset.lag; })
      .def_property_readonly("noise_std", [](const ExperimentConfig& c) { return c.sensors.noise_std; });

  py::class_<TrajectorySet>(m, "Trajectories")
      .def(py::init(&make_set), py::arg("states"), py::arg("params"), py::arg("times"))
      .def_property_readonly("states", &states_array)
      .def_readonly("params", &TrajectorySet::params)
      .def_readonly("times", &TrajectorySet::times)
      .def("save", [](const TrajectorySet& s, const std::filesystem::path& p) { trajectories_to_file(s).write(p); })
      .def_static("load", [](const std::filesystem::path& p) { return trajectories_from_file(TensorFile::read(p)); });

  py::class_<PodArtifact>(m, "Pod")
      .def_property_readonly("modes", [](const PodArtifact& p) { return p.basis.modes; })
      .def_property_readonly("singular_values", [](const PodArtifact& p) { return p.basis.singular_values; })
      .def_readonly("fit_mask", &PodArtifact::fit_mask)
      .def_readonly("test_error", &PodArtifact::test_error)
      .def("save", [](const PodArtifact& a, const std::filesystem::path& p) { pod_to_file(a).write(p); })
      .def_static("load", [](const std::filesystem::path& p) { return pod_from_file(TensorFile::read(p)); });

  py::class_<DatasetArtifact>(m, "Dataset")
      .def_property_readonly("size", [](const DatasetArtifact& d) { return d.data.size(); })
      .def_property_readonly("windows", [](const DatasetArtifact& d) { return Matrix(d.data.windows); })
      .def_property_readonly("targets", [](const DatasetArtifact& d) { return Matrix(d.data.targets); })
      .def_readonly("sensor_indices", &DatasetArtifact::sensor_indices);

  py::class_<TrainedModel>(m, "Model")
      .def_readonly("sensor_indices", &TrainedModel::sensor_indices)
      .def_property_readonly("lag", [](const TrainedModel& t) { return t.net.shape.lag; })
      .def_property_readonly("n_params", [](const TrainedModel& t) { return t.net.params.size(); })
      .def("reconstruct",
           [](const TrainedModel& t, const PodArtifact& pod, const Matrix& sensors) {
             return reconstruct_trajectory(t.net, pod.basis, sensors);
           },
           py::arg("pod"), py::arg("sensors"))
      .def("save", [](const TrainedModel& t, const std::filesystem::path& p) { model_to_file(t).write(p); })
      .def_static("load", [](const std::filesystem::path& p) { return model_from_file(TensorFile::read(p)); });

  py::class_<TrainOutcome>(m, "TrainResult")
      .def_readonly("model", &TrainOutcome::model)
      .def_readonly("best_epoch", &TrainOutcome::best_epoch)
      .def_readonly("best_val_loss", &TrainOutcome::best_val_loss)
      .def_property_readonly("val_loss", [](const TrainOutcome& o) {
        std::vector<double> v;
        for (const EpochRecord& r : o.history) v.push_back(r.val_loss);
        return v;
      });

  py::class_<EnsembleOutcome>(m, "EnsembleResult")
      .def_readonly("members", &EnsembleOutcome::members)
      .def_readonly("member_eps", &EnsembleOutcome::member_eps)
      .def_readonly("mean_member_eps", &EnsembleOutcome::mean_member_eps)
      .def_readonly("ensemble_eps", &EnsembleOutcome::ensemble_eps);

  m.def("ks_simulate",
        [](double nu, double omega, double horizon, double dt, Index save_stride, Index n_grid) {
          KSConfig c;
          c.nu = nu;
          c.omega = omega;
          c.horizon = horizon;
          c.dt = dt;
          c.save_stride = save_stride;
          c.n_grid = n_grid;
          py::gil_scoped_release release;
          return ks_simulate(c);
        },
        py::arg("nu"), py::arg("omega"), py::arg("horizon") = 200.0, py::arg("dt") = 0.01,
        py::arg("save_stride") = 100, py::arg("n_grid") = 100);

  m.def("generate",
        [](const ExperimentConfig& c, bool verbose) {
          py::gil_scoped_release release;
          return run_generate(c, verbose ? LogFn(print_line) : LogFn{});
        },
        py::arg("config"), py::arg("verbose") = false);
  m.def("pod", &run_pod, py::arg("config"), py::arg("trajectories"), py::call_guard<py::gil_scoped_release>());
  m.def("dataset",
        [](const ExperimentConfig& c, const TrajectorySet& set, const PodArtifact& pod) {
          const SplitPlan plan = experiment_split(c, set);
          check_leakage(pod, plan);
          return build_dataset(set, pod.basis, plan, dataset_options(c, set.state_dim()));
        },
        py::arg("config"), py::arg("trajectories"), py::arg("pod"));
  m.def("train",
        [](const ExperimentConfig& c, const DatasetArtifact& d) {
          py::gil_scoped_release release;
          return run_train(c, d, c.init_seed(), c.train_seed());
        },
        py::arg("config"), py::arg("dataset"));
  m.def("evaluate",
        [](const ExperimentConfig& c, const TrainedModel& model, const TrajectorySet& set, const PodArtifact& pod) {
          const SplitPlan plan = experiment_split(c, set);
          check_leakage(pod, plan);
          return evaluate_model(model, set, pod.basis, plan, c.sensors.noise_std, c.eval_noise_seed())
              .mean_relative_error;
        },
        py::arg("config"), py::arg("model"), py::arg("trajectories"), py::arg("pod"));
  m.def("ensemble",
        [](const ExperimentConfig& c, const TrajectorySet& set, const PodArtifact& pod, Index members,
           double noise_std) {
          py::gil_scoped_release release;
          return run_ensemble(c, set, pod, members, noise_std);
        },
        py::arg("config"), py::arg("trajectories"), py::arg("pod"), py::arg("members"), py::arg("noise_std"));
  m.def("sweep",
        [](const ExperimentConfig& c, const TrajectorySet& set, const PodArtifact& pod, const std::string& axis,
           const std::vector<Index>& values, Index placements) {
          std::vector<SweepCell> cells;
          {
            py::gil_scoped_release release;
            cells = run_sweep(c, set, pod, parse_sweep_axis(axis), values, placements);
          }
          py::list rows;
          for (const SweepCell& cell : cells) {
            rows.append(py::dict(py::arg("value") = cell.value, py::arg("placement_seed") = cell.placement_seed,
                                 py::arg("test_eps") = cell.outcome ? py::cast(cell.outcome->test_eps) : py::none(),
                                 py::arg("error") = cell.error));
          }
          return rows;
        },
        py::arg("config"), py::arg("trajectories"), py::arg("pod"), py::arg("axis"), py::arg("values"),
        py::arg("placements"));
  m.def("mean_relative_error",
        [](const Matrix& truth, const Matrix& pred) { return mean_relative_error(truth, pred).mean; },
        py::arg("truth"), py::arg("pred"));
}
