#include "shredrom/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <mutex>
#include <string>

#include "shredrom/csv.hpp"
#include "shredrom/error.hpp"
#include "shredrom/parallel.hpp"
#include "shredrom/rng.hpp"

namespace shredrom {

namespace {

void emit(const LogFn& log, const std::string& line) {
  if (log) log(line);
}

Matrix stack_rows(const std::vector<Matrix>& blocks, const SplitPlan& plan, SplitLabel which) {
  Index rows = 0;
  const Index cols = blocks.empty() ? 0 : blocks.front().cols();
  for (Index i = 0; i < plan.n_scenarios; ++i) {
    for (Index k = 0; k < plan.n_times; ++k) rows += plan.label(i, k) == which;
  }
  Matrix out(rows, cols);
  Index r = 0;
  for (Index i = 0; i < plan.n_scenarios; ++i) {
    for (Index k = 0; k < plan.n_times; ++k) {
      if (plan.label(i, k) == which) out.row(r++) = blocks[static_cast<std::size_t>(i)].row(k);
    }
  }
  return out;
}

double scalar_of(const TensorFile& file, std::string_view name) {
  const Tensor& t = file.get(name);
  if (t.data.size() != 1) throw FormatError("tensor '" + std::string(name) + "' is not a scalar");
  return t.data.front();
}

Index count_of(const TensorFile& file, std::string_view name) {
  const double v = scalar_of(file, name);
  if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15) {
    throw FormatError("tensor '" + std::string(name) + "' is not a count");
  }
  return static_cast<Index>(v);
}

std::vector<Index> indices_of(const TensorFile& file, std::string_view name) {
  std::vector<Index> out;
  for (double v : file.get(name).data) {
    if (!(v >= 0.0) || v != std::floor(v)) {
      throw FormatError("tensor '" + std::string(name) + "' holds a non-index value");
    }
    out.push_back(static_cast<Index>(v));
  }
  return out;
}

Tensor index_tensor(const std::vector<Index>& values) {
  Tensor t;
  t.dims = {values.size()};
  for (Index v : values) t.data.push_back(static_cast<double>(v));
  return t;
}

void add_seed(TensorFile& file, const std::string& name, std::uint64_t seed) {
  file.add(name + "_hi", Tensor::scalar(static_cast<double>(seed >> 32)));
  file.add(name + "_lo", Tensor::scalar(static_cast<double>(seed & 0xFFFFFFFFULL)));
}

std::uint64_t seed_of(const TensorFile& file, const std::string& name) {
  return (static_cast<std::uint64_t>(count_of(file, name + "_hi")) << 32) |
         static_cast<std::uint64_t>(count_of(file, name + "_lo"));
}

const std::vector<std::string>& param_names() {
  static const std::vector<std::string> names{"nu", "omega"};
  return names;
}

using OutputFn = std::function<Matrix(const Matrix& raw_sensors)>;

EvalReport score(const OutputFn& outputs, Index rank, Index n_param_targets,
                 const std::vector<Index>& sensor_indices, const TrajectorySet& trajectories,
                 const PODBasis& basis, const SplitPlan& plan, double noise_std,
                 std::uint64_t noise_seed, SplitLabel which) {
  trajectories.validate();
  if (plan.n_scenarios != trajectories.n_scenarios() || plan.n_times != trajectories.n_times()) {
    throw DimensionError("evaluate: split plan does not match the trajectories");
  }
  if (basis.rank() != rank || basis.state_dim() != trajectories.state_dim()) {
    throw DimensionError("evaluate: POD basis does not match the model");
  }
  const SensorArray raw =
      add_noise(extract_sensors(trajectories, SensorConfig{sensor_indices, noise_std, noise_seed}),
                noise_std, noise_seed);
  const std::vector<Index> scenarios = plan.scenarios(which);
  const Index n_rows = plan.sample_count(which);
  Matrix truth(n_rows, trajectories.state_dim());
  Matrix pred(n_rows, trajectories.state_dim());
  Matrix param_truth(n_rows, n_param_targets);
  Matrix param_pred(n_rows, n_param_targets);
  std::vector<SampleRef> refs;
  refs.reserve(static_cast<std::size_t>(n_rows));
  for (Index i : scenarios) {
    const Matrix out = outputs(raw[static_cast<std::size_t>(i)]);
    const Matrix states = pod_reconstruct_rows(basis, out.leftCols(rank));
    for (Index k = 0; k < plan.n_times; ++k) {
      if (plan.label(i, k) != which) continue;
      const auto r = static_cast<Index>(refs.size());
      truth.row(r) = trajectories.states[static_cast<std::size_t>(i)].row(k);
      pred.row(r) = states.row(k);
      if (n_param_targets > 0) {
        param_truth.row(r) = trajectories.params.row(i).head(n_param_targets);
        param_pred.row(r) = out.row(k).segment(rank, n_param_targets);
      }
      refs.push_back(SampleRef{i, k});
    }
  }
  const RelativeErrors errors = mean_relative_error(truth, pred);
  EvalReport report;
  report.mean_relative_error = errors.mean;
  report.per_sample = errors.per_sample;
  for (Index r : errors.rows) report.samples.push_back(refs[static_cast<std::size_t>(r)]);
  report.skipped = errors.skipped;
  if (n_param_targets > 0) {
    const Vector mae = parameter_mae(param_truth, param_pred);
    for (Index j = 0; j < n_param_targets; ++j) {
      report.param_names.push_back(param_names()[static_cast<std::size_t>(j)]);
      report.param_mae.push_back(mae[j]);
    }
  }
  std::string sensors;
  for (Index s : sensor_indices) sensors += (sensors.empty() ? "" : " ") + std::to_string(s);
  report.metadata = {
      {"split", std::string(to_string(which))},
      {"rank", std::to_string(rank)},
      {"n_sensors", std::to_string(sensor_indices.size())},
      {"sensor_indices", sensors},
      {"noise_std", format_double(noise_std)},
      {"noise_seed", std::to_string(noise_seed)},
      {"n_train", std::to_string(plan.sample_count(SplitLabel::train))},
      {"n_val", std::to_string(plan.sample_count(SplitLabel::val))},
      {"n_test", std::to_string(plan.sample_count(SplitLabel::test))},
  };
  return report;
}

}  // namespace

DatasetOptions dataset_options(const ExperimentConfig& config, Index n_grid) {
  DatasetOptions o;
  o.sensor_indices = experiment_sensors(config, n_grid);
  o.lag = config.dataset.lag;
  o.noise_std = config.sensors.noise_std;
  o.noise_seed = config.noise_seed();
  o.estimate_params = config.dataset.estimate_params;
  return o;
}

std::vector<Index> experiment_sensors(const ExperimentConfig& config, Index n_grid) {
  if (!config.sensors.indices.empty()) return config.sensors.indices;
  return random_placement(n_grid, config.sensors.n_sensors, config.placement_seed());
}

SplitPlan experiment_split(const ExperimentConfig& config, const TrajectorySet& trajectories) {
  return make_split(config.dataset.split, trajectories.n_scenarios(), trajectories.n_times(),
                    config.dataset.fractions, config.split_seed());
}

TrajectorySet run_generate(const ExperimentConfig& config, const LogFn& log) {
  GenerateOptions options;
  options.base = config.ks.solver;
  options.nu_range = config.ks.nu;
  options.omega_range = config.ks.omega;
  options.n_trajectories = config.ks.n_trajectories;
  options.seed = config.ks_seed();
  options.max_resamples = config.ks.max_resamples;
  return generate_trajectories(options, log);
}

PodArtifact run_pod(const ExperimentConfig& config, const TrajectorySet& trajectories) {
  trajectories.validate();
  const SplitPlan plan = experiment_split(config, trajectories);
  PodArtifact pod;
  pod.fit_mask = plan.mask(SplitLabel::train);
  pod.basis = pod_fit(trajectories.snapshot_matrix(pod.fit_mask), config.pod.rank, config.pod_seed(),
                      RsvdOptions{config.pod.oversample, config.pod.power_iters});
  const Matrix test = trajectories.snapshot_matrix(plan.mask(SplitLabel::test));
  if (test.cols() > 0) {
    const Matrix recon = pod.basis.modes * (pod.basis.modes.transpose() * test);
    const RelativeErrors errors = mean_relative_error(test.transpose(), recon.transpose());
    pod.test_error = errors.mean;
    pod.test_error_fro = (test - recon).norm() / test.norm();
  }
  return pod;
}

void check_leakage(const PodArtifact& pod, const SplitPlan& plan) {
  if (pod.fit_mask.rows() != plan.n_scenarios || pod.fit_mask.cols() != plan.n_times) {
    throw DimensionError("POD fit mask does not match the split");
  }
  for (Index i = 0; i < plan.n_scenarios; ++i) {
    for (Index k = 0; k < plan.n_times; ++k) {
      if (pod.fit_mask(i, k) != 0.0 && plan.label(i, k) != SplitLabel::train) {
        throw LeakageError("POD basis was fitted on " + std::string(to_string(plan.label(i, k))) +
                           " snapshot (scenario " + std::to_string(i) + ", time " + std::to_string(k) +
                           ")");
      }
    }
  }
}

DatasetArtifact build_dataset(const TrajectorySet& trajectories, const PODBasis& basis,
                              const SplitPlan& plan, const DatasetOptions& options) {
  trajectories.validate();
  if (basis.state_dim() != trajectories.state_dim()) {
    throw DimensionError("dataset: POD basis does not match the state dimension");
  }
  if (plan.n_scenarios != trajectories.n_scenarios() || plan.n_times != trajectories.n_times()) {
    throw DimensionError("dataset: split plan does not match the trajectories");
  }
  const SensorConfig sensors{options.sensor_indices, options.noise_std, options.noise_seed};
  const SensorArray raw =
      add_noise(extract_sensors(trajectories, sensors), options.noise_std, options.noise_seed);

  const Index n_params = options.estimate_params ? trajectories.params.cols() : 0;
  std::vector<Matrix> targets;
  targets.reserve(trajectories.states.size());
  for (Index i = 0; i < trajectories.n_scenarios(); ++i) {
    Matrix t(trajectories.n_times(), basis.rank() + n_params);
    t.leftCols(basis.rank()) = pod_project_rows(basis, trajectories.states[static_cast<std::size_t>(i)]);
    if (n_params > 0) t.rightCols(n_params).rowwise() = trajectories.params.row(i);
    targets.push_back(std::move(t));
  }

  DatasetArtifact out;
  out.sensor_indices = options.sensor_indices;
  out.rank = basis.rank();
  out.n_param_targets = n_params;
  out.input_scaler = fit_scaler(stack_rows(raw, plan, SplitLabel::train));
  out.target_scaler = fit_scaler(stack_rows(targets, plan, SplitLabel::train));
  SensorArray scaled_inputs;
  std::vector<Matrix> scaled_targets;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    scaled_inputs.push_back(out.input_scaler.apply(raw[i]));
    scaled_targets.push_back(out.target_scaler.apply(targets[i]));
  }
  out.data = build_lag_windows(scaled_inputs, scaled_targets, options.lag);
  assign_split(out.data, plan);
  return out;
}

ModelShape experiment_shape(const ExperimentConfig& config, const DatasetArtifact& dataset) {
  ModelShape shape;
  shape.n_sensors = dataset.data.n_sensors;
  shape.hidden = config.model.hidden;
  shape.lstm_layers = config.model.lstm_layers;
  shape.decoder_hidden = config.model.decoder_hidden;
  shape.out_dim = dataset.data.out_dim();
  shape.lag = dataset.data.lag;
  return shape;
}

TrainOutcome run_train(const ExperimentConfig& config, const DatasetArtifact& dataset,
                       std::uint64_t init_seed, std::uint64_t train_seed, const EpochCallback& on_epoch) {
  const auto start = std::chrono::steady_clock::now();
  ShredModel initial = init_model(experiment_shape(config, dataset), init_seed, config.model.forget_bias);
  initial.input_scaler = dataset.input_scaler;
  initial.target_scaler = dataset.target_scaler;
  TrainConfig tc = config.train;
  tc.seed = train_seed;
  TrainResult result = train(initial, dataset.data, tc, on_epoch);
  TrainOutcome out;
  out.model.net = std::move(result.best);
  out.model.sensor_indices = dataset.sensor_indices;
  out.model.rank = dataset.rank;
  out.model.n_param_targets = dataset.n_param_targets;
  out.model.init_seed = init_seed;
  out.model.train_seed = train_seed;
  out.history = std::move(result.history);
  out.best_epoch = result.best_epoch;
  out.best_val_loss = result.best_val_loss;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

EvalReport evaluate_model(const TrainedModel& model, const TrajectorySet& trajectories,
                          const PODBasis& basis, const SplitPlan& plan, double noise_std,
                          std::uint64_t noise_seed, SplitLabel which) {
  model.net.validate();
  EvalReport report = score([&](const Matrix& raw) { return predict_trajectory(model.net, raw); },
                            model.rank, model.n_param_targets, model.sensor_indices, trajectories, basis,
                            plan, noise_std, noise_seed, which);
  report.metadata.emplace_back("lag", std::to_string(model.net.shape.lag));
  report.metadata.emplace_back("init_seed", std::to_string(model.init_seed));
  report.metadata.emplace_back("train_seed", std::to_string(model.train_seed));
  return report;
}

EvalReport evaluate_ensemble(std::span<const TrainedModel> members, const TrajectorySet& trajectories,
                             const PODBasis& basis, const SplitPlan& plan, double noise_std,
                             std::uint64_t noise_seed, SplitLabel which) {
  if (members.empty()) throw InvalidArgument("ensemble: no members");
  std::vector<ShredModel> nets;
  for (const TrainedModel& m : members) {
    if (m.sensor_indices != members.front().sensor_indices || m.rank != members.front().rank ||
        m.n_param_targets != members.front().n_param_targets) {
      throw DimensionError("ensemble: members differ in sensors or outputs");
    }
    nets.push_back(m.net);
  }
  const TrainedModel& first = members.front();
  EvalReport report = score([&](const Matrix& raw) { return ensemble_outputs(nets, raw); }, first.rank,
                            first.n_param_targets, first.sensor_indices, trajectories, basis, plan,
                            noise_std, noise_seed, which);
  report.metadata.emplace_back("lag", std::to_string(first.net.shape.lag));
  report.metadata.emplace_back("members", std::to_string(members.size()));
  return report;
}

EnsembleOutcome run_ensemble(const ExperimentConfig& config, const TrajectorySet& trajectories,
                             const PodArtifact& pod, Index members, double noise_std, const LogFn& log) {
  if (members < 1) throw InvalidArgument("ensemble: members must be >= 1");
  const SplitPlan plan = experiment_split(config, trajectories);
  check_leakage(pod, plan);
  DatasetOptions options = dataset_options(config, trajectories.state_dim());
  options.noise_std = noise_std;
  EnsembleOutcome out;
  for (Index m = 0; m < members; ++m) {
    options.noise_seed = derive_seed(config.noise_seed(), static_cast<std::uint64_t>(m));
    const DatasetArtifact dataset = build_dataset(trajectories, pod.basis, plan, options);
    TrainOutcome trained = run_train(config, dataset, derive_seed(config.init_seed(), m),
                                     derive_seed(config.train_seed(), m));
    const EvalReport report = evaluate_model(trained.model, trajectories, pod.basis, plan, noise_std,
                                             config.eval_noise_seed());
    out.member_eps.push_back(report.mean_relative_error);
    emit(log, "member " + std::to_string(m) + ": test eps " + format_double(report.mean_relative_error) +
                  " (best epoch " + std::to_string(trained.best_epoch) + ", " +
                  format_double(trained.seconds) + " s)");
    out.members.push_back(std::move(trained.model));
  }
  double total = 0.0;
  for (double e : out.member_eps) total += e;
  out.mean_member_eps = total / static_cast<double>(members);
  out.report = evaluate_ensemble(out.members, trajectories, pod.basis, plan, noise_std,
                                 config.eval_noise_seed());
  out.ensemble_eps = out.report.mean_relative_error;
  return out;
}

std::vector<SweepCell> run_sweep(const ExperimentConfig& config, const TrajectorySet& trajectories,
                                 const PodArtifact& pod, SweepAxis axis, std::span<const Index> values,
                                 Index placements, const LogFn& log) {
  const SplitPlan plan = experiment_split(config, trajectories);
  check_leakage(pod, plan);
  const DatasetOptions base = dataset_options(config, trajectories.state_dim());
  std::mutex log_mutex;
  const CellRunner runner = [&](Index value, std::uint64_t placement_seed) {
    DatasetOptions options = base;
    Index n_sensors = config.sensors.n_sensors;
    if (axis == SweepAxis::lag) {
      options.lag = value;
    } else {
      n_sensors = value;
    }
    options.sensor_indices = random_placement(trajectories.state_dim(), n_sensors, placement_seed);
    const DatasetArtifact dataset = build_dataset(trajectories, pod.basis, plan, options);
    const TrainOutcome trained = run_train(config, dataset, config.init_seed(), config.train_seed());
    CellOutcome cell;
    cell.test_eps = evaluate_model(trained.model, trajectories, pod.basis, plan, options.noise_std,
                                   config.eval_noise_seed(), SplitLabel::test)
                        .mean_relative_error;
    cell.val_eps = evaluate_model(trained.model, trajectories, pod.basis, plan, options.noise_std,
                                  config.eval_noise_seed(), SplitLabel::val)
                       .mean_relative_error;
    cell.train_seconds = trained.seconds;
    if (log) {
      const std::lock_guard lock(log_mutex);
      log(std::string(to_string(axis)) + "=" + std::to_string(value) + " placement " +
          std::to_string(placement_seed) + ": test eps " + format_double(cell.test_eps));
    }
    return cell;
  };
  const std::size_t workers =
      config.eval.sweep_workers > 0 ? static_cast<std::size_t>(config.eval.sweep_workers) : worker_count();
  return sweep(axis, values, placements, config.sweep_seed(), runner, workers);
}

TensorFile trajectories_to_file(const TrajectorySet& trajectories) {
  trajectories.validate();
  Tensor states;
  states.dims = {static_cast<std::uint64_t>(trajectories.n_scenarios()),
                 static_cast<std::uint64_t>(trajectories.n_times()),
                 static_cast<std::uint64_t>(trajectories.state_dim())};
  states.data.reserve(states.element_count());
  for (const Matrix& s : trajectories.states) {
    for (Index k = 0; k < s.rows(); ++k) {
      for (Index j = 0; j < s.cols(); ++j) states.data.push_back(s(k, j));
    }
  }
  TensorFile file;
  file.add("states", std::move(states));
  file.add("params", Tensor::from_matrix(trajectories.params));
  file.add("times", Tensor::from_vector(trajectories.times));
  return file;
}

TrajectorySet trajectories_from_file(const TensorFile& file) {
  const Tensor& states = file.get("states");
  if (states.dims.size() != 3) throw FormatError("trajectories: 'states' must have 3 axes");
  const auto np = static_cast<Index>(states.dims[0]);
  const auto nt = static_cast<Index>(states.dims[1]);
  const auto nh = static_cast<Index>(states.dims[2]);
  TrajectorySet out;
  std::size_t pos = 0;
  for (Index i = 0; i < np; ++i) {
    Matrix s(nt, nh);
    for (Index k = 0; k < nt; ++k) {
      for (Index j = 0; j < nh; ++j) s(k, j) = states.data[pos++];
    }
    out.states.push_back(std::move(s));
  }
  out.params = file.get("params").to_matrix();
  out.times = file.get("times").to_vector();
  out.validate();
  return out;
}

TensorFile pod_to_file(const PodArtifact& pod) {
  TensorFile file;
  file.add("modes", Tensor::from_matrix(pod.basis.modes));
  file.add("singular_values", Tensor::from_vector(pod.basis.singular_values));
  file.add("fit_mask", Tensor::from_matrix(pod.fit_mask));
  file.add("test_error", Tensor::scalar(pod.test_error));
  file.add("test_error_fro", Tensor::scalar(pod.test_error_fro));
  return file;
}

PodArtifact pod_from_file(const TensorFile& file) {
  PodArtifact pod;
  pod.basis.modes = file.get("modes").to_matrix();
  pod.basis.singular_values = file.get("singular_values").to_vector();
  if (pod.basis.singular_values.size() != pod.basis.rank()) {
    throw FormatError("pod: singular value count does not match the mode count");
  }
  pod.fit_mask = file.get("fit_mask").to_matrix();
  pod.test_error = scalar_of(file, "test_error");
  pod.test_error_fro = scalar_of(file, "test_error_fro");
  return pod;
}

TensorFile dataset_to_file(const DatasetArtifact& dataset) {
  const LagDataset& d = dataset.data;
  Tensor windows;
  windows.dims = {static_cast<std::uint64_t>(d.size()), static_cast<std::uint64_t>(d.lag),
                  static_cast<std::uint64_t>(d.n_sensors)};
  windows.data.assign(d.windows.data(), d.windows.data() + d.windows.size());
  Tensor targets;
  targets.dims = {static_cast<std::uint64_t>(d.size()), static_cast<std::uint64_t>(d.out_dim())};
  targets.data.assign(d.targets.data(), d.targets.data() + d.targets.size());
  Tensor meta;
  meta.dims = {static_cast<std::uint64_t>(d.size()), 2};
  for (const SampleRef& m : d.meta) {
    meta.data.push_back(static_cast<double>(m.scenario));
    meta.data.push_back(static_cast<double>(m.time));
  }
  Tensor split;
  split.dims = {static_cast<std::uint64_t>(d.size())};
  for (SplitLabel s : d.split) split.data.push_back(static_cast<double>(s));

  TensorFile file;
  file.add("windows", std::move(windows));
  file.add("targets", std::move(targets));
  file.add("meta", std::move(meta));
  file.add("split", std::move(split));
  file.add("sensor_indices", index_tensor(dataset.sensor_indices));
  file.add("input_min", Tensor::from_vector(dataset.input_scaler.min));
  file.add("input_max", Tensor::from_vector(dataset.input_scaler.max));
  file.add("target_min", Tensor::from_vector(dataset.target_scaler.min));
  file.add("target_max", Tensor::from_vector(dataset.target_scaler.max));
  file.add("rank", Tensor::scalar(static_cast<double>(dataset.rank)));
  file.add("n_param_targets", Tensor::scalar(static_cast<double>(dataset.n_param_targets)));
  return file;
}

DatasetArtifact dataset_from_file(const TensorFile& file) {
  const Tensor& windows = file.get("windows");
  const Tensor& targets = file.get("targets");
  if (windows.dims.size() != 3 || targets.dims.size() != 2 || targets.dims[0] != windows.dims[0]) {
    throw FormatError("dataset: inconsistent windows/targets shapes");
  }
  DatasetArtifact out;
  LagDataset& d = out.data;
  const auto n = static_cast<Index>(windows.dims[0]);
  d.lag = static_cast<Index>(windows.dims[1]);
  d.n_sensors = static_cast<Index>(windows.dims[2]);
  d.windows = Eigen::Map<const RowMatrix>(windows.data.data(), n, d.lag * d.n_sensors);
  d.targets = Eigen::Map<const RowMatrix>(targets.data.data(), n, static_cast<Index>(targets.dims[1]));
  const Tensor& meta = file.get("meta");
  const Tensor& split = file.get("split");
  if (meta.data.size() != static_cast<std::size_t>(2 * n) || split.data.size() != static_cast<std::size_t>(n)) {
    throw FormatError("dataset: meta/split length mismatch");
  }
  for (Index i = 0; i < n; ++i) {
    d.meta.push_back(SampleRef{static_cast<Index>(meta.data[static_cast<std::size_t>(2 * i)]),
                               static_cast<Index>(meta.data[static_cast<std::size_t>(2 * i + 1)])});
    const double s = split.data[static_cast<std::size_t>(i)];
    if (s != 0.0 && s != 1.0 && s != 2.0) throw FormatError("dataset: invalid split label");
    d.split.push_back(static_cast<SplitLabel>(static_cast<int>(s)));
  }
  out.sensor_indices = indices_of(file, "sensor_indices");
  out.input_scaler = Scaler{file.get("input_min").to_vector(), file.get("input_max").to_vector()};
  out.target_scaler = Scaler{file.get("target_min").to_vector(), file.get("target_max").to_vector()};
  out.rank = count_of(file, "rank");
  out.n_param_targets = count_of(file, "n_param_targets");
  if (out.rank + out.n_param_targets != d.out_dim() ||
      static_cast<Index>(out.sensor_indices.size()) != d.n_sensors) {
    throw FormatError("dataset: metadata does not match tensor shapes");
  }
  return out;
}

TensorFile model_to_file(const TrainedModel& model) {
  model.net.validate();
  const ModelShape& shape = model.net.shape;
  TensorFile file;
  for (const ParamBlock& b : param_layout(shape)) {
    file.add(b.name, Tensor::from_matrix(model.net.block(b.name)));
  }
  file.add("input_min", Tensor::from_vector(model.net.input_scaler.min));
  file.add("input_max", Tensor::from_vector(model.net.input_scaler.max));
  file.add("target_min", Tensor::from_vector(model.net.target_scaler.min));
  file.add("target_max", Tensor::from_vector(model.net.target_scaler.max));
  file.add("sensor_indices", index_tensor(model.sensor_indices));
  file.add("decoder_hidden", index_tensor(shape.decoder_hidden));
  file.add("meta.lag", Tensor::scalar(static_cast<double>(shape.lag)));
  file.add("meta.n_sensors", Tensor::scalar(static_cast<double>(shape.n_sensors)));
  file.add("meta.hidden", Tensor::scalar(static_cast<double>(shape.hidden)));
  file.add("meta.layers", Tensor::scalar(static_cast<double>(shape.lstm_layers)));
  file.add("meta.out_dim", Tensor::scalar(static_cast<double>(shape.out_dim)));
  file.add("meta.rank", Tensor::scalar(static_cast<double>(model.rank)));
  file.add("meta.n_param_targets", Tensor::scalar(static_cast<double>(model.n_param_targets)));
  add_seed(file, "meta.init_seed", model.init_seed);
  add_seed(file, "meta.train_seed", model.train_seed);
  return file;
}

TrainedModel model_from_file(const TensorFile& file) {
  TrainedModel out;
  ModelShape& shape = out.net.shape;
  shape.lag = count_of(file, "meta.lag");
  shape.n_sensors = count_of(file, "meta.n_sensors");
  shape.hidden = count_of(file, "meta.hidden");
  shape.lstm_layers = count_of(file, "meta.layers");
  shape.out_dim = count_of(file, "meta.out_dim");
  shape.decoder_hidden = indices_of(file, "decoder_hidden");
  try {
    shape.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
  out.net.params = Vector::Zero(param_count(shape));
  for (const ParamBlock& b : param_layout(shape)) {
    const Matrix m = file.get(b.name).to_matrix();
    if (m.rows() != b.rows || m.cols() != b.cols) {
      throw FormatError("model: block '" + b.name + "' has the wrong shape");
    }
    out.net.block(b.name) = m;
  }
  out.net.input_scaler = Scaler{file.get("input_min").to_vector(), file.get("input_max").to_vector()};
  out.net.target_scaler = Scaler{file.get("target_min").to_vector(), file.get("target_max").to_vector()};
  out.sensor_indices = indices_of(file, "sensor_indices");
  out.rank = count_of(file, "meta.rank");
  out.n_param_targets = count_of(file, "meta.n_param_targets");
  out.init_seed = seed_of(file, "meta.init_seed");
  out.train_seed = seed_of(file, "meta.train_seed");
  if (out.rank + out.n_param_targets != shape.out_dim ||
      static_cast<Index>(out.sensor_indices.size()) != shape.n_sensors) {
    throw FormatError("model: metadata does not match the network shape");
  }
  try {
    out.net.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
  return out;
}

}  // namespace shredrom
