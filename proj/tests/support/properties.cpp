#include "properties.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "shredrom/error.hpp"
#include "shredrom/pipeline.hpp"
#include "shredrom/rng.hpp"

namespace shredrom::props {

namespace {

Matrix random_matrix(Index rows, Index cols, SplitMix64& rng) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

}  // namespace

double gradient_fd_error(std::uint64_t seed, double dropout) {
  ModelShape shape;
  shape.n_sensors = 2;
  shape.hidden = 4;
  shape.lstm_layers = 2;
  shape.decoder_hidden = {5, 6};
  shape.out_dim = 3;
  shape.lag = 3;
  ShredModel model = init_model(shape, seed);
  SplitMix64 rng(derive_seed(seed, 1));
  for (Index i = 0; i < model.params.size(); ++i) model.params[i] = rng.uniform() - 0.5;

  const Index batch = 4;
  RowMatrix windows(batch, shape.lag * shape.n_sensors);
  RowMatrix targets(batch, shape.out_dim);
  for (Index i = 0; i < windows.size(); ++i) windows.data()[i] = rng.uniform();
  for (Index i = 0; i < targets.size(); ++i) targets.data()[i] = rng.uniform();

  const BackwardOptions options{dropout, derive_seed(seed, 2), 0};
  const Vector grad = backward(model, windows, targets, options).grad;
  const double h = 1e-5;
  double worst = 0.0;
  for (Index i = 0; i < model.params.size(); ++i) {
    const double saved = model.params[i];
    model.params[i] = saved + h;
    const double up = backward(model, windows, targets, options).loss;
    model.params[i] = saved - h;
    const double down = backward(model, windows, targets, options).loss;
    model.params[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
    worst = std::max(worst, std::abs(fd - grad[i]) / scale);
  }
  return worst;
}

double etdrk4_self_order(double dt0) {
  KSConfig config;
  config.nu = 1.0;
  config.omega = 1.0;
  config.horizon = 1.0;
  const auto final_state = [&](double dt) {
    config.dt = dt;
    config.save_stride = config.n_steps();
    return Vector(ks_simulate(config).row(1).transpose());
  };
  const Vector a = final_state(dt0);
  const Vector b = final_state(dt0 / 2);
  const Vector c = final_state(dt0 / 4);
  return std::log2((a - b).norm() / (b - c).norm());
}

double linear_growth_error(double nu, int wavenumber) {
  KSConfig config;
  config.nu = nu;
  config.horizon = 10.0;
  config.dt = 0.01;
  config.save_stride = 1000;
  config.n_grid = 64;
  const Vector x = ks_grid(config.n_grid, config.domain_length);
  const double k = 2.0 * std::numbers::pi * wavenumber / config.domain_length;
  const Vector u0 = 1e-8 * (k * x.array()).cos().matrix();
  const Matrix states = ks_simulate(config, u0);
  const double measured = std::log(states.row(1).norm() / states.row(0).norm()) / config.horizon;
  const double expected = k * k - nu * k * k * k * k;
  return std::abs(measured - expected) / std::abs(expected);
}

double pod_orthonormality_error(std::uint64_t seed) {
  SplitMix64 rng(seed);
  const Matrix x = random_matrix(100, 12, rng) * random_matrix(12, 400, rng);
  const PODBasis basis = pod_fit(x, 10, seed);
  const Index r = basis.rank();
  return (basis.modes.transpose() * basis.modes - Matrix::Identity(r, r)).cwiseAbs().maxCoeff();
}

bool pod_truncation_monotone(std::uint64_t seed) {
  SplitMix64 rng(seed);
  const Matrix x = random_matrix(60, 30, rng) * random_matrix(30, 200, rng);
  const PODBasis basis = pod_fit(x, 20, seed);
  double prev = std::numeric_limits<double>::infinity();
  for (Index r = 1; r <= basis.rank(); ++r) {
    const double err = pod_truncation_error(pod_truncate(basis, r), x);
    if (err > prev * (1.0 + 1e-12)) return false;
    prev = err;
  }
  return true;
}

double ode_component1_error() {
  double worst = 0.0;
  for (double mu : {1.0, 0.5}) {
    std::array<OdeMeasurement, 3> m;
    const std::array<double, 3> times{0.0, 0.5, 1.0};
    for (std::size_t j = 0; j < 3; ++j) m[j] = {times[j], ode_solution(times[j], mu)[0]};
    const Eigen::Vector3d c = ode_recover_coeffs(m, 1, mu);
    worst = std::max(worst, (c - ode_coefficients(mu)).cwiseAbs().maxCoeff());
  }
  return worst;
}

bool ode_components23_unobservable() {
  for (int component : {2, 3}) {
    std::array<OdeMeasurement, 3> m;
    const std::array<double, 3> times{0.0, 0.5, 1.0};
    for (std::size_t j = 0; j < 3; ++j) {
      m[j] = {times[j], ode_solution(times[j], 1.0)[component - 1]};
    }
    try {
      ode_recover_coeffs(m, component, 1.0);
      return false;
    } catch (const NotObservableError&) {
    }
  }
  return true;
}

bool srd1_roundtrip_bitwise(std::uint64_t seed) {
  SplitMix64 rng(seed);
  TensorFile file;
  file.add("matrix", Tensor::from_matrix(random_matrix(7, 3, rng)));
  file.add("scalar", Tensor::scalar(-0.0));
  Tensor special;
  special.dims = {2, 2, 2};
  special.data = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::denorm_min(),
                  1e308, -1e-308, 0.1, 1.0 / 3.0};
  file.add("special", special);
  Tensor empty;
  empty.dims = {0, 4};
  file.add("empty", empty);
  const std::string bytes = file.encode();
  return TensorFile::decode(bytes).encode() == bytes;
}

bool stage_determinism(std::string* detail) {
  const char* text = R"(
[ks]
horizon = 20
save_stride = 20
n_trajectories = 10
[pod]
rank = 5
[dataset]
lag = 4
[model]
hidden = 6
decoder_hidden = 12, 10
[train]
epochs = 2
phase_split = 1
batch_size = 32
)";
  ExperimentConfig config = ExperimentConfig::parse(text);
  config.master_seed = 7;
  const auto run = [&]() {
    std::vector<std::pair<std::string, std::string>> files;
    const TrajectorySet set = run_generate(config);
    files.emplace_back("trajectories", trajectories_to_file(set).encode());
    const PodArtifact pod = run_pod(config, set);
    files.emplace_back("pod", pod_to_file(pod).encode());
    const SplitPlan plan = experiment_split(config, set);
    const DatasetArtifact dataset =
        build_dataset(set, pod.basis, plan, dataset_options(config, set.state_dim()));
    files.emplace_back("dataset", dataset_to_file(dataset).encode());
    const TrainOutcome trained = run_train(config, dataset, config.init_seed(), config.train_seed());
    files.emplace_back("model", model_to_file(trained.model).encode());
    return files;
  };
  const auto first = run();
  const auto second = run();
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i].second != second[i].second) {
      if (detail) *detail = first[i].first;
      return false;
    }
  }
  return true;
}

}  // namespace shredrom::props
