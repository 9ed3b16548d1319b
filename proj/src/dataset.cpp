#include "shredrom/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include <boost/random/uniform_int_distribution.hpp>

#include "shredrom/error.hpp"
#include "shredrom/rng.hpp"

namespace shredrom {

// Fisher-Yates with a portable integer distribution.
std::vector<Index> seeded_permutation(Index n, std::uint64_t seed) {
  std::vector<Index> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), Index{0});
  SplitMix64 rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    boost::random::uniform_int_distribution<Index> pick(0, i);
    std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(pick(rng))]);
  }
  return p;
}

void SensorConfig::validate(Index n_grid) const {
  if (indices.empty()) throw InvalidArgument("sensors: at least one index required");
  std::set<Index> seen;
  for (Index idx : indices) {
    if (idx < 0 || idx >= n_grid) {
      throw InvalidArgument("sensors: index " + std::to_string(idx) +
                            " outside [0, " + std::to_string(n_grid) + ")");
    }
    if (!seen.insert(idx).second) {
      throw InvalidArgument("sensors: duplicate index " + std::to_string(idx));
    }
  }
  if (!(noise_std >= 0.0)) throw InvalidArgument("sensors: noise_std must be >= 0");
}

SensorArray extract_sensors(const TrajectorySet& trajectories, const SensorConfig& config) {
  config.validate(trajectories.state_dim());
  SensorArray out;
  out.reserve(trajectories.states.size());
  const auto ns = static_cast<Index>(config.indices.size());
  for (const Matrix& states : trajectories.states) {
    Matrix s(states.rows(), ns);
    for (Index j = 0; j < ns; ++j) s.col(j) = states.col(config.indices[static_cast<std::size_t>(j)]);
    out.push_back(std::move(s));
  }
  return out;
}

SensorArray add_noise(const SensorArray& sensors, double noise_std, std::uint64_t seed) {
  if (!(noise_std >= 0.0)) throw InvalidArgument("add_noise: noise_std must be >= 0");
  SensorArray out = sensors;
  if (noise_std == 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    SplitMix64 rng(derive_seed(seed, i));
    Matrix& block = out[i];
    // Row-major draw order: time, then sensor.
    for (Index k = 0; k < block.rows(); ++k) {
      for (Index j = 0; j < block.cols(); ++j) block(k, j) += noise_std * rng.normal();
    }
  }
  return out;
}

std::vector<Index> random_placement(Index n_grid, Index n_sensors, std::uint64_t seed) {
  if (n_sensors < 1 || n_sensors > n_grid) {
    throw InvalidArgument("random_placement: need 1 <= n_sensors <= n_grid");
  }
  std::vector<Index> p = seeded_permutation(n_grid, seed);
  p.resize(static_cast<std::size_t>(n_sensors));
  return p;
}

Matrix Scaler::apply(const Eigen::Ref<const Matrix>& rows) const {
  if (rows.cols() != size()) throw DimensionError("Scaler::apply: feature count mismatch");
  Matrix out(rows.rows(), rows.cols());
  for (Index j = 0; j < size(); ++j) {
    const double range = max[j] - min[j];
    if (range > 0.0) {
      out.col(j) = (rows.col(j).array() - min[j]) / range;
    } else {
      out.col(j).setZero();
    }
  }
  return out;
}

Matrix Scaler::invert(const Eigen::Ref<const Matrix>& rows) const {
  if (rows.cols() != size()) throw DimensionError("Scaler::invert: feature count mismatch");
  Matrix out(rows.rows(), rows.cols());
  for (Index j = 0; j < size(); ++j) {
    const double range = max[j] - min[j];
    out.col(j) = rows.col(j).array() * range + min[j];
  }
  return out;
}

Scaler fit_scaler(const Eigen::Ref<const Matrix>& rows) {
  if (rows.rows() == 0 || rows.cols() == 0) throw InvalidArgument("fit_scaler: empty input");
  require_finite(rows, "fit_scaler");
  return Scaler{rows.colwise().minCoeff().transpose(), rows.colwise().maxCoeff().transpose()};
}

std::string_view to_string(SplitLabel label) {
  switch (label) {
    case SplitLabel::train: return "train";
    case SplitLabel::val: return "val";
    case SplitLabel::test: return "test";
  }
  return "?";
}

std::string_view to_string(SplitMode mode) {
  return mode == SplitMode::timewise ? "timewise" : "parameterwise";
}

SplitMode parse_split_mode(std::string_view text) {
  if (text == "timewise") return SplitMode::timewise;
  if (text == "parameterwise") return SplitMode::parameterwise;
  throw InvalidArgument("unknown split mode '" + std::string(text) + "'");
}

SplitLabel SplitPlan::label(Index scenario, Index time) const {
  const Index g = mode == SplitMode::parameterwise ? scenario : time;
  return groups.at(static_cast<std::size_t>(g));
}

Matrix SplitPlan::mask(SplitLabel which) const {
  Matrix m(n_scenarios, n_times);
  for (Index i = 0; i < n_scenarios; ++i) {
    for (Index k = 0; k < n_times; ++k) m(i, k) = label(i, k) == which ? 1.0 : 0.0;
  }
  return m;
}

std::vector<Index> SplitPlan::scenarios(SplitLabel which) const {
  std::vector<Index> out;
  for (Index i = 0; i < n_scenarios; ++i) {
    if (mode == SplitMode::timewise) {
      if (count(which) > 0) out.push_back(i);
    } else if (groups[static_cast<std::size_t>(i)] == which) {
      out.push_back(i);
    }
  }
  return out;
}

Index SplitPlan::count(SplitLabel which) const {
  return static_cast<Index>(std::count(groups.begin(), groups.end(), which));
}

Index SplitPlan::sample_count(SplitLabel which) const {
  return count(which) * (mode == SplitMode::parameterwise ? n_times : n_scenarios);
}

SplitPlan make_split(SplitMode mode, Index n_scenarios, Index n_times,
                     const SplitFractions& fractions, std::uint64_t seed) {
  const double total = fractions.train + fractions.val + fractions.test;
  if (std::abs(total - 1.0) > 1e-9 || fractions.train < 0 || fractions.val < 0 ||
      fractions.test < 0) {
    throw InvalidArgument("make_split: fractions must be nonnegative and sum to 1");
  }
  if (n_scenarios < 1 || n_times < 1) throw InvalidArgument("make_split: empty grid");

  const Index n = mode == SplitMode::parameterwise ? n_scenarios : n_times;
  const auto floor_count = [n](double f) {
    return static_cast<Index>(std::floor(f * static_cast<double>(n) + 1e-9));
  };
  const Index n_val = floor_count(fractions.val);
  const Index n_test = floor_count(fractions.test);
  const Index n_train = n - n_val - n_test;
  if (n_train < 1 || n_val < 1 || n_test < 1) {
    throw InvalidArgument("make_split: " + std::string(to_string(mode)) + " split of " +
                          std::to_string(n) + " groups leaves an empty partition");
  }

  SplitPlan plan;
  plan.mode = mode;
  plan.n_scenarios = n_scenarios;
  plan.n_times = n_times;
  plan.groups.assign(static_cast<std::size_t>(n), SplitLabel::train);
  const std::vector<Index> order = seeded_permutation(n, seed);
  for (Index r = n_train; r < n; ++r) {
    plan.groups[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] =
        r < n_train + n_val ? SplitLabel::val : SplitLabel::test;
  }
  return plan;
}

Eigen::Map<const RowMatrix> LagDataset::window(Index sample) const {
  return Eigen::Map<const RowMatrix>(windows.row(sample).data(), lag, n_sensors);
}

std::vector<Index> LagDataset::indices(SplitLabel which) const {
  std::vector<Index> out;
  for (std::size_t s = 0; s < split.size(); ++s) {
    if (split[s] == which) out.push_back(static_cast<Index>(s));
  }
  return out;
}

RowMatrix lag_windows(const Eigen::Ref<const Matrix>& scaled_sensors, Index lag) {
  if (lag < 1) throw InvalidArgument("lag must be >= 1");
  const Index nt = scaled_sensors.rows();
  const Index ns = scaled_sensors.cols();
  RowMatrix out = RowMatrix::Zero(nt, lag * ns);
  for (Index k = 0; k < nt; ++k) {
    for (Index p = 0; p < lag; ++p) {
      const Index src = k - lag + 1 + p;
      if (src < 0) continue;
      out.row(k).segment(p * ns, ns) = scaled_sensors.row(src);
    }
  }
  return out;
}

LagDataset build_lag_windows(const SensorArray& scaled_sensors,
                             const std::vector<Matrix>& scaled_targets, Index lag) {
  if (lag < 1) throw InvalidArgument("build_lag_windows: lag must be >= 1");
  if (scaled_sensors.empty()) throw InvalidArgument("build_lag_windows: no scenarios");
  if (scaled_sensors.size() != scaled_targets.size()) {
    throw DimensionError("build_lag_windows: sensor and target scenario counts differ");
  }
  const Index ns = scaled_sensors.front().cols();
  const Index out_dim = scaled_targets.front().cols();
  Index total = 0;
  for (std::size_t i = 0; i < scaled_sensors.size(); ++i) {
    if (scaled_sensors[i].cols() != ns || scaled_targets[i].cols() != out_dim ||
        scaled_sensors[i].rows() != scaled_targets[i].rows()) {
      throw DimensionError("build_lag_windows: inconsistent scenario shapes");
    }
    total += scaled_sensors[i].rows();
  }

  LagDataset ds;
  ds.lag = lag;
  ds.n_sensors = ns;
  ds.windows.resize(total, lag * ns);
  ds.targets.resize(total, out_dim);
  ds.meta.reserve(static_cast<std::size_t>(total));
  ds.split.assign(static_cast<std::size_t>(total), SplitLabel::train);

  Index row = 0;
  for (std::size_t i = 0; i < scaled_sensors.size(); ++i) {
    const Index nt = scaled_sensors[i].rows();
    ds.windows.middleRows(row, nt) = lag_windows(scaled_sensors[i], lag);
    ds.targets.middleRows(row, nt) = scaled_targets[i];
    for (Index k = 0; k < nt; ++k) ds.meta.push_back({static_cast<Index>(i), k});
    row += nt;
  }
  return ds;
}

void assign_split(LagDataset& dataset, const SplitPlan& plan) {
  for (std::size_t s = 0; s < dataset.meta.size(); ++s) {
    const SampleRef& ref = dataset.meta[s];
    if (ref.scenario >= plan.n_scenarios || ref.time >= plan.n_times) {
      throw DimensionError("assign_split: sample outside the split grid");
    }
    dataset.split[s] = plan.label(ref.scenario, ref.time);
  }
}

}  // namespace shredrom
