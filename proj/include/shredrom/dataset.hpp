#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "shredrom/datagen.hpp"
#include "shredrom/linalg.hpp"

namespace shredrom {

struct SensorConfig {
  std::vector<Index> indices;  ///< grid indices, distinct
  double noise_std = 0.0;
  std::uint64_t noise_seed = 0;

  void validate(Index n_grid) const;
};

/// Per scenario, an N_t x N_s block of readings.
using SensorArray = std::vector<Matrix>;

/// Gathers u(x_s, t_k) for every scenario. Noise is not applied here.
SensorArray extract_sensors(const TrajectorySet& trajectories, const SensorConfig& config);

/// Adds i.i.d. N(0, noise_std^2) noise. Scenario i uses stream
/// derive_seed(seed, i); noise_std == 0 returns the input unchanged.
SensorArray add_noise(const SensorArray& sensors, double noise_std, std::uint64_t seed);

/// Seeded uniform permutation of [0, n).
std::vector<Index> seeded_permutation(Index n, std::uint64_t seed);

/// n_sensors distinct grid indices drawn uniformly without replacement.
std::vector<Index> random_placement(Index n_grid, Index n_sensors, std::uint64_t seed);

/// Per-feature min-max scaling to [0, 1]; constant features map to 0.
struct Scaler {
  Vector min;
  Vector max;

  Index size() const noexcept { return min.size(); }
  /// rows: one sample per row, one feature per column.
  Matrix apply(const Eigen::Ref<const Matrix>& rows) const;
  Matrix invert(const Eigen::Ref<const Matrix>& rows) const;
};

Scaler fit_scaler(const Eigen::Ref<const Matrix>& rows);

enum class SplitLabel : std::uint8_t { train = 0, val = 1, test = 2 };
enum class SplitMode { timewise, parameterwise };

std::string_view to_string(SplitLabel label);
std::string_view to_string(SplitMode mode);
SplitMode parse_split_mode(std::string_view text);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

/// Group labels for a scenario x time grid. Groups are scenarios
/// (parameterwise) or time indices shared by all scenarios (timewise).
struct SplitPlan {
  SplitMode mode = SplitMode::parameterwise;
  Index n_scenarios = 0;
  Index n_times = 0;
  std::vector<SplitLabel> groups;

  SplitLabel label(Index scenario, Index time) const;
  /// N_p x N_t indicator of one label.
  Matrix mask(SplitLabel which) const;
  /// Scenarios holding at least one sample with the label, ascending.
  std::vector<Index> scenarios(SplitLabel which) const;
  /// Groups carrying the label.
  Index count(SplitLabel which) const;
  /// (scenario, time) samples carrying the label.
  Index sample_count(SplitLabel which) const;
};

/// Random partition of the groups. Validation and test receive
/// floor(fraction * n) groups each and training the remainder.
SplitPlan make_split(SplitMode mode, Index n_scenarios, Index n_times,
                     const SplitFractions& fractions, std::uint64_t seed);

struct SampleRef {
  Index scenario;
  Index time;
};

/// Supervised lag windows. Window rows are oldest-first and pre-padded with
/// zero rows (in scaled space) at the start of each trajectory.
struct LagDataset {
  Index lag = 1;
  Index n_sensors = 0;
  RowMatrix windows;  ///< n_samples x (lag * n_sensors)
  RowMatrix targets;  ///< n_samples x out_dim
  std::vector<SampleRef> meta;
  std::vector<SplitLabel> split;

  Index size() const noexcept { return windows.rows(); }
  Index out_dim() const noexcept { return targets.cols(); }
  /// lag x n_sensors view of one window.
  Eigen::Map<const RowMatrix> window(Index sample) const;
  /// Sample indices carrying the label, in (scenario, time) order.
  std::vector<Index> indices(SplitLabel which) const;
};

/// Windows of one trajectory: row k holds readings k-lag+1 .. k, flattened.
RowMatrix lag_windows(const Eigen::Ref<const Matrix>& scaled_sensors, Index lag);

/// One sample for every (scenario, time). All samples start labelled train.
LagDataset build_lag_windows(const SensorArray& scaled_sensors,
                             const std::vector<Matrix>& scaled_targets, Index lag);

void assign_split(LagDataset& dataset, const SplitPlan& plan);

}  // namespace shredrom
