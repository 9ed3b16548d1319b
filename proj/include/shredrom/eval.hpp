#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shredrom/dataset.hpp"
#include "shredrom/linalg.hpp"
#include "shredrom/model.hpp"

namespace shredrom {

struct RelativeErrors {
  double mean = 0.0;
  std::vector<double> per_sample;  ///< one per included row
  std::vector<Index> rows;         ///< row index of each included sample
  Index skipped = 0;               ///< rows whose truth has zero norm
};

/// ||u - u_hat|| / ||u|| per row (one state per row) and their mean.
RelativeErrors mean_relative_error(const Eigen::Ref<const Matrix>& truth,
                                   const Eigen::Ref<const Matrix>& pred);

/// Unscaled network outputs for every time index of one trajectory's raw
/// readings (N_t x N_s -> N_t x out_dim). Row k only sees readings 0..k.
Matrix predict_trajectory(const ShredModel& model, const Eigen::Ref<const Matrix>& raw_sensors);

/// Full states from the first `basis.rank()` outputs (N_t x N_h).
Matrix reconstruct_trajectory(const ShredModel& model, const PODBasis& basis,
                              const Eigen::Ref<const Matrix>& raw_sensors);

/// Mean of the members' unscaled outputs. All members must share lag,
/// n_sensors and out_dim.
Matrix ensemble_outputs(std::span<const ShredModel> models, const Eigen::Ref<const Matrix>& raw_sensors);

/// States reconstructed from the averaged POD coefficients.
Matrix ensemble_predict(std::span<const ShredModel> models, const Eigen::Ref<const Matrix>& raw_sensors,
                        const PODBasis& basis);

/// Mean absolute error per column.
Vector parameter_mae(const Eigen::Ref<const Matrix>& truth, const Eigen::Ref<const Matrix>& pred);

struct EvalReport {
  double mean_relative_error = 0.0;
  std::vector<double> per_sample;
  std::vector<SampleRef> samples;  ///< (scenario, time) of each per-sample value
  Index skipped = 0;
  std::vector<std::string> param_names;
  std::vector<double> param_mae;  ///< empty without a parameter head
  std::vector<std::pair<std::string, std::string>> metadata;

  /// Rows of `kind,key,scenario,time,value`; numbers use 17 significant digits.
  void write_csv(std::ostream& out) const;
  static EvalReport read_csv(std::istream& in);
};

enum class SweepAxis { lag, n_sensors };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view text);

struct CellOutcome {
  double test_eps = 0.0;
  double val_eps = 0.0;
  double train_seconds = 0.0;
};

struct SweepCell {
  SweepAxis axis = SweepAxis::lag;
  Index value = 0;
  std::uint64_t placement_seed = 0;
  std::optional<CellOutcome> outcome;  ///< empty when the run failed
  std::string error;
};

/// Trains and scores one (axis value, placement seed) cell.
using CellRunner = std::function<CellOutcome(Index value, std::uint64_t placement_seed)>;

/// Runs every (value, placement) cell. Placement p uses seed
/// derive_seed(seed, p) for all values, so cells are paired across values.
/// Failing cells are recorded, not rethrown.
std::vector<SweepCell> sweep(SweepAxis axis, std::span<const Index> values, Index n_placements,
                             std::uint64_t seed, const CellRunner& run, std::size_t workers = 1);

struct SweepSummary {
  Index value = 0;
  Index succeeded = 0;
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

/// Test-error quantiles per axis value, in first-appearance order.
std::vector<SweepSummary> summarize_sweep(std::span<const SweepCell> cells);

/// Linear-interpolation quantile of a nonempty sample.
double quantile(std::vector<double> values, double q);

/// `axis,value,placement_seed,test_eps,val_eps,train_seconds`; failed cells
/// print nan.
void write_sweep_csv(std::ostream& out, std::span<const SweepCell> cells);

}  // namespace shredrom
