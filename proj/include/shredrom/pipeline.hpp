#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "shredrom/config.hpp"
#include "shredrom/datagen.hpp"
#include "shredrom/dataset.hpp"
#include "shredrom/eval.hpp"
#include "shredrom/linalg.hpp"
#include "shredrom/model.hpp"
#include "shredrom/srd1.hpp"
#include "shredrom/train.hpp"

namespace shredrom {

using LogFn = std::function<void(const std::string&)>;

struct PodArtifact {
  PODBasis basis;
  Matrix fit_mask;  ///< N_p x N_t, 1 for snapshots used by the fit
  /// Mean per-snapshot relative reconstruction error on test snapshots.
  double test_error = 0.0;
  /// ||X - P X||_F / ||X||_F over test snapshots.
  double test_error_fro = 0.0;
};

struct DatasetArtifact {
  LagDataset data;
  std::vector<Index> sensor_indices;
  Scaler input_scaler;
  Scaler target_scaler;
  Index rank = 0;
  Index n_param_targets = 0;
};

/// Network plus the metadata needed to evaluate it on raw trajectories.
struct TrainedModel {
  ShredModel net;
  std::vector<Index> sensor_indices;
  Index rank = 0;
  Index n_param_targets = 0;
  std::uint64_t init_seed = 0;
  std::uint64_t train_seed = 0;
};

/// Options of one dataset build; defaults come from the config.
struct DatasetOptions {
  std::vector<Index> sensor_indices;
  Index lag = 50;
  double noise_std = 0.0;
  std::uint64_t noise_seed = 0;
  bool estimate_params = false;
};

DatasetOptions dataset_options(const ExperimentConfig& config, Index n_grid);

/// Sensor grid indices: explicit from the config or a seeded random placement.
std::vector<Index> experiment_sensors(const ExperimentConfig& config, Index n_grid);

SplitPlan experiment_split(const ExperimentConfig& config, const TrajectorySet& trajectories);

TrajectorySet run_generate(const ExperimentConfig& config, const LogFn& log = {});

/// POD on train-labelled snapshots only.
PodArtifact run_pod(const ExperimentConfig& config, const TrajectorySet& trajectories);

/// Throws LeakageError when the POD fit used any non-train snapshot.
void check_leakage(const PodArtifact& pod, const SplitPlan& plan);

DatasetArtifact build_dataset(const TrajectorySet& trajectories, const PODBasis& basis,
                              const SplitPlan& plan, const DatasetOptions& options);

ModelShape experiment_shape(const ExperimentConfig& config, const DatasetArtifact& dataset);

struct TrainOutcome {
  TrainedModel model;
  TrainHistory history;
  Index best_epoch = 0;
  double best_val_loss = 0.0;
  double seconds = 0.0;
};

TrainOutcome run_train(const ExperimentConfig& config, const DatasetArtifact& dataset,
                       std::uint64_t init_seed, std::uint64_t train_seed,
                       const EpochCallback& on_epoch = {});

/// Reconstructs every scenario holding `which` samples from freshly extracted
/// (optionally noisy) sensor readings and scores those samples.
EvalReport evaluate_model(const TrainedModel& model, const TrajectorySet& trajectories,
                          const PODBasis& basis, const SplitPlan& plan, double noise_std,
                          std::uint64_t noise_seed, SplitLabel which = SplitLabel::test);

/// Same protocol for an ensemble averaging POD coefficients.
EvalReport evaluate_ensemble(std::span<const TrainedModel> members, const TrajectorySet& trajectories,
                             const PODBasis& basis, const SplitPlan& plan, double noise_std,
                             std::uint64_t noise_seed, SplitLabel which = SplitLabel::test);

struct EnsembleOutcome {
  std::vector<TrainedModel> members;
  std::vector<double> member_eps;
  double mean_member_eps = 0.0;
  double ensemble_eps = 0.0;
  EvalReport report;
};

/// Members share trajectories and placement; member m draws training noise,
/// init and training streams from child m of the configured seeds. All
/// members are scored on one shared evaluation noise draw.
EnsembleOutcome run_ensemble(const ExperimentConfig& config, const TrajectorySet& trajectories,
                             const PodArtifact& pod, Index members, double noise_std,
                             const LogFn& log = {});

/// Lag or sensor-count sweep over random placements.
std::vector<SweepCell> run_sweep(const ExperimentConfig& config, const TrajectorySet& trajectories,
                                 const PodArtifact& pod, SweepAxis axis, std::span<const Index> values,
                                 Index placements, const LogFn& log = {});

TensorFile trajectories_to_file(const TrajectorySet& trajectories);
TrajectorySet trajectories_from_file(const TensorFile& file);
TensorFile pod_to_file(const PodArtifact& pod);
PodArtifact pod_from_file(const TensorFile& file);
TensorFile dataset_to_file(const DatasetArtifact& dataset);
DatasetArtifact dataset_from_file(const TensorFile& file);
TensorFile model_to_file(const TrainedModel& model);
TrainedModel model_from_file(const TensorFile& file);

}  // namespace shredrom
