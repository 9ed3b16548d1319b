#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shredrom/datagen.hpp"
#include "shredrom/dataset.hpp"
#include "shredrom/eval.hpp"
#include "shredrom/train.hpp"

namespace shredrom {

struct KsSection {
  KSConfig solver;  ///< nu and omega are drawn per scenario
  ParamRange nu{1.0, 2.0};
  ParamRange omega{1.0, 5.0};
  Index n_trajectories = 500;
  Index max_resamples = 10;
  std::optional<std::uint64_t> seed;
};

struct PodSection {
  Index rank = 20;
  Index oversample = 10;
  Index power_iters = 2;
  std::optional<std::uint64_t> seed;
};

struct SensorsSection {
  Index n_sensors = 2;
  std::vector<Index> indices;  ///< explicit placement; random when empty
  double noise_std = 0.0;
  std::optional<std::uint64_t> noise_seed;
  std::optional<std::uint64_t> placement_seed;
};

struct DatasetSection {
  Index lag = 50;
  SplitMode split = SplitMode::parameterwise;
  SplitFractions fractions;
  std::optional<std::uint64_t> split_seed;
  /// Append (nu, omega) to the regression targets.
  bool estimate_params = false;
};

struct ModelSection {
  Index hidden = 64;
  Index lstm_layers = 2;
  std::vector<Index> decoder_hidden{350, 400};
  double forget_bias = 1.0;
  std::optional<std::uint64_t> init_seed;
};

struct EvalSection {
  Index members = 20;
  std::optional<std::uint64_t> noise_seed;  ///< evaluation-sensor noise draw
  SweepAxis sweep_axis = SweepAxis::lag;
  std::vector<Index> sweep_values{1, 10, 25, 50};
  Index sweep_placements = 10;
  std::optional<std::uint64_t> sweep_seed;
  /// Concurrent sweep cells; 0 = SHREDROM_THREADS / hardware.
  Index sweep_workers = 0;
};

/// `[section]` headers followed by `key = value` lines; `#` starts a comment.
/// Unknown sections or keys are rejected. Seeds left unset derive from
/// master_seed (settable with --seed).
struct ExperimentConfig {
  std::uint64_t master_seed = 0;
  KsSection ks;
  PodSection pod;
  SensorsSection sensors;
  DatasetSection dataset;
  ModelSection model;
  TrainConfig train;
  EvalSection eval;
  /// Whether [train] seed was given explicitly.
  bool train_seed_set = false;

  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Every accepted key as "section.key".
  static std::vector<std::string> known_keys();

  std::uint64_t ks_seed() const;
  std::uint64_t pod_seed() const;
  std::uint64_t split_seed() const;
  std::uint64_t placement_seed() const;
  std::uint64_t noise_seed() const;
  std::uint64_t eval_noise_seed() const;
  std::uint64_t init_seed() const;
  std::uint64_t train_seed() const;
  std::uint64_t sweep_seed() const;
};

}  // namespace shredrom
