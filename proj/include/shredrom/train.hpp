#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "shredrom/dataset.hpp"
#include "shredrom/error.hpp"
#include "shredrom/model.hpp"

namespace shredrom {

struct TrainConfig {
  Index epochs = 200;
  double lr_phase1 = 1e-3;
  double lr_phase2 = 1e-4;
  /// Last epoch (1-based) trained with lr_phase1.
  Index phase_split = 100;
  Index batch_size = 64;
  double dropout = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  /// Global gradient-norm cap; 0 disables clipping.
  double clip_norm = 0.0;
  /// Samples per gradient chunk inside a batch (0 = whole batch).
  Index grad_chunk = 0;
  std::uint64_t seed = 0;

  void validate() const;
  /// Learning rate of a 1-based epoch.
  double learning_rate(Index epoch) const;
};

struct EpochRecord {
  Index epoch = 0;  ///< 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
};

using TrainHistory = std::vector<EpochRecord>;

void write_history_csv(std::ostream& out, const TrainHistory& history);

/// First and second moment estimates, shaped like the parameter vector.
struct AdamState {
  Vector m;
  Vector v;
  Index step = 0;

  explicit AdamState(Index n = 0) : m(Vector::Zero(n)), v(Vector::Zero(n)) {}
};

/// One bias-corrected Adam update at step t (1-based). Throws NonFiniteError
/// when the update would produce a non-finite parameter.
void adam_step(Eigen::Ref<Vector> params, const Eigen::Ref<const Vector>& grads,
               Eigen::Ref<Vector> m, Eigen::Ref<Vector> v, Index t, double lr,
               double beta1, double beta2, double eps);

struct TrainResult {
  ShredModel best;
  TrainHistory history;
  Index best_epoch = 0;
  double best_val_loss = 0.0;
};

/// Validation loss became non-finite; carries the epochs completed so far.
class TrainingDiverged : public DivergenceError {
 public:
  TrainingDiverged(const std::string& what, TrainHistory history)
      : DivergenceError(what), history_(std::move(history)) {}
  const TrainHistory& history() const noexcept { return history_; }

 private:
  TrainHistory history_;
};

/// Optional per-epoch observer (e.g. progress logging).
using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch Adam with the two-level learning-rate schedule; returns the
/// parameters with the lowest validation loss.
TrainResult train(const ShredModel& initial, const LagDataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

}  // namespace shredrom
