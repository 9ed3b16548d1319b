#include "shredrom/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "shredrom/csv.hpp"
#include "shredrom/error.hpp"
#include "shredrom/rng.hpp"

namespace shredrom {

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("train: epochs must be >= 1");
  if (!(lr_phase1 >= 0.0) || !(lr_phase2 >= 0.0)) throw InvalidArgument("train: lr must be >= 0");
  if (phase_split < 0 || phase_split > epochs) throw InvalidArgument("train: phase_split must lie in [0, epochs]");
  if (batch_size < 1) throw InvalidArgument("train: batch_size must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("train: dropout must be in [0, 1)");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw InvalidArgument("train: Adam betas must be in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw InvalidArgument("train: adam_eps must be > 0");
  if (!(clip_norm >= 0.0)) throw InvalidArgument("train: clip_norm must be >= 0");
  if (grad_chunk < 0) throw InvalidArgument("train: grad_chunk must be >= 0");
}

double TrainConfig::learning_rate(Index epoch) const {
  return epoch <= phase_split ? lr_phase1 : lr_phase2;
}

void write_history_csv(std::ostream& out, const TrainHistory& history) {
  out << "epoch,train_loss,val_loss,lr,seconds\n";
  for (const EpochRecord& r : history) {
    out << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.val_loss) << ','
        << format_double(r.lr) << ',' << format_double(r.seconds) << '\n';
  }
}

void adam_step(Eigen::Ref<Vector> params, const Eigen::Ref<const Vector>& grads,
               Eigen::Ref<Vector> m, Eigen::Ref<Vector> v, Index t, double lr,
               double beta1, double beta2, double eps) {
  if (params.size() != grads.size() || params.size() != m.size() || params.size() != v.size()) {
    throw DimensionError("adam_step: parameter, gradient and moment sizes differ");
  }
  if (t < 1) throw InvalidArgument("adam_step: step must be >= 1");
  m = beta1 * m + (1.0 - beta1) * grads;
  v = beta2 * v + (1.0 - beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  const Vector update = lr * (m / c1).array() / ((v / c2).array().sqrt() + eps);
  if (!update.allFinite()) throw NonFiniteError("adam_step: non-finite update");
  params -= update;
}

namespace {

RowMatrix gather_rows(const RowMatrix& source, const std::vector<Index>& rows, Index start, Index len) {
  RowMatrix out(len, source.cols());
  for (Index r = 0; r < len; ++r) out.row(r) = source.row(rows[static_cast<std::size_t>(start + r)]);
  return out;
}

constexpr std::uint64_t kShuffleStream = 0x5348'5546ULL;
constexpr std::uint64_t kDropoutStream = 0x4452'4f50ULL;

}  // namespace

TrainResult train(const ShredModel& initial, const LagDataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  initial.validate();
  if (dataset.lag != initial.shape.lag || dataset.n_sensors != initial.shape.n_sensors ||
      dataset.out_dim() != initial.shape.out_dim) {
    throw DimensionError("train: dataset shape does not match the model");
  }
  const std::vector<Index> train_idx = dataset.indices(SplitLabel::train);
  const std::vector<Index> val_idx = dataset.indices(SplitLabel::val);
  if (train_idx.empty() || val_idx.empty()) {
    throw InvalidArgument("train: dataset needs nonempty train and val splits");
  }
  const auto n_train = static_cast<Index>(train_idx.size());
  const RowMatrix val_windows = gather_rows(dataset.windows, val_idx, 0, static_cast<Index>(val_idx.size()));
  const RowMatrix val_targets = gather_rows(dataset.targets, val_idx, 0, static_cast<Index>(val_idx.size()));

  ShredModel model = initial;
  AdamState adam(model.params.size());
  TrainResult result;
  result.best = model;
  result.best_val_loss = std::numeric_limits<double>::infinity();

  const std::uint64_t shuffle_seed = derive_seed(config.seed, kShuffleStream);
  const std::uint64_t dropout_seed = derive_seed(config.seed, kDropoutStream);
  BackwardOptions options;
  options.dropout = config.dropout;
  options.chunk = config.grad_chunk;

  for (Index epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = config.learning_rate(epoch);
    const std::vector<Index> perm = seeded_permutation(n_train, derive_seed(shuffle_seed, static_cast<std::uint64_t>(epoch)));
    std::vector<Index> order(perm.size());
    for (std::size_t j = 0; j < perm.size(); ++j) order[j] = train_idx[static_cast<std::size_t>(perm[j])];

    double loss_sum = 0.0;
    for (Index start = 0; start < n_train; start += config.batch_size) {
      const Index len = std::min(config.batch_size, n_train - start);
      const RowMatrix windows = gather_rows(dataset.windows, order, start, len);
      const RowMatrix targets = gather_rows(dataset.targets, order, start, len);
      ++adam.step;
      options.mask_seed = derive_seed(dropout_seed, static_cast<std::uint64_t>(adam.step));
      try {
        LossAndGrad lg = backward(model, windows, targets, options);
        if (config.clip_norm > 0.0) {
          const double norm = lg.grad.norm();
          if (norm > config.clip_norm) lg.grad *= config.clip_norm / norm;
        }
        adam_step(model.params, lg.grad, adam.m, adam.v, adam.step, lr, config.adam_beta1,
                  config.adam_beta2, config.adam_eps);
        loss_sum += lg.loss * static_cast<double>(len);
      } catch (const NonFiniteError& e) {
        throw TrainingDiverged("train: epoch " + std::to_string(epoch) + ": " + e.what(), result.history);
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.lr = lr;
    record.train_loss = loss_sum / static_cast<double>(n_train);
    try {
      record.val_loss = evaluate_loss(model, val_windows, val_targets);
    } catch (const NonFiniteError&) {
      record.val_loss = std::numeric_limits<double>::quiet_NaN();
    }
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);
    if (!std::isfinite(record.val_loss)) {
      throw TrainingDiverged("train: validation loss is non-finite at epoch " + std::to_string(epoch),
                             result.history);
    }
    if (record.val_loss < result.best_val_loss) {
      result.best_val_loss = record.val_loss;
      result.best_epoch = epoch;
      result.best.params = model.params;
    }
  }
  return result;
}

}  // namespace shredrom
