#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "shredrom/dataset.hpp"
#include "shredrom/linalg.hpp"
#include "shredrom/rng.hpp"

namespace shredrom {

/// Architecture of a stacked-LSTM encoder followed by a shallow decoder.
struct ModelShape {
  Index n_sensors = 2;
  Index hidden = 64;
  Index lstm_layers = 2;
  std::vector<Index> decoder_hidden{350, 400};
  Index out_dim = 20;
  Index lag = 50;

  void validate() const;
  bool operator==(const ModelShape&) const = default;
};

/// One parameter array inside the flat parameter vector (column-major).
struct ParamBlock {
  std::string name;
  Index rows;
  Index cols;
  Index offset;

  Index size() const noexcept { return rows * cols; }
};

/// Blocks in storage order: lstm<l>.W (4H x in), lstm<l>.U (4H x H),
/// lstm<l>.b (4H) for each layer, then sdn<d>.W and sdn<d>.b for each dense
/// layer, the last one being the linear output layer. Gate rows are ordered
/// input, forget, cell, output.
std::vector<ParamBlock> param_layout(const ModelShape& shape);
Index param_count(const ModelShape& shape);

struct ShredModel {
  ModelShape shape;
  Vector params;
  Scaler input_scaler;   ///< n_sensors features
  Scaler target_scaler;  ///< out_dim features

  Eigen::Map<const Matrix> block(std::string_view name) const;
  Eigen::Map<Matrix> block(std::string_view name);
  /// Shapes, scaler sizes and finiteness.
  void validate() const;
};

/// Weights uniform in +-1/sqrt(fan_in), forget-gate biases set to
/// `forget_bias`, other biases 0. Scalers start as identity maps.
ShredModel init_model(const ModelShape& shape, std::uint64_t seed, double forget_bias = 1.0);

/// Final top-layer hidden state for one scaled window (lag x n_sensors). In
/// training mode the inter-layer dropout masks are drawn from `rng`.
Vector lstm_forward(const ShredModel& model, const Eigen::Ref<const RowMatrix>& window,
                    bool train_mode = false, double dropout = 0.0, SplitMix64* rng = nullptr);

/// Decoder output (scaled space) for one latent vector. In training mode the
/// hidden-layer masks (inverted dropout) are drawn from `rng`.
Vector sdn_forward(const ShredModel& model, const Eigen::Ref<const Vector>& latent,
                   bool train_mode = false, double dropout = 0.0, SplitMix64* rng = nullptr);

/// Eval-mode network output in scaled target space for flattened scaled
/// windows (n x lag*n_sensors).
RowMatrix predict_scaled(const ShredModel& model, const Eigen::Ref<const RowMatrix>& windows);

/// Unscaled prediction from raw sensor readings. `raw_history` holds up to
/// `lag` most recent rows (oldest first); missing leading rows are zero
/// padded after scaling.
Vector forward(const ShredModel& model, const Eigen::Ref<const Matrix>& raw_history);

struct BackwardOptions {
  double dropout = 0.0;
  std::uint64_t mask_seed = 0;
  /// Samples per gradient chunk; chunks are reduced in order. 0 = whole batch.
  Index chunk = 0;
};

struct LossAndGrad {
  double loss = 0.0;  ///< mean over the batch of per-sample squared-error sums
  Vector grad;        ///< same layout as ShredModel::params
};

/// Exact reverse-mode gradient of the batch loss in scaled space. The dropout
/// mask of batch position p comes from stream derive_seed(mask_seed, p).
LossAndGrad backward(const ShredModel& model, const Eigen::Ref<const RowMatrix>& windows,
                     const Eigen::Ref<const RowMatrix>& targets, const BackwardOptions& options = {});

/// Eval-mode loss with the same reduction as `backward`.
double evaluate_loss(const ShredModel& model, const Eigen::Ref<const RowMatrix>& windows,
                     const Eigen::Ref<const RowMatrix>& targets);

}  // namespace shredrom
