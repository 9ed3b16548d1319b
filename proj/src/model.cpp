#include "shredrom/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shredrom/error.hpp"
#include "shredrom/parallel.hpp"

namespace shredrom {

void ModelShape::validate() const {
  if (n_sensors < 1) throw InvalidArgument("model: n_sensors must be >= 1");
  if (hidden < 1) throw InvalidArgument("model: hidden must be >= 1");
  if (lstm_layers < 1) throw InvalidArgument("model: lstm_layers must be >= 1");
  if (out_dim < 1) throw InvalidArgument("model: out_dim must be >= 1");
  if (lag < 1) throw InvalidArgument("model: lag must be >= 1");
  for (Index w : decoder_hidden) {
    if (w < 1) throw InvalidArgument("model: decoder widths must be >= 1");
  }
}

std::vector<ParamBlock> param_layout(const ModelShape& shape) {
  std::vector<ParamBlock> blocks;
  Index offset = 0;
  const auto add = [&](std::string name, Index rows, Index cols) {
    blocks.push_back({std::move(name), rows, cols, offset});
    offset += rows * cols;
  };
  const Index h = shape.hidden;
  for (Index l = 0; l < shape.lstm_layers; ++l) {
    const std::string p = "lstm" + std::to_string(l);
    add(p + ".W", 4 * h, l == 0 ? shape.n_sensors : h);
    add(p + ".U", 4 * h, h);
    add(p + ".b", 4 * h, 1);
  }
  Index in = h;
  const auto n_dense = static_cast<Index>(shape.decoder_hidden.size()) + 1;
  for (Index d = 0; d < n_dense; ++d) {
    const Index out = d + 1 < n_dense ? shape.decoder_hidden[static_cast<std::size_t>(d)] : shape.out_dim;
    const std::string p = "sdn" + std::to_string(d);
    add(p + ".W", out, in);
    add(p + ".b", out, 1);
    in = out;
  }
  return blocks;
}

Index param_count(const ModelShape& shape) {
  const auto blocks = param_layout(shape);
  return blocks.back().offset + blocks.back().size();
}

namespace {

const ParamBlock& find_block(const ModelShape& shape, std::string_view name,
                             std::vector<ParamBlock>& storage) {
  storage = param_layout(shape);
  for (const ParamBlock& b : storage) {
    if (b.name == name) return b;
  }
  throw InvalidArgument("model: no parameter block named '" + std::string(name) + "'");
}

}  // namespace

Eigen::Map<const Matrix> ShredModel::block(std::string_view name) const {
  std::vector<ParamBlock> storage;
  const ParamBlock& b = find_block(shape, name, storage);
  return {params.data() + b.offset, b.rows, b.cols};
}

Eigen::Map<Matrix> ShredModel::block(std::string_view name) {
  std::vector<ParamBlock> storage;
  const ParamBlock& b = find_block(shape, name, storage);
  return {params.data() + b.offset, b.rows, b.cols};
}

void ShredModel::validate() const {
  shape.validate();
  if (params.size() != param_count(shape)) {
    throw DimensionError("model: parameter vector has " + std::to_string(params.size()) +
                         " entries, layout needs " + std::to_string(param_count(shape)));
  }
  if (input_scaler.size() != shape.n_sensors || input_scaler.max.size() != shape.n_sensors) {
    throw DimensionError("model: input scaler size != n_sensors");
  }
  if (target_scaler.size() != shape.out_dim || target_scaler.max.size() != shape.out_dim) {
    throw DimensionError("model: target scaler size != out_dim");
  }
  require_finite(params, "model parameters");
}

ShredModel init_model(const ModelShape& shape, std::uint64_t seed, double forget_bias) {
  shape.validate();
  ShredModel model;
  model.shape = shape;
  model.params = Vector::Zero(param_count(shape));
  const auto blocks = param_layout(shape);
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const ParamBlock& b = blocks[bi];
    const bool is_bias = b.cols == 1 && b.name.ends_with(".b");
    if (is_bias) {
      if (b.name.starts_with("lstm")) {
        model.params.segment(b.offset + shape.hidden, shape.hidden).setConstant(forget_bias);
      }
      continue;
    }
    SplitMix64 rng(derive_seed(seed, bi));
    const double bound = 1.0 / std::sqrt(static_cast<double>(b.cols));
    for (Index j = 0; j < b.size(); ++j) {
      model.params[b.offset + j] = bound * (2.0 * rng.uniform() - 1.0);
    }
  }
  model.input_scaler = Scaler{Vector::Zero(shape.n_sensors), Vector::Ones(shape.n_sensors)};
  model.target_scaler = Scaler{Vector::Zero(shape.out_dim), Vector::Ones(shape.out_dim)};
  return model;
}

namespace {

using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;
using ConstVecMap = Eigen::Map<const Vector>;
using MutVecMap = Eigen::Map<Vector>;

template <typename MatMap, typename VecMap, typename Ptr>
struct LstmView {
  MatMap w, u;
  VecMap b;
};

template <typename MatMap, typename VecMap, typename Ptr>
struct DenseView {
  MatMap w;
  VecMap b;
};

template <typename MatMap, typename VecMap, typename Ptr>
struct NetView {
  std::vector<LstmView<MatMap, VecMap, Ptr>> lstm;
  std::vector<DenseView<MatMap, VecMap, Ptr>> dense;

  NetView(const ModelShape& shape, Ptr base) {
    const auto blocks = param_layout(shape);
    std::size_t k = 0;
    const auto mat = [&]() {
      const ParamBlock& b = blocks[k++];
      return MatMap(base + b.offset, b.rows, b.cols);
    };
    const auto vec = [&]() {
      const ParamBlock& b = blocks[k++];
      return VecMap(base + b.offset, b.rows);
    };
    for (Index l = 0; l < shape.lstm_layers; ++l) {
      MatMap w = mat();
      MatMap u = mat();
      lstm.push_back({w, u, vec()});
    }
    const std::size_t n_dense = shape.decoder_hidden.size() + 1;
    for (std::size_t d = 0; d < n_dense; ++d) {
      MatMap w = mat();
      dense.push_back({w, vec()});
    }
  }
};

using Net = NetView<ConstMap, ConstVecMap, const double*>;
using NetGrad = NetView<MutMap, MutVecMap, double*>;

// Dropout masks for one batch: value 0 or 1/(1-p), laid out like the
// activations they multiply.
struct Masks {
  std::vector<Matrix> lstm;     // layer l >= 1: H x (T*B), applied to its input
  std::vector<Matrix> decoder;  // hidden dense layer d: width x B
};

bool masks_active(double dropout) { return dropout > 0.0; }

void check_dropout(double dropout) {
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("dropout must be in [0, 1)");
}

Masks allocate_masks(const ModelShape& shape, Index batch) {
  Masks m;
  for (Index l = 1; l < shape.lstm_layers; ++l) m.lstm.emplace_back(shape.hidden, shape.lag * batch);
  for (Index w : shape.decoder_hidden) m.decoder.emplace_back(w, batch);
  return m;
}

// Draw order per sample: inter-layer masks (layer, time, unit), then decoder
// masks (layer, unit).
void draw_sample_masks(const ModelShape& shape, double dropout, SplitMix64& rng,
                       Masks& masks, Index column, Index batch) {
  const double keep_scale = 1.0 / (1.0 - dropout);
  const auto draw = [&]() { return rng.uniform() < dropout ? 0.0 : keep_scale; };
  for (Matrix& m : masks.lstm) {
    for (Index t = 0; t < shape.lag; ++t) {
      for (Index u = 0; u < shape.hidden; ++u) m(u, t * batch + column) = draw();
    }
  }
  for (Matrix& m : masks.decoder) {
    for (Index u = 0; u < m.rows(); ++u) m(u, column) = draw();
  }
}

Masks draw_batch_masks(const ModelShape& shape, double dropout, Index batch,
                       std::uint64_t seed, Index position_offset) {
  Masks masks = allocate_masks(shape, batch);
  for (Index b = 0; b < batch; ++b) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(position_offset + b)));
    draw_sample_masks(shape, dropout, rng, masks, b, batch);
  }
  return masks;
}

struct LayerCache {
  Matrix input;      // in x T*B (after dropout)
  Matrix gates;      // 4H x T*B, activated
  Matrix cell;       // H x T*B
  Matrix tanh_cell;  // H x T*B
  Matrix hidden;     // H x T*B
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  std::vector<Matrix> dense_in;   // input of each dense layer
  std::vector<Matrix> dense_pre;  // pre-activation of each dense layer
};

// Time-major input: column t*B + b holds reading t of sample b.
Matrix assemble_inputs(const Eigen::Ref<const RowMatrix>& windows, Index lag, Index n_sensors) {
  const Index batch = windows.rows();
  Matrix x(n_sensors, lag * batch);
  for (Index b = 0; b < batch; ++b) {
    for (Index t = 0; t < lag; ++t) {
      x.col(t * batch + b) = windows.row(b).segment(t * n_sensors, n_sensors).transpose();
    }
  }
  return x;
}

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  return 1.0 / (1.0 + (-x).exp());
}

Matrix lstm_layer_forward(const LstmView<ConstMap, ConstVecMap, const double*>& p,
                          const Matrix& input, Index batch, Index steps, Index h,
                          LayerCache* cache) {
  const Index tb = batch * steps;
  Matrix pre(4 * h, tb);
  pre.noalias() = p.w * input;
  pre.colwise() += p.b;

  Matrix hseq(h, tb);
  Matrix a(4 * h, batch);
  Matrix c = Matrix::Zero(h, batch);
  Matrix tc(h, batch);
  if (cache) {
    cache->gates.resize(4 * h, tb);
    cache->cell.resize(h, tb);
    cache->tanh_cell.resize(h, tb);
  }
  for (Index t = 0; t < steps; ++t) {
    a = pre.middleCols(t * batch, batch);
    if (t > 0) a.noalias() += p.u * hseq.middleCols((t - 1) * batch, batch);
    a.topRows(2 * h) = sigmoid(a.topRows(2 * h).array()).matrix();
    a.middleRows(2 * h, h) = a.middleRows(2 * h, h).array().tanh().matrix();
    a.bottomRows(h) = sigmoid(a.bottomRows(h).array()).matrix();

    const auto gi = a.topRows(h).array();
    const auto gf = a.middleRows(h, h).array();
    const auto gg = a.middleRows(2 * h, h).array();
    const auto go = a.bottomRows(h).array();
    c = (gf * c.array() + gi * gg).matrix();
    tc = c.array().tanh().matrix();
    hseq.middleCols(t * batch, batch) = (go * tc.array()).matrix();
    if (cache) {
      cache->gates.middleCols(t * batch, batch) = a;
      cache->cell.middleCols(t * batch, batch) = c;
      cache->tanh_cell.middleCols(t * batch, batch) = tc;
    }
  }
  return hseq;
}

// Runs the encoder on time-major inputs and returns the top layer's final
// hidden state (H x B).
Matrix encoder_forward(const ModelShape& shape, const Net& net, const Matrix& x, Index batch,
                       const Masks* masks, ForwardCache* cache) {
  const Index steps = shape.lag;
  const Index h = shape.hidden;
  if (cache) cache->layers.assign(static_cast<std::size_t>(shape.lstm_layers), {});
  Matrix input = x;
  Matrix hseq;
  for (Index l = 0; l < shape.lstm_layers; ++l) {
    if (l > 0) {
      input = std::move(hseq);
      if (masks) input.array() *= masks->lstm[static_cast<std::size_t>(l - 1)].array();
    }
    LayerCache* lc = cache ? &cache->layers[static_cast<std::size_t>(l)] : nullptr;
    hseq = lstm_layer_forward(net.lstm[static_cast<std::size_t>(l)], input, batch, steps, h, lc);
    if (lc) {
      lc->input = std::move(input);
      lc->hidden = hseq;
    }
  }
  return hseq.rightCols(batch);
}

Matrix decoder_forward(const Net& net, const Matrix& latent, const Masks* masks,
                       ForwardCache* cache) {
  Matrix in = latent;
  const std::size_t n_dense = net.dense.size();
  if (cache) {
    cache->dense_in.resize(n_dense);
    cache->dense_pre.resize(n_dense);
  }
  for (std::size_t d = 0; d < n_dense; ++d) {
    Matrix pre(net.dense[d].w.rows(), in.cols());
    pre.noalias() = net.dense[d].w * in;
    pre.colwise() += net.dense[d].b;
    if (cache) cache->dense_in[d] = in;
    if (d + 1 == n_dense) {
      if (cache) cache->dense_pre[d] = pre;
      return pre;
    }
    in = pre.cwiseMax(0.0);
    if (masks) in.array() *= masks->decoder[d].array();
    if (cache) cache->dense_pre[d] = std::move(pre);
  }
  return in;  // unreachable: the output layer always exists
}

void check_windows(const ModelShape& shape, Index cols) {
  if (cols != shape.lag * shape.n_sensors) {
    throw DimensionError("model: window width " + std::to_string(cols) + " != lag*n_sensors = " +
                         std::to_string(shape.lag * shape.n_sensors));
  }
}

void lstm_layer_backward(const LstmView<ConstMap, ConstVecMap, const double*>& p,
                         LstmView<MutMap, MutVecMap, double*>& g, const LayerCache& cache,
                         const Matrix& d_hidden, Index batch, Index steps, Index h,
                         Matrix* d_input) {
  const Index tb = batch * steps;
  Matrix d_pre(4 * h, tb);
  Matrix dh_next = Matrix::Zero(h, batch);
  Matrix dc_next = Matrix::Zero(h, batch);
  Matrix dc(h, batch);
  for (Index t = steps - 1; t >= 0; --t) {
    const Index col = t * batch;
    const auto gates = cache.gates.middleCols(col, batch);
    const auto gi = gates.topRows(h).array();
    const auto gf = gates.middleRows(h, h).array();
    const auto gg = gates.middleRows(2 * h, h).array();
    const auto go = gates.bottomRows(h).array();
    const auto tc = cache.tanh_cell.middleCols(col, batch).array();

    const Matrix dh = d_hidden.middleCols(col, batch) + dh_next;
    dc = (dc_next.array() + dh.array() * go * (1.0 - tc.square())).matrix();

    auto da = d_pre.middleCols(col, batch);
    da.topRows(h) = (dc.array() * gg * gi * (1.0 - gi)).matrix();
    if (t > 0) {
      const auto c_prev = cache.cell.middleCols(col - batch, batch).array();
      da.middleRows(h, h) = (dc.array() * c_prev * gf * (1.0 - gf)).matrix();
    } else {
      da.middleRows(h, h).setZero();
    }
    da.middleRows(2 * h, h) = (dc.array() * gi * (1.0 - gg.square())).matrix();
    da.bottomRows(h) = (dh.array() * tc * go * (1.0 - go)).matrix();

    dc_next = (dc.array() * gf).matrix();
    if (t > 0) dh_next.noalias() = p.u.transpose() * da;
  }
  g.w.noalias() += d_pre * cache.input.transpose();
  g.b += d_pre.rowwise().sum();
  if (steps > 1) {
    g.u.noalias() += d_pre.rightCols(tb - batch) * cache.hidden.leftCols(tb - batch).transpose();
  }
  if (d_input) {
    d_input->resize(p.w.cols(), tb);
    d_input->noalias() = p.w.transpose() * d_pre;
  }
}

// Sum of squared errors of one chunk; accumulates gradient of
// sum_sq / batch_total into grad.
double chunk_backward(const ShredModel& model, const Net& net,
                      const Eigen::Ref<const RowMatrix>& windows,
                      const Eigen::Ref<const RowMatrix>& targets, const BackwardOptions& options,
                      Index position_offset, double batch_total, Vector& grad) {
  const ModelShape& shape = model.shape;
  const Index batch = windows.rows();
  const Index h = shape.hidden;
  const Index steps = shape.lag;

  Masks masks;
  const Masks* mask_ptr = nullptr;
  if (masks_active(options.dropout)) {
    masks = draw_batch_masks(shape, options.dropout, batch, options.mask_seed, position_offset);
    mask_ptr = &masks;
  }

  ForwardCache cache;
  const Matrix x = assemble_inputs(windows, steps, shape.n_sensors);
  const Matrix latent = encoder_forward(shape, net, x, batch, mask_ptr, &cache);
  const Matrix y = decoder_forward(net, latent, mask_ptr, &cache);

  const Matrix residual = y - targets.transpose();
  const double sum_sq = residual.squaredNorm();
  if (!std::isfinite(sum_sq)) throw NonFiniteError("backward: non-finite loss");

  NetGrad g(shape, grad.data());
  Matrix dz = (2.0 / batch_total) * residual;
  for (std::size_t d = net.dense.size(); d-- > 0;) {
    g.dense[d].w.noalias() += dz * cache.dense_in[d].transpose();
    g.dense[d].b += dz.rowwise().sum();
    Matrix d_in = net.dense[d].w.transpose() * dz;
    if (d == 0) {
      dz = std::move(d_in);
      break;
    }
    d_in.array() *= (cache.dense_pre[d - 1].array() > 0.0).cast<double>();
    if (mask_ptr) d_in.array() *= masks.decoder[d - 1].array();
    dz = std::move(d_in);
  }

  // dz now holds d loss / d latent (H x B), the top layer's last step.
  Matrix d_hidden = Matrix::Zero(h, steps * batch);
  d_hidden.rightCols(batch) = dz;
  for (Index l = shape.lstm_layers - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    Matrix d_input;
    lstm_layer_backward(net.lstm[li], g.lstm[li], cache.layers[li], d_hidden, batch, steps, h,
                        l > 0 ? &d_input : nullptr);
    if (l > 0) {
      if (mask_ptr) d_input.array() *= masks.lstm[li - 1].array();
      d_hidden = std::move(d_input);
    }
  }
  return sum_sq;
}

}  // namespace

Vector lstm_forward(const ShredModel& model, const Eigen::Ref<const RowMatrix>& window,
                    bool train_mode, double dropout, SplitMix64* rng) {
  const ModelShape& shape = model.shape;
  if (window.rows() != shape.lag || window.cols() != shape.n_sensors) {
    throw DimensionError("lstm_forward: window must be lag x n_sensors");
  }
  check_dropout(dropout);
  Masks masks;
  const Masks* mask_ptr = nullptr;
  if (train_mode && masks_active(dropout)) {
    if (!rng) throw InvalidArgument("lstm_forward: training mode needs an rng");
    masks = allocate_masks(shape, 1);
    masks.decoder.clear();
    SplitMix64& r = *rng;
    const double keep_scale = 1.0 / (1.0 - dropout);
    for (Matrix& m : masks.lstm) {
      for (Index t = 0; t < shape.lag; ++t) {
        for (Index u = 0; u < shape.hidden; ++u) m(u, t) = r.uniform() < dropout ? 0.0 : keep_scale;
      }
    }
    mask_ptr = &masks;
  }
  const Net net(shape, model.params.data());
  Matrix x(shape.n_sensors, shape.lag);
  for (Index t = 0; t < shape.lag; ++t) x.col(t) = window.row(t).transpose();
  const Matrix h = encoder_forward(shape, net, x, 1, mask_ptr, nullptr);
  if (!h.allFinite()) throw NonFiniteError("lstm_forward: non-finite activation");
  return h.col(0);
}

Vector sdn_forward(const ShredModel& model, const Eigen::Ref<const Vector>& latent,
                   bool train_mode, double dropout, SplitMix64* rng) {
  const ModelShape& shape = model.shape;
  if (latent.size() != shape.hidden) throw DimensionError("sdn_forward: latent size != hidden");
  check_dropout(dropout);
  Masks masks;
  const Masks* mask_ptr = nullptr;
  if (train_mode && masks_active(dropout)) {
    if (!rng) throw InvalidArgument("sdn_forward: training mode needs an rng");
    const double keep_scale = 1.0 / (1.0 - dropout);
    for (Index w : shape.decoder_hidden) {
      Matrix m(w, 1);
      for (Index u = 0; u < w; ++u) m(u, 0) = rng->uniform() < dropout ? 0.0 : keep_scale;
      masks.decoder.push_back(std::move(m));
    }
    mask_ptr = &masks;
  }
  const Net net(shape, model.params.data());
  const Matrix y = decoder_forward(net, latent, mask_ptr, nullptr);
  if (!y.allFinite()) throw NonFiniteError("sdn_forward: non-finite activation");
  return y.col(0);
}

RowMatrix predict_scaled(const ShredModel& model, const Eigen::Ref<const RowMatrix>& windows) {
  const ModelShape& shape = model.shape;
  check_windows(shape, windows.cols());
  const Net net(shape, model.params.data());
  RowMatrix out(windows.rows(), shape.out_dim);
  constexpr Index kChunk = 256;
  const Index n = windows.rows();
  const Index n_chunks = (n + kChunk - 1) / kChunk;
  parallel_for(static_cast<std::size_t>(n_chunks), [&](std::size_t c) {
    const Index start = static_cast<Index>(c) * kChunk;
    const Index len = std::min(kChunk, n - start);
    const Matrix x = assemble_inputs(windows.middleRows(start, len), shape.lag, shape.n_sensors);
    const Matrix latent = encoder_forward(shape, net, x, len, nullptr, nullptr);
    out.middleRows(start, len) = decoder_forward(net, latent, nullptr, nullptr).transpose();
  });
  if (!out.allFinite()) throw NonFiniteError("predict: non-finite activation");
  return out;
}

Vector forward(const ShredModel& model, const Eigen::Ref<const Matrix>& raw_history) {
  const ModelShape& shape = model.shape;
  if (raw_history.cols() != shape.n_sensors) {
    throw DimensionError("forward: history width != n_sensors");
  }
  if (raw_history.rows() < 1 || raw_history.rows() > shape.lag) {
    throw DimensionError("forward: history must hold 1..lag rows");
  }
  const Matrix scaled = model.input_scaler.apply(raw_history);
  RowMatrix window = RowMatrix::Zero(1, shape.lag * shape.n_sensors);
  const Index pad = shape.lag - scaled.rows();
  for (Index t = 0; t < scaled.rows(); ++t) {
    window.row(0).segment((pad + t) * shape.n_sensors, shape.n_sensors) = scaled.row(t);
  }
  const RowMatrix y = predict_scaled(model, window);
  return model.target_scaler.invert(y).row(0).transpose();
}

LossAndGrad backward(const ShredModel& model, const Eigen::Ref<const RowMatrix>& windows,
                     const Eigen::Ref<const RowMatrix>& targets, const BackwardOptions& options) {
  const ModelShape& shape = model.shape;
  check_windows(shape, windows.cols());
  check_dropout(options.dropout);
  const Index batch = windows.rows();
  if (batch < 1) throw InvalidArgument("backward: empty batch");
  if (targets.rows() != batch || targets.cols() != shape.out_dim) {
    throw DimensionError("backward: targets must be batch x out_dim");
  }
  const Net net(shape, model.params.data());
  const Index chunk = options.chunk > 0 ? std::min(options.chunk, batch) : batch;
  const Index n_chunks = (batch + chunk - 1) / chunk;
  const auto total = static_cast<double>(batch);

  std::vector<Vector> grads(static_cast<std::size_t>(n_chunks));
  std::vector<double> sums(static_cast<std::size_t>(n_chunks), 0.0);
  parallel_for(static_cast<std::size_t>(n_chunks), [&](std::size_t c) {
    const Index start = static_cast<Index>(c) * chunk;
    const Index len = std::min(chunk, batch - start);
    grads[c] = Vector::Zero(model.params.size());
    sums[c] = chunk_backward(model, net, windows.middleRows(start, len),
                             targets.middleRows(start, len), options, start, total, grads[c]);
  });

  LossAndGrad out;
  out.grad = std::move(grads[0]);
  double sum_sq = sums[0];
  for (std::size_t c = 1; c < grads.size(); ++c) {
    out.grad += grads[c];
    sum_sq += sums[c];
  }
  out.loss = sum_sq / total;
  if (!out.grad.allFinite()) throw NonFiniteError("backward: non-finite gradient");
  return out;
}

double evaluate_loss(const ShredModel& model, const Eigen::Ref<const RowMatrix>& windows,
                     const Eigen::Ref<const RowMatrix>& targets) {
  if (windows.rows() < 1) throw InvalidArgument("evaluate_loss: empty set");
  if (targets.rows() != windows.rows() || targets.cols() != model.shape.out_dim) {
    throw DimensionError("evaluate_loss: targets must be n x out_dim");
  }
  const RowMatrix y = predict_scaled(model, windows);
  return (y - targets).squaredNorm() / static_cast<double>(windows.rows());
}

}  // namespace shredrom
