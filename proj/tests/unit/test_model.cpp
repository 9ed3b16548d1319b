#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "properties.hpp"
#include "shredrom/error.hpp"
#include "shredrom/model.hpp"
#include "shredrom/rng.hpp"

using namespace shredrom;

namespace {

ModelShape tiny_shape() {
  ModelShape s;
  s.n_sensors = 2;
  s.hidden = 3;
  s.lstm_layers = 2;
  s.decoder_hidden = {5, 4};
  s.out_dim = 3;
  s.lag = 4;
  return s;
}

RowMatrix random_rows(Index rows, Index cols, std::uint64_t seed) {
  SplitMix64 rng(seed);
  RowMatrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform();
  return m;
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST(ParamLayout, DefaultShapeCount) {
  const ModelShape s;
  const Index h = 64;
  const Index lstm = 4 * h * (2 + h + 1) + 4 * h * (h + h + 1);
  const Index dense = 350 * (64 + 1) + 400 * (350 + 1) + 20 * (400 + 1);
  EXPECT_EQ(param_count(s), lstm + dense);
  const auto blocks = param_layout(s);
  ASSERT_EQ(blocks.size(), 12u);
  EXPECT_EQ(blocks[0].name, "lstm0.W");
  EXPECT_EQ(blocks[1].name, "lstm0.U");
  EXPECT_EQ(blocks[2].name, "lstm0.b");
  EXPECT_EQ(blocks[6].name, "sdn0.W");
  EXPECT_EQ(blocks[11].name, "sdn2.b");
  Index offset = 0;
  for (const ParamBlock& b : blocks) {
    EXPECT_EQ(b.offset, offset);
    offset += b.size();
  }
  EXPECT_EQ(offset, param_count(s));
}

TEST(InitModel, BoundsBiasesDeterminism) {
  const ModelShape s = tiny_shape();
  const ShredModel m = init_model(s, 5, 1.0);
  for (const ParamBlock& b : param_layout(s)) {
    const Matrix v = m.block(b.name);
    if (b.name.ends_with(".b")) {
      for (Index r = 0; r < b.rows; ++r) {
        const bool forget = b.name.starts_with("lstm") && r >= s.hidden && r < 2 * s.hidden;
        EXPECT_EQ(v(r, 0), forget ? 1.0 : 0.0) << b.name << " row " << r;
      }
    } else {
      EXPECT_LE(v.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(static_cast<double>(b.cols)));
    }
  }
  EXPECT_TRUE(init_model(s, 5).params == m.params);
  EXPECT_FALSE(init_model(s, 6).params == m.params);
  EXPECT_THROW(m.block("nope"), InvalidArgument);
}

TEST(ModelShape, Validation) {
  ModelShape s = tiny_shape();
  s.lag = 0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = tiny_shape();
  s.decoder_hidden = {3, 0};
  EXPECT_THROW(s.validate(), InvalidArgument);
}

TEST(LstmForward, MatchesHandUnrolledCell) {
  ModelShape s;
  s.n_sensors = 1;
  s.hidden = 2;
  s.lstm_layers = 1;
  s.decoder_hidden = {2};
  s.out_dim = 1;
  s.lag = 2;
  ShredModel m = init_model(s, 3);
  SplitMix64 rng(4);
  for (Index i = 0; i < m.params.size(); ++i) m.params[i] = rng.uniform() - 0.5;
  const Matrix w = m.block("lstm0.W");
  const Matrix u = m.block("lstm0.U");
  const Matrix b = m.block("lstm0.b");
  const double x[2] = {0.3, -0.7};

  double h[2] = {0.0, 0.0};
  double c[2] = {0.0, 0.0};
  for (int t = 0; t < 2; ++t) {
    double a[8];
    for (int r = 0; r < 8; ++r) a[r] = w(r, 0) * x[t] + u(r, 0) * h[0] + u(r, 1) * h[1] + b(r, 0);
    double hn[2];
    for (int j = 0; j < 2; ++j) {
      const double ig = sig(a[j]);
      const double fg = sig(a[2 + j]);
      const double gg = std::tanh(a[4 + j]);
      const double og = sig(a[6 + j]);
      c[j] = fg * c[j] + ig * gg;
      hn[j] = og * std::tanh(c[j]);
    }
    h[0] = hn[0];
    h[1] = hn[1];
  }
  RowMatrix window(2, 1);
  window << x[0], x[1];
  const Vector latent = lstm_forward(m, window);
  EXPECT_NEAR(latent[0], h[0], 1e-14);
  EXPECT_NEAR(latent[1], h[1], 1e-14);

  const Matrix w0 = m.block("sdn0.W");
  const Matrix b0 = m.block("sdn0.b");
  const Matrix w1 = m.block("sdn1.W");
  const Matrix b1 = m.block("sdn1.b");
  double y = b1(0, 0);
  for (int j = 0; j < 2; ++j) {
    const double z = std::max(0.0, w0(j, 0) * h[0] + w0(j, 1) * h[1] + b0(j, 0));
    y += w1(0, j) * z;
  }
  EXPECT_NEAR(sdn_forward(m, latent)[0], y, 1e-14);
}

TEST(PredictScaled, MatchesPerSampleForward) {
  const ModelShape s = tiny_shape();
  const ShredModel m = init_model(s, 7);
  const RowMatrix windows = random_rows(300, s.lag * s.n_sensors, 8);
  const RowMatrix y = predict_scaled(m, windows);
  for (Index n : {0, 1, 255, 256, 299}) {
    const Eigen::Map<const RowMatrix> w(windows.row(n).data(), s.lag, s.n_sensors);
    const Vector ref = sdn_forward(m, lstm_forward(m, w));
    EXPECT_LT((y.row(n).transpose() - ref).cwiseAbs().maxCoeff(), 1e-13);
  }
  EXPECT_THROW(predict_scaled(m, random_rows(3, 5, 1)), DimensionError);
}

TEST(Forward, ZeroPadsShortHistory) {
  const ModelShape s = tiny_shape();
  ShredModel m = init_model(s, 9);
  m.input_scaler = Scaler{Vector::Constant(2, -1.0), Vector::Constant(2, 3.0)};
  m.target_scaler = Scaler{Vector::Constant(3, 2.0), Vector::Constant(3, 4.0)};
  Matrix hist(2, 2);
  hist << 1.0, 0.0, -1.0, 3.0;
  RowMatrix window = RowMatrix::Zero(1, s.lag * s.n_sensors);
  const Matrix scaled = m.input_scaler.apply(hist);
  window.row(0).segment(4, 2) = scaled.row(0);
  window.row(0).segment(6, 2) = scaled.row(1);
  const Vector expected = m.target_scaler.invert(predict_scaled(m, window)).row(0).transpose();
  EXPECT_TRUE(forward(m, hist) == expected);
  EXPECT_THROW(forward(m, Matrix::Zero(5, 2)), DimensionError);
}

TEST(Forward, ZeroWeightsGiveBias) {
  const ModelShape s = tiny_shape();
  ShredModel m = init_model(s, 1);
  m.params.setZero();
  m.block("sdn2.b") = Matrix(Vector::LinSpaced(3, 0.1, 0.3));
  const Vector y = forward(m, Matrix::Ones(4, 2));
  EXPECT_NEAR(y[0], 0.1, 1e-15);
  EXPECT_NEAR(y[2], 0.3, 1e-15);
}

TEST(Backward, FiniteDifferenceNoDropout) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EXPECT_LT(props::gradient_fd_error(seed, 0.0), 1e-4) << "seed " << seed;
  }
}

TEST(Backward, FiniteDifferenceWithFixedMasks) {
  for (std::uint64_t seed = 11; seed <= 15; ++seed) {
    EXPECT_LT(props::gradient_fd_error(seed, 0.3), 1e-4) << "seed " << seed;
  }
}

TEST(Backward, LossMatchesEvaluateLossWithoutDropout) {
  const ModelShape s = tiny_shape();
  const ShredModel m = init_model(s, 2);
  const RowMatrix w = random_rows(10, 8, 3);
  const RowMatrix t = random_rows(10, 3, 4);
  EXPECT_NEAR(backward(m, w, t).loss, evaluate_loss(m, w, t), 1e-14);
}

TEST(Backward, ChunkingChangesOnlyRoundoff) {
  const ModelShape s = tiny_shape();
  const ShredModel m = init_model(s, 2);
  const RowMatrix w = random_rows(17, 8, 5);
  const RowMatrix t = random_rows(17, 3, 6);
  const BackwardOptions whole{0.2, 99, 0};
  const BackwardOptions chunked{0.2, 99, 4};
  const LossAndGrad a = backward(m, w, t, whole);
  const LossAndGrad b = backward(m, w, t, chunked);
  EXPECT_NEAR(a.loss, b.loss, 1e-13);
  EXPECT_LT((a.grad - b.grad).cwiseAbs().maxCoeff(), 1e-13);
  const LossAndGrad c = backward(m, w, t, chunked);
  EXPECT_TRUE(b.grad == c.grad);
  EXPECT_EQ(b.loss, c.loss);
}

TEST(Dropout, MonteCarloExpectationMatchesEvalMode) {
  ModelShape s = tiny_shape();
  s.decoder_hidden = {6};
  const ShredModel m = init_model(s, 12);
  Vector latent(3);
  latent << 0.4, -0.2, 0.9;
  const Vector eval = sdn_forward(m, latent);
  SplitMix64 rng(13);
  const int draws = 40000;
  Vector mean = Vector::Zero(3);
  Vector sq = Vector::Zero(3);
  for (int d = 0; d < draws; ++d) {
    const Vector y = sdn_forward(m, latent, true, 0.3, &rng);
    mean += y;
    sq += y.cwiseAbs2();
  }
  mean /= draws;
  const Vector sd = (sq / draws - mean.cwiseAbs2()).cwiseSqrt();
  for (Index j = 0; j < 3; ++j) {
    EXPECT_NEAR(mean[j], eval[j], 4.0 * sd[j] / std::sqrt(double(draws)) + 1e-12);
  }
}

TEST(Dropout, TrainModeNeedsRng) {
  const ShredModel m = init_model(tiny_shape(), 1);
  EXPECT_THROW(sdn_forward(m, Vector::Zero(3), true, 0.5, nullptr), InvalidArgument);
  EXPECT_THROW(sdn_forward(m, Vector::Zero(3), true, 1.0, nullptr), InvalidArgument);
  EXPECT_NO_THROW(sdn_forward(m, Vector::Zero(3), true, 0.0, nullptr));
}

TEST(ShredModelValidate, CatchesMismatch) {
  ShredModel m = init_model(tiny_shape(), 1);
  EXPECT_NO_THROW(m.validate());
  m.input_scaler.min.resize(3);
  EXPECT_THROW(m.validate(), DimensionError);
}
