#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "shredrom/error.hpp"
#include "shredrom/eval.hpp"
#include "shredrom/rng.hpp"

using namespace shredrom;

namespace {

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

ModelShape small_shape(Index lag) {
  ModelShape s;
  s.n_sensors = 2;
  s.hidden = 4;
  s.lstm_layers = 2;
  s.decoder_hidden = {6, 5};
  s.out_dim = 3;
  s.lag = lag;
  return s;
}

ShredModel scaled_model(std::uint64_t seed, Index lag = 3) {
  ShredModel m = init_model(small_shape(lag), seed);
  m.input_scaler = Scaler{Vector::Constant(2, -2.0), Vector::Constant(2, 2.0)};
  m.target_scaler = Scaler{Vector::LinSpaced(3, -1.0, 0.0), Vector::LinSpaced(3, 1.0, 3.0)};
  return m;
}

PODBasis random_basis(Index n, Index r, std::uint64_t seed) {
  const Eigen::HouseholderQR<Matrix> qr(gaussian(n, r, seed));
  return PODBasis{qr.householderQ() * Matrix::Identity(n, r), Vector::Ones(r)};
}

}  // namespace

TEST(MeanRelativeError, TrivialCases) {
  const Matrix truth = gaussian(6, 4, 1);
  EXPECT_EQ(mean_relative_error(truth, truth).mean, 0.0);
  EXPECT_DOUBLE_EQ(mean_relative_error(truth, Matrix::Zero(6, 4)).mean, 1.0);
  Matrix t(1, 2), p(1, 2);
  t << 3.0, 4.0;
  p << 0.0, 4.0;
  EXPECT_DOUBLE_EQ(mean_relative_error(t, p).per_sample[0], 0.6);
}

TEST(MeanRelativeError, ZeroRowsSkipped) {
  Matrix t = gaussian(4, 3, 2);
  t.row(2).setZero();
  const RelativeErrors e = mean_relative_error(t, gaussian(4, 3, 3));
  EXPECT_EQ(e.skipped, 1);
  EXPECT_EQ(e.per_sample.size(), 3u);
  EXPECT_EQ(e.rows, (std::vector<Index>{0, 1, 3}));
  EXPECT_THROW(mean_relative_error(t, Matrix::Zero(4, 2)), DimensionError);
}

TEST(MeanRelativeError, MeanOfPerSampleAndScaleInvariance) {
  const Matrix t = gaussian(50, 10, 4);
  const Matrix p = gaussian(50, 10, 5);
  const RelativeErrors e = mean_relative_error(t, p);
  double sum = 0.0;
  for (double v : e.per_sample) sum += v;
  EXPECT_NEAR(e.mean, sum / 50.0, 1e-12);
  const RelativeErrors scaled = mean_relative_error(t * 0.5, p * 0.5);
  for (std::size_t i = 0; i < e.per_sample.size(); ++i) EXPECT_EQ(scaled.per_sample[i], e.per_sample[i]);
}

TEST(ReconstructTrajectory, ZeroWeightModelGivesBias) {
  ShredModel m = scaled_model(1);
  m.params.setZero();
  Vector bias(3);
  bias << 0.2, 0.5, 0.9;
  m.block("sdn2.b") = Matrix(bias);
  const PODBasis basis = random_basis(8, 3, 2);
  const Matrix states = reconstruct_trajectory(m, basis, gaussian(10, 2, 3));
  const Vector expected = pod_reconstruct(basis, m.target_scaler.invert(bias.transpose()).row(0).transpose());
  for (Index k = 0; k < 10; ++k) {
    EXPECT_LT((states.row(k).transpose() - expected).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(ReconstructTrajectory, Causality) {
  const ShredModel m = scaled_model(4, 5);
  const PODBasis basis = random_basis(8, 3, 5);
  Matrix sensors = gaussian(20, 2, 6);
  const Matrix a = reconstruct_trajectory(m, basis, sensors);
  for (Index k : {0, 7, 18}) {
    Matrix perturbed = sensors;
    perturbed.row(k + 1).array() += 1.5;
    const Matrix b = reconstruct_trajectory(m, basis, perturbed);
    EXPECT_TRUE(a.topRows(k + 1) == b.topRows(k + 1)) << "k " << k;
    EXPECT_FALSE(a.row(k + 1) == b.row(k + 1));
  }
}

TEST(ReconstructTrajectory, ShapeErrors) {
  const ShredModel m = scaled_model(1);
  EXPECT_THROW(reconstruct_trajectory(m, random_basis(8, 3, 1), gaussian(5, 3, 1)), DimensionError);
  EXPECT_THROW(reconstruct_trajectory(m, random_basis(8, 4, 1), gaussian(5, 2, 1)), DimensionError);
}

TEST(Ensemble, IdenticalMembersEqualSingle) {
  const ShredModel m = scaled_model(7);
  const PODBasis basis = random_basis(8, 3, 8);
  const Matrix sensors = gaussian(12, 2, 9);
  const std::vector<ShredModel> members(4, m);
  const Matrix single = reconstruct_trajectory(m, basis, sensors);
  EXPECT_LT((ensemble_predict(members, sensors, basis) - single).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Ensemble, ConstantOutputsAverage) {
  ShredModel a = scaled_model(1);
  ShredModel b = scaled_model(2);
  a.params.setZero();
  b.params.setZero();
  a.target_scaler = b.target_scaler = Scaler{Vector::Zero(3), Vector::Ones(3)};
  a.block("sdn2.b") = Matrix(Vector::Constant(3, 1.0));
  b.block("sdn2.b") = Matrix(Vector::Constant(3, 3.0));
  const PODBasis basis = random_basis(8, 3, 3);
  const Matrix out = ensemble_predict(std::vector<ShredModel>{a, b}, gaussian(4, 2, 4), basis);
  const Vector expected = pod_reconstruct(basis, Vector::Constant(3, 2.0));
  EXPECT_LT((out.row(2).transpose() - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Ensemble, StateAndCoefficientAveragingAgree) {
  std::vector<ShredModel> members;
  for (std::uint64_t s = 10; s < 15; ++s) members.push_back(scaled_model(s));
  const PODBasis basis = random_basis(8, 3, 11);
  const Matrix sensors = gaussian(9, 2, 12);
  Matrix state_mean = Matrix::Zero(9, 8);
  for (const ShredModel& m : members) state_mean += reconstruct_trajectory(m, basis, sensors);
  state_mean /= 5.0;
  EXPECT_LT((ensemble_predict(members, sensors, basis) - state_mean).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ensemble, HeterogeneousShapesRejected) {
  const std::vector<ShredModel> mixed{scaled_model(1, 3), scaled_model(2, 4)};
  EXPECT_THROW(ensemble_outputs(mixed, gaussian(5, 2, 1)), DimensionError);
  EXPECT_THROW(ensemble_outputs(std::vector<ShredModel>{}, gaussian(5, 2, 1)), InvalidArgument);
}

TEST(ParameterMae, Examples) {
  Matrix t(2, 2);
  t << 1.0, 2.0, 1.5, 4.0;
  EXPECT_TRUE((parameter_mae(t, t).array() == 0.0).all());
  const Vector off = parameter_mae(t, t.array() + 0.1);
  EXPECT_NEAR(off[0], 0.1, 1e-15);
  EXPECT_NEAR(off[1], 0.1, 1e-15);
  const Matrix a = gaussian(30, 3, 1);
  const Matrix b = gaussian(30, 3, 2);
  const Vector mae = parameter_mae(a, b);
  for (Index j = 0; j < 3; ++j) {
    double s = 0.0;
    for (Index i = 0; i < 30; ++i) s += std::abs(a(i, j) - b(i, j));
    EXPECT_NEAR(mae[j], s / 30.0, 1e-15);
  }
  EXPECT_THROW(parameter_mae(a, Matrix::Zero(30, 2)), DimensionError);
}

TEST(EvalReport, CsvRoundTrip) {
  EvalReport r;
  r.mean_relative_error = 0.1 + 1e-17;
  r.per_sample = {1.0 / 3.0, 2e-300, 0.7};
  r.samples = {{0, 1}, {4, 200}, {9, 0}};
  r.skipped = 2;
  r.param_names = {"nu", "omega"};
  r.param_mae = {0.01234567890123456, 3.5};
  r.metadata = {{"lag", "50"}, {"sensor_indices", "3 71"}};
  std::stringstream s;
  r.write_csv(s);
  const EvalReport back = EvalReport::read_csv(s);
  EXPECT_EQ(back.mean_relative_error, r.mean_relative_error);
  EXPECT_EQ(back.per_sample, r.per_sample);
  EXPECT_EQ(back.skipped, r.skipped);
  EXPECT_EQ(back.param_mae, r.param_mae);
  EXPECT_EQ(back.param_names, r.param_names);
  EXPECT_EQ(back.metadata, r.metadata);
  ASSERT_EQ(back.samples.size(), 3u);
  EXPECT_EQ(back.samples[1].scenario, 4);
  EXPECT_EQ(back.samples[1].time, 200);
  std::stringstream bad("kind,key\n");
  EXPECT_THROW(EvalReport::read_csv(bad), FormatError);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_EQ(quantile({3.0, 1.0, 2.0}, 0.5), 2.0);
  EXPECT_EQ(quantile({1.0, 2.0, 3.0, 4.0}, 0.5), 2.5);
  EXPECT_EQ(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25), 2.0);
  EXPECT_EQ(quantile({5.0}, 0.9), 5.0);
  EXPECT_THROW(quantile({}, 0.5), InvalidArgument);
}

TEST(Sweep, PairedSeedsFailuresAndSummary) {
  const std::vector<Index> values{1, 50};
  std::atomic<int> calls{0};
  const auto runner = [&](Index value, std::uint64_t seed) {
    ++calls;
    if (value == 50 && seed == derive_seed(3, 2)) throw std::runtime_error("boom");
    return CellOutcome{1.0 / static_cast<double>(value) + static_cast<double>(seed % 7) * 1e-3, 0.0, 0.0};
  };
  const auto cells = sweep(SweepAxis::lag, values, 4, 3, runner, 2);
  EXPECT_EQ(calls.load(), 8);
  ASSERT_EQ(cells.size(), 8u);
  for (std::size_t p = 0; p < 4; ++p) {
    EXPECT_EQ(cells[p].placement_seed, derive_seed(3, p));
    EXPECT_EQ(cells[4 + p].placement_seed, cells[p].placement_seed);
  }
  EXPECT_FALSE(cells[6].outcome.has_value());
  EXPECT_EQ(cells[6].error, "boom");
  const auto summary = summarize_sweep(cells);
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0].succeeded, 4);
  EXPECT_EQ(summary[1].succeeded, 3);
  EXPECT_LT(summary[1].median, summary[0].median);

  std::ostringstream out;
  write_sweep_csv(out, cells);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "axis,value,placement_seed,test_eps,val_eps,train_seconds");
  EXPECT_NE(out.str().find("nan"), std::string::npos);
}

TEST(Sweep, SingleCellIsOneRun) {
  const std::vector<Index> values{10};
  const auto cells = sweep(SweepAxis::n_sensors, values, 1, 5,
                           [](Index v, std::uint64_t s) { return CellOutcome{double(v), double(s % 3), 1.0}; });
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].outcome->test_eps, 10.0);
  EXPECT_EQ(parse_sweep_axis("n_sensors"), SweepAxis::n_sensors);
  EXPECT_THROW(parse_sweep_axis("width"), InvalidArgument);
  EXPECT_THROW(sweep(SweepAxis::lag, std::vector<Index>{0}, 1, 0, {}), InvalidArgument);
}
