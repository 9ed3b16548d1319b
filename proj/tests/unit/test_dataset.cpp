#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "shredrom/dataset.hpp"
#include "shredrom/error.hpp"
#include "shredrom/rng.hpp"

using namespace shredrom;

namespace {

TrajectorySet random_set(Index np, Index nt, Index nh, std::uint64_t seed) {
  SplitMix64 rng(seed);
  TrajectorySet set;
  for (Index i = 0; i < np; ++i) {
    Matrix s(nt, nh);
    for (Index k = 0; k < nt; ++k)
      for (Index j = 0; j < nh; ++j) s(k, j) = rng.normal();
    set.states.push_back(s);
  }
  set.params = Matrix::Zero(np, 2);
  set.times = Vector::LinSpaced(nt, 0.0, static_cast<double>(nt - 1));
  return set;
}

}  // namespace

TEST(ExtractSensors, ConstantFieldAndGridCoordinates) {
  TrajectorySet set;
  set.states = {Matrix::Constant(4, 10, 2.5)};
  set.params = Matrix::Zero(1, 2);
  set.times = Vector::LinSpaced(4, 0, 3);
  const SensorArray s = extract_sensors(set, SensorConfig{{0, 3, 9}, 0.0, 0});
  EXPECT_TRUE((s[0].array() == 2.5).all());

  const Vector x = Vector::LinSpaced(10, 0.0, 9.0) * 2.2;
  set.states[0] = x.transpose().replicate(4, 1);
  EXPECT_EQ(extract_sensors(set, SensorConfig{{0}, 0.0, 0})[0](2, 0), x[0]);
}

TEST(ExtractSensors, MatchesBruteForceGather) {
  const TrajectorySet set = random_set(3, 5, 10, 1);
  const std::vector<Index> idx{7, 2, 5};
  const SensorArray s = extract_sensors(set, SensorConfig{idx, 0.0, 0});
  for (Index i = 0; i < 3; ++i)
    for (Index k = 0; k < 5; ++k)
      for (std::size_t q = 0; q < idx.size(); ++q)
        EXPECT_EQ(s[i](k, static_cast<Index>(q)), set.states[i](k, idx[q]));
}

TEST(SensorConfig, Validation) {
  EXPECT_THROW((SensorConfig{{}, 0, 0}.validate(10)), InvalidArgument);
  EXPECT_THROW((SensorConfig{{10}, 0, 0}.validate(10)), InvalidArgument);
  EXPECT_THROW((SensorConfig{{1, 1}, 0, 0}.validate(10)), InvalidArgument);
  EXPECT_THROW((SensorConfig{{1}, -0.1, 0}.validate(10)), InvalidArgument);
  EXPECT_NO_THROW((SensorConfig{{0, 9}, 0.3, 0}.validate(10)));
}

TEST(AddNoise, ZeroStdIsIdentity) {
  const SensorArray in{Matrix::Random(20, 3)};
  const SensorArray out = add_noise(in, 0.0, 5);
  EXPECT_TRUE(out[0] == in[0]);
}

TEST(AddNoise, SampleStdAndDeterminism) {
  const SensorArray zeros{Matrix::Zero(50000, 1), Matrix::Zero(50000, 1)};
  const SensorArray noisy = add_noise(zeros, 0.25, 17);
  double sum = 0.0;
  double sq = 0.0;
  for (const Matrix& m : noisy) {
    sum += m.sum();
    sq += m.squaredNorm();
  }
  const double n = 100000.0;
  const double mean = sum / n;
  EXPECT_NEAR(std::sqrt(sq / n - mean * mean), 0.25, 0.005);
  EXPECT_NEAR(mean, 0.0, 0.005);
  const SensorArray again = add_noise(zeros, 0.25, 17);
  EXPECT_TRUE(again[0] == noisy[0]);
  EXPECT_TRUE(again[1] == noisy[1]);
  EXPECT_FALSE(noisy[0] == noisy[1]);
}

TEST(RandomPlacement, DistinctInRangeDeterministic) {
  const std::vector<Index> p = random_placement(100, 10, 3);
  EXPECT_EQ(std::set<Index>(p.begin(), p.end()).size(), 10u);
  for (Index v : p) {
    EXPECT_GE(v, 0);
    EXPECT_LT(v, 100);
  }
  EXPECT_EQ(random_placement(100, 10, 3), p);
  EXPECT_NE(random_placement(100, 10, 4), p);
  EXPECT_THROW(random_placement(5, 6, 0), InvalidArgument);
}

TEST(SeededPermutation, IsPermutation) {
  std::vector<Index> p = seeded_permutation(50, 8);
  std::sort(p.begin(), p.end());
  for (Index i = 0; i < 50; ++i) EXPECT_EQ(p[static_cast<std::size_t>(i)], i);
}

TEST(Scaler, SimpleAndDegenerateFeatures) {
  Matrix rows(2, 2);
  rows << 0.0, 7.0, 10.0, 7.0;
  const Scaler s = fit_scaler(rows);
  const Matrix scaled = s.apply(rows);
  EXPECT_EQ(scaled(0, 0), 0.0);
  EXPECT_EQ(scaled(1, 0), 1.0);
  EXPECT_EQ(scaled(0, 1), 0.0);
  EXPECT_EQ(scaled(1, 1), 0.0);
  const Matrix back = s.invert(scaled);
  EXPECT_EQ(back(0, 1), 7.0);
  EXPECT_EQ(back(1, 0), 10.0);
}

TEST(Scaler, RoundTrip) {
  const Matrix rows = Matrix::Random(40, 5) * 3.0;
  const Scaler s = fit_scaler(rows);
  EXPECT_LT((s.invert(s.apply(rows)) - rows).cwiseAbs().maxCoeff(), 1e-12);
  const Matrix scaled = s.apply(rows);
  EXPECT_GE(scaled.minCoeff(), 0.0);
  EXPECT_LE(scaled.maxCoeff(), 1.0);
  EXPECT_THROW(fit_scaler(Matrix(0, 3)), InvalidArgument);
  EXPECT_THROW(s.apply(Matrix::Zero(2, 4)), DimensionError);
}

TEST(LagWindows, UnitLagIsCurrentReading) {
  const Matrix s = Matrix::Random(6, 2);
  const RowMatrix w = lag_windows(s, 1);
  ASSERT_EQ(w.rows(), 6);
  ASSERT_EQ(w.cols(), 2);
  EXPECT_TRUE(Matrix(w) == s);
}

TEST(LagWindows, PrePaddingAndRamp) {
  Matrix ramp(8, 1);
  for (Index k = 0; k < 8; ++k) ramp(k, 0) = static_cast<double>(k + 1);
  const RowMatrix w = lag_windows(ramp, 3);
  EXPECT_EQ(w(0, 0), 0.0);
  EXPECT_EQ(w(0, 1), 0.0);
  EXPECT_EQ(w(0, 2), 1.0);
  EXPECT_EQ(w(4, 0), 3.0);
  EXPECT_EQ(w(4, 1), 4.0);
  EXPECT_EQ(w(4, 2), 5.0);
  EXPECT_THROW(lag_windows(ramp, 0), InvalidArgument);
}

TEST(LagWindows, ShiftProperty) {
  const Matrix s = Matrix::Random(20, 3);
  const Index lag = 4;
  const RowMatrix w = lag_windows(s, lag);
  for (Index k = lag; k < 20; ++k) {
    EXPECT_TRUE(w.row(k).head((lag - 1) * 3) == w.row(k - 1).tail((lag - 1) * 3));
    EXPECT_TRUE(w.row(k).tail(3) == s.row(k));
  }
}

TEST(BuildLagWindows, SampleCountIndependentOfLag) {
  const SensorArray sensors{Matrix::Random(7, 2), Matrix::Random(7, 2), Matrix::Random(7, 2)};
  const std::vector<Matrix> targets{Matrix::Random(7, 4), Matrix::Random(7, 4), Matrix::Random(7, 4)};
  for (Index lag : {1, 3, 10}) {
    const LagDataset d = build_lag_windows(sensors, targets, lag);
    EXPECT_EQ(d.size(), 21);
    EXPECT_EQ(d.out_dim(), 4);
    EXPECT_EQ(d.meta[8].scenario, 1);
    EXPECT_EQ(d.meta[8].time, 1);
    EXPECT_TRUE(d.targets.row(8) == targets[1].row(1));
    EXPECT_TRUE(Matrix(d.window(8).bottomRows(1)) == sensors[1].row(1));
  }
  const std::vector<Matrix> short_targets{Matrix::Random(7, 4)};
  EXPECT_THROW(build_lag_windows(sensors, short_targets, 2), DimensionError);
}

TEST(Split, ParameterwiseTenScenarios) {
  const SplitPlan p = make_split(SplitMode::parameterwise, 10, 5, SplitFractions{}, 1);
  EXPECT_EQ(p.count(SplitLabel::train), 8);
  EXPECT_EQ(p.count(SplitLabel::val), 1);
  EXPECT_EQ(p.count(SplitLabel::test), 1);
  for (Index i = 0; i < 10; ++i)
    for (Index k = 1; k < 5; ++k) EXPECT_EQ(p.label(i, k), p.label(i, 0));
  EXPECT_EQ(p.sample_count(SplitLabel::train), 40);
}

TEST(Split, TimewiseFloorRule) {
  const SplitPlan p = make_split(SplitMode::timewise, 3, 201, SplitFractions{}, 2);
  EXPECT_EQ(p.count(SplitLabel::train), 161);
  EXPECT_EQ(p.count(SplitLabel::val), 20);
  EXPECT_EQ(p.count(SplitLabel::test), 20);
  for (Index k = 0; k < 201; ++k) {
    EXPECT_EQ(p.label(0, k), p.label(2, k));
  }
  EXPECT_EQ(p.sample_count(SplitLabel::test), 60);
}

TEST(Split, PartitionDeterminismAndErrors) {
  const SplitPlan a = make_split(SplitMode::parameterwise, 37, 4, SplitFractions{}, 3);
  const SplitPlan b = make_split(SplitMode::parameterwise, 37, 4, SplitFractions{}, 3);
  EXPECT_EQ(a.groups, b.groups);
  const Matrix cover = a.mask(SplitLabel::train) + a.mask(SplitLabel::val) + a.mask(SplitLabel::test);
  EXPECT_TRUE((cover.array() == 1.0).all());
  EXPECT_THROW(make_split(SplitMode::parameterwise, 5, 4, SplitFractions{}, 0), InvalidArgument);
  EXPECT_THROW(make_split(SplitMode::timewise, 5, 40, SplitFractions{0.5, 0.1, 0.1}, 0),
               InvalidArgument);
  EXPECT_EQ(parse_split_mode("timewise"), SplitMode::timewise);
  EXPECT_THROW(parse_split_mode("random"), InvalidArgument);
}

TEST(AssignSplit, LabelsFollowPlan) {
  const SensorArray sensors(10, Matrix::Random(3, 1));
  const std::vector<Matrix> targets(10, Matrix::Random(3, 2));
  LagDataset d = build_lag_windows(sensors, targets, 2);
  const SplitPlan plan = make_split(SplitMode::parameterwise, 10, 3, SplitFractions{}, 4);
  assign_split(d, plan);
  for (Index n = 0; n < d.size(); ++n) {
    EXPECT_EQ(d.split[static_cast<std::size_t>(n)], plan.label(d.meta[n].scenario, d.meta[n].time));
  }
  EXPECT_EQ(d.indices(SplitLabel::test).size(), 3u);
}
