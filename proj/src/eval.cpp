#include "shredrom/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "shredrom/csv.hpp"
#include "shredrom/error.hpp"
#include "shredrom/parallel.hpp"
#include "shredrom/rng.hpp"

namespace shredrom {

RelativeErrors mean_relative_error(const Eigen::Ref<const Matrix>& truth,
                                   const Eigen::Ref<const Matrix>& pred) {
  if (truth.rows() != pred.rows() || truth.cols() != pred.cols()) {
    throw DimensionError("mean_relative_error: shapes differ");
  }
  RelativeErrors out;
  double sum = 0.0;
  for (Index i = 0; i < truth.rows(); ++i) {
    const double denom = truth.row(i).norm();
    if (denom == 0.0) {
      ++out.skipped;
      continue;
    }
    const double e = (truth.row(i) - pred.row(i)).norm() / denom;
    out.per_sample.push_back(e);
    out.rows.push_back(i);
    sum += e;
  }
  out.mean = out.per_sample.empty() ? 0.0 : sum / static_cast<double>(out.per_sample.size());
  return out;
}

Matrix predict_trajectory(const ShredModel& model, const Eigen::Ref<const Matrix>& raw_sensors) {
  if (raw_sensors.cols() != model.shape.n_sensors) {
    throw DimensionError("predict_trajectory: sensor width != n_sensors");
  }
  const Matrix scaled = model.input_scaler.apply(raw_sensors);
  const RowMatrix windows = lag_windows(scaled, model.shape.lag);
  return model.target_scaler.invert(predict_scaled(model, windows));
}

Matrix reconstruct_trajectory(const ShredModel& model, const PODBasis& basis,
                              const Eigen::Ref<const Matrix>& raw_sensors) {
  if (basis.rank() > model.shape.out_dim) {
    throw DimensionError("reconstruct_trajectory: basis rank exceeds model outputs");
  }
  const Matrix outputs = predict_trajectory(model, raw_sensors);
  return pod_reconstruct_rows(basis, outputs.leftCols(basis.rank()));
}

Matrix ensemble_outputs(std::span<const ShredModel> models, const Eigen::Ref<const Matrix>& raw_sensors) {
  if (models.empty()) throw InvalidArgument("ensemble: no members");
  const ModelShape& ref = models.front().shape;
  for (const ShredModel& m : models) {
    if (m.shape.lag != ref.lag || m.shape.n_sensors != ref.n_sensors || m.shape.out_dim != ref.out_dim) {
      throw DimensionError("ensemble: members differ in lag, n_sensors or out_dim");
    }
  }
  Matrix sum = predict_trajectory(models.front(), raw_sensors);
  for (std::size_t k = 1; k < models.size(); ++k) sum += predict_trajectory(models[k], raw_sensors);
  return sum / static_cast<double>(models.size());
}

Matrix ensemble_predict(std::span<const ShredModel> models, const Eigen::Ref<const Matrix>& raw_sensors,
                        const PODBasis& basis) {
  const Matrix mean = ensemble_outputs(models, raw_sensors);
  if (basis.rank() > mean.cols()) throw DimensionError("ensemble: basis rank exceeds model outputs");
  return pod_reconstruct_rows(basis, mean.leftCols(basis.rank()));
}

Vector parameter_mae(const Eigen::Ref<const Matrix>& truth, const Eigen::Ref<const Matrix>& pred) {
  if (truth.rows() != pred.rows() || truth.cols() != pred.cols()) {
    throw DimensionError("parameter_mae: shapes differ");
  }
  if (truth.rows() == 0) throw InvalidArgument("parameter_mae: no samples");
  return (truth - pred).cwiseAbs().colwise().mean().transpose();
}

void EvalReport::write_csv(std::ostream& out) const {
  out << "kind,key,scenario,time,value\n";
  for (const auto& [k, v] : metadata) out << "meta," << k << ",,," << v << '\n';
  out << "summary,mean_relative_error,,," << format_double(mean_relative_error) << '\n';
  out << "summary,skipped,,," << skipped << '\n';
  for (std::size_t j = 0; j < param_mae.size(); ++j) {
    const std::string name = j < param_names.size() ? param_names[j] : "param" + std::to_string(j);
    out << "param_mae," << name << ",,," << format_double(param_mae[j]) << '\n';
  }
  for (std::size_t s = 0; s < per_sample.size(); ++s) {
    out << "sample,," << samples[s].scenario << ',' << samples[s].time << ','
        << format_double(per_sample[s]) << '\n';
  }
}

EvalReport EvalReport::read_csv(std::istream& in) {
  EvalReport r;
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) !=
                                     std::vector<std::string>{"kind", "key", "scenario", "time", "value"}) {
    throw FormatError("eval report: bad header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw FormatError("eval report: expected 5 fields in '" + line + "'");
    if (f[0] == "meta") {
      r.metadata.emplace_back(f[1], f[4]);
    } else if (f[0] == "summary" && f[1] == "mean_relative_error") {
      r.mean_relative_error = parse_double(f[4]);
    } else if (f[0] == "summary" && f[1] == "skipped") {
      r.skipped = static_cast<Index>(parse_double(f[4]));
    } else if (f[0] == "param_mae") {
      r.param_names.push_back(f[1]);
      r.param_mae.push_back(parse_double(f[4]));
    } else if (f[0] == "sample") {
      r.samples.push_back({static_cast<Index>(std::stoll(f[2])), static_cast<Index>(std::stoll(f[3]))});
      r.per_sample.push_back(parse_double(f[4]));
    } else {
      throw FormatError("eval report: unknown row kind '" + f[0] + "'");
    }
  }
  return r;
}

std::string_view to_string(SweepAxis axis) { return axis == SweepAxis::lag ? "lag" : "n_sensors"; }

SweepAxis parse_sweep_axis(std::string_view text) {
  if (text == "lag") return SweepAxis::lag;
  if (text == "n_sensors" || text == "sensors") return SweepAxis::n_sensors;
  throw InvalidArgument("unknown sweep axis '" + std::string(text) + "'");
}

std::vector<SweepCell> sweep(SweepAxis axis, std::span<const Index> values, Index n_placements,
                             std::uint64_t seed, const CellRunner& run, std::size_t workers) {
  if (values.empty()) throw InvalidArgument("sweep: no axis values");
  if (n_placements < 1) throw InvalidArgument("sweep: n_placements must be >= 1");
  for (Index v : values) {
    if (v < 1) throw InvalidArgument("sweep: axis values must be >= 1");
  }
  const auto per_value = static_cast<std::size_t>(n_placements);
  std::vector<SweepCell> cells(values.size() * per_value);
  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    for (std::size_t p = 0; p < per_value; ++p) {
      SweepCell& c = cells[vi * per_value + p];
      c.axis = axis;
      c.value = values[vi];
      c.placement_seed = derive_seed(seed, p);
    }
  }
  parallel_for(cells.size(), [&](std::size_t i) {
    SweepCell& c = cells[i];
    try {
      c.outcome = run(c.value, c.placement_seed);
    } catch (const std::exception& e) {
      c.error = e.what();
    }
  }, workers);
  return cells;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<SweepSummary> summarize_sweep(std::span<const SweepCell> cells) {
  std::vector<Index> order;
  for (const SweepCell& c : cells) {
    if (std::find(order.begin(), order.end(), c.value) == order.end()) order.push_back(c.value);
  }
  std::vector<SweepSummary> out;
  for (Index v : order) {
    std::vector<double> eps;
    for (const SweepCell& c : cells) {
      if (c.value == v && c.outcome) eps.push_back(c.outcome->test_eps);
    }
    SweepSummary s;
    s.value = v;
    s.succeeded = static_cast<Index>(eps.size());
    if (!eps.empty()) {
      s.min = quantile(eps, 0.0);
      s.q25 = quantile(eps, 0.25);
      s.median = quantile(eps, 0.5);
      s.q75 = quantile(eps, 0.75);
      s.max = quantile(eps, 1.0);
    } else {
      s.min = s.q25 = s.median = s.q75 = s.max = std::nan("");
    }
    out.push_back(s);
  }
  return out;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepCell> cells) {
  out << "axis,value,placement_seed,test_eps,val_eps,train_seconds\n";
  for (const SweepCell& c : cells) {
    const double nan = std::nan("");
    out << to_string(c.axis) << ',' << c.value << ',' << c.placement_seed << ','
        << format_double(c.outcome ? c.outcome->test_eps : nan) << ','
        << format_double(c.outcome ? c.outcome->val_eps : nan) << ','
        << format_double(c.outcome ? c.outcome->train_seconds : nan) << '\n';
  }
}

}  // namespace shredrom
