#include "shredrom/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "shredrom/csv.hpp"
#include "shredrom/error.hpp"
#include "shredrom/rng.hpp"

namespace shredrom {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double real_value(std::string_view v) {
  try {
    const double x = parse_double(v);
    if (!std::isfinite(x)) throw InvalidArgument("value must be finite");
    return x;
  } catch (const FormatError&) {
    throw InvalidArgument("expected a real number, got '" + std::string(v) + "'");
  }
}

double positive(std::string_view v) {
  const double x = real_value(v);
  if (!(x > 0.0)) throw InvalidArgument("must be > 0, got " + std::string(v));
  return x;
}

double nonnegative(std::string_view v) {
  const double x = real_value(v);
  if (!(x >= 0.0)) throw InvalidArgument("must be >= 0, got " + std::string(v));
  return x;
}

std::uint64_t unsigned_value(std::string_view v) {
  std::uint64_t x = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw InvalidArgument("expected a nonnegative integer, got '" + std::string(v) + "'");
  }
  return x;
}

Index count(std::string_view v, Index min_value) {
  const auto x = static_cast<Index>(unsigned_value(v));
  if (x < min_value) {
    throw InvalidArgument("must be >= " + std::to_string(min_value) + ", got " + std::string(v));
  }
  return x;
}

std::vector<Index> index_list(std::string_view v, Index min_value) {
  std::vector<Index> out;
  if (trim(v).empty()) return out;
  for (const std::string& field : split_csv_line(v)) out.push_back(count(trim(field), min_value));
  return out;
}

bool boolean(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidArgument("expected true or false, got '" + std::string(v) + "'");
}

double fraction(std::string_view v) {
  const double x = real_value(v);
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("must lie in [0, 1]");
  return x;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view)>;

struct KeySpec {
  std::string_view section;
  std::string_view key;
  Setter set;
};

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"ks", "domain_length", [](auto& c, auto v) { c.ks.solver.domain_length = positive(v); }},
      {"ks", "horizon", [](auto& c, auto v) { c.ks.solver.horizon = positive(v); }},
      {"ks", "dt", [](auto& c, auto v) { c.ks.solver.dt = positive(v); }},
      {"ks", "n_grid", [](auto& c, auto v) { c.ks.solver.n_grid = count(v, 4); }},
      {"ks", "save_stride", [](auto& c, auto v) { c.ks.solver.save_stride = count(v, 1); }},
      {"ks", "contour_points", [](auto& c, auto v) { c.ks.solver.contour_points = count(v, 2); }},
      {"ks", "nu_min", [](auto& c, auto v) { c.ks.nu.lo = positive(v); }},
      {"ks", "nu_max", [](auto& c, auto v) { c.ks.nu.hi = positive(v); }},
      {"ks", "omega_min", [](auto& c, auto v) { c.ks.omega.lo = real_value(v); }},
      {"ks", "omega_max", [](auto& c, auto v) { c.ks.omega.hi = real_value(v); }},
      {"ks", "n_trajectories", [](auto& c, auto v) { c.ks.n_trajectories = count(v, 1); }},
      {"ks", "max_resamples", [](auto& c, auto v) { c.ks.max_resamples = count(v, 0); }},
      {"ks", "seed", [](auto& c, auto v) { c.ks.seed = unsigned_value(v); }},

      {"pod", "rank", [](auto& c, auto v) { c.pod.rank = count(v, 1); }},
      {"pod", "oversample", [](auto& c, auto v) { c.pod.oversample = count(v, 0); }},
      {"pod", "power_iters", [](auto& c, auto v) { c.pod.power_iters = count(v, 0); }},
      {"pod", "seed", [](auto& c, auto v) { c.pod.seed = unsigned_value(v); }},

      {"sensors", "n_sensors", [](auto& c, auto v) { c.sensors.n_sensors = count(v, 1); }},
      {"sensors", "indices", [](auto& c, auto v) { c.sensors.indices = index_list(v, 0); }},
      {"sensors", "noise_std", [](auto& c, auto v) { c.sensors.noise_std = nonnegative(v); }},
      {"sensors", "noise_seed", [](auto& c, auto v) { c.sensors.noise_seed = unsigned_value(v); }},
      {"sensors", "placement_seed", [](auto& c, auto v) { c.sensors.placement_seed = unsigned_value(v); }},

      {"dataset", "lag", [](auto& c, auto v) { c.dataset.lag = count(v, 1); }},
      {"dataset", "split", [](auto& c, auto v) { c.dataset.split = parse_split_mode(v); }},
      {"dataset", "train_fraction", [](auto& c, auto v) { c.dataset.fractions.train = fraction(v); }},
      {"dataset", "val_fraction", [](auto& c, auto v) { c.dataset.fractions.val = fraction(v); }},
      {"dataset", "test_fraction", [](auto& c, auto v) { c.dataset.fractions.test = fraction(v); }},
      {"dataset", "split_seed", [](auto& c, auto v) { c.dataset.split_seed = unsigned_value(v); }},
      {"dataset", "estimate_params", [](auto& c, auto v) { c.dataset.estimate_params = boolean(v); }},

      {"model", "hidden", [](auto& c, auto v) { c.model.hidden = count(v, 1); }},
      {"model", "lstm_layers", [](auto& c, auto v) { c.model.lstm_layers = count(v, 1); }},
      {"model", "decoder_hidden", [](auto& c, auto v) { c.model.decoder_hidden = index_list(v, 1); }},
      {"model", "forget_bias", [](auto& c, auto v) { c.model.forget_bias = real_value(v); }},
      {"model", "init_seed", [](auto& c, auto v) { c.model.init_seed = unsigned_value(v); }},

      {"train", "epochs", [](auto& c, auto v) { c.train.epochs = count(v, 1); }},
      {"train", "lr_phase1", [](auto& c, auto v) { c.train.lr_phase1 = nonnegative(v); }},
      {"train", "lr_phase2", [](auto& c, auto v) { c.train.lr_phase2 = nonnegative(v); }},
      {"train", "phase_split", [](auto& c, auto v) { c.train.phase_split = count(v, 0); }},
      {"train", "batch_size", [](auto& c, auto v) { c.train.batch_size = count(v, 1); }},
      {"train", "dropout", [](auto& c, auto v) {
         const double p = nonnegative(v);
         if (p >= 1.0) throw InvalidArgument("must be < 1");
         c.train.dropout = p;
       }},
      {"train", "adam_beta1", [](auto& c, auto v) { c.train.adam_beta1 = fraction(v); }},
      {"train", "adam_beta2", [](auto& c, auto v) { c.train.adam_beta2 = fraction(v); }},
      {"train", "adam_eps", [](auto& c, auto v) { c.train.adam_eps = positive(v); }},
      {"train", "clip_norm", [](auto& c, auto v) { c.train.clip_norm = nonnegative(v); }},
      {"train", "grad_chunk", [](auto& c, auto v) { c.train.grad_chunk = count(v, 0); }},
      {"train", "seed", [](auto& c, auto v) {
         c.train.seed = unsigned_value(v);
         c.train_seed_set = true;
       }},

      {"eval", "members", [](auto& c, auto v) { c.eval.members = count(v, 1); }},
      {"eval", "noise_seed", [](auto& c, auto v) { c.eval.noise_seed = unsigned_value(v); }},
      {"eval", "sweep_axis", [](auto& c, auto v) { c.eval.sweep_axis = parse_sweep_axis(v); }},
      {"eval", "sweep_values", [](auto& c, auto v) { c.eval.sweep_values = index_list(v, 1); }},
      {"eval", "sweep_placements", [](auto& c, auto v) { c.eval.sweep_placements = count(v, 1); }},
      {"eval", "sweep_seed", [](auto& c, auto v) { c.eval.sweep_seed = unsigned_value(v); }},
      {"eval", "sweep_workers", [](auto& c, auto v) { c.eval.sweep_workers = count(v, 0); }},
  };
  return table;
}

// Cross-field checks, reported against the most specific key.
void validate(const ExperimentConfig& c) {
  const auto fail = [](const std::string& msg, const char* section, const char* key) {
    throw ConfigError("[" + std::string(section) + "] " + key + ": " + msg, section, key, 0);
  };
  try {
    c.ks.solver.validate();
  } catch (const InvalidArgument& e) {
    fail(e.what(), "ks", "dt");
  }
  if (!(c.ks.nu.lo < c.ks.nu.hi)) fail("nu_min must be < nu_max", "ks", "nu_min");
  if (!(c.ks.omega.lo < c.ks.omega.hi)) fail("omega_min must be < omega_max", "ks", "omega_min");
  if (c.pod.rank > c.ks.solver.n_grid) fail("rank exceeds n_grid", "pod", "rank");
  if (!c.sensors.indices.empty()) {
    try {
      SensorConfig{c.sensors.indices, c.sensors.noise_std, 0}.validate(c.ks.solver.n_grid);
    } catch (const InvalidArgument& e) {
      fail(e.what(), "sensors", "indices");
    }
  } else if (c.sensors.n_sensors > c.ks.solver.n_grid) {
    fail("more sensors than grid points", "sensors", "n_sensors");
  }
  const auto& f = c.dataset.fractions;
  if (std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
    fail("train/val/test fractions must sum to 1", "dataset", "train_fraction");
  }
  if (c.model.decoder_hidden.empty()) fail("at least one decoder layer required", "model", "decoder_hidden");
  if (c.train.phase_split > c.train.epochs) fail("phase_split exceeds epochs", "train", "phase_split");
  try {
    c.train.validate();
  } catch (const InvalidArgument& e) {
    fail(e.what(), "train", "epochs");
  }
  if (c.eval.sweep_values.empty()) fail("at least one value required", "eval", "sweep_values");
}

std::uint64_t stage_seed(std::uint64_t master, std::string_view stage) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char ch : stage) h = (h ^ static_cast<unsigned char>(ch)) * 1099511628211ULL;
  return derive_seed(master, h);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig cfg;
  cfg.train.seed = 0;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header", "", "", line_no);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      bool known = false;
      for (const KeySpec& k : key_table()) known = known || k.section == section;
      if (!known) {
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]", section, "", line_no);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value", section, "", line_no);
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "' outside any section", "", key, line_no);
    }
    const KeySpec* spec = nullptr;
    for (const KeySpec& k : key_table()) {
      if (k.section == section && k.key == key) spec = &k;
    }
    if (!spec) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key [" + section + "] " + key, section, key, line_no);
    }
    try {
      spec->set(cfg, value);
    } catch (const InvalidArgument& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": [" + section + "] " + key + ": " + e.what(),
                        section, key, line_no);
    }
    if (end == text.size()) break;
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'", "", "", 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::vector<std::string> ExperimentConfig::known_keys() {
  std::vector<std::string> out;
  for (const KeySpec& k : key_table()) out.push_back(std::string(k.section) + "." + std::string(k.key));
  return out;
}

std::uint64_t ExperimentConfig::ks_seed() const { return ks.seed.value_or(stage_seed(master_seed, "ks")); }
std::uint64_t ExperimentConfig::pod_seed() const { return pod.seed.value_or(stage_seed(master_seed, "pod")); }
std::uint64_t ExperimentConfig::split_seed() const {
  return dataset.split_seed.value_or(stage_seed(master_seed, "split"));
}
std::uint64_t ExperimentConfig::placement_seed() const {
  return sensors.placement_seed.value_or(stage_seed(master_seed, "placement"));
}
std::uint64_t ExperimentConfig::noise_seed() const {
  return sensors.noise_seed.value_or(stage_seed(master_seed, "noise"));
}
std::uint64_t ExperimentConfig::eval_noise_seed() const {
  return eval.noise_seed.value_or(stage_seed(master_seed, "eval_noise"));
}
std::uint64_t ExperimentConfig::init_seed() const {
  return model.init_seed.value_or(stage_seed(master_seed, "init"));
}
std::uint64_t ExperimentConfig::train_seed() const {
  return train_seed_set ? train.seed : stage_seed(master_seed, "train");
}
std::uint64_t ExperimentConfig::sweep_seed() const {
  return eval.sweep_seed.value_or(stage_seed(master_seed, "sweep"));
}

}  // namespace shredrom
