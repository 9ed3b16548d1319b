#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "shredrom/csv.hpp"
#include "shredrom/error.hpp"
#include "shredrom/pipeline.hpp"

namespace fs = std::filesystem;
using namespace shredrom;

namespace {

struct Common {
  std::string config;
  std::string out = ".";
  std::string in;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig load_config(const Common& c) {
  ExperimentConfig config = c.config.empty() ? ExperimentConfig::parse("") : ExperimentConfig::load(c.config);
  if (c.seed) config.master_seed = *c.seed;
  return config;
}

fs::path input_dir(const Common& c) { return c.in.empty() ? fs::path(c.out) : fs::path(c.in); }

fs::path output_file(const Common& c, const std::string& name) {
  fs::create_directories(c.out);
  return fs::path(c.out) / name;
}

std::ofstream open_text(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

void log_line(const std::string& line) { std::cerr << line << '\n'; }

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Experiment config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  cmd->add_option("--in", c.in, "Input directory (defaults to --out)");
  cmd->add_option("--seed", c.seed, "Master seed for every unset stage seed");
}

void cmd_generate(const Common& c) {
  const ExperimentConfig config = load_config(c);
  const TrajectorySet set = run_generate(config, log_line);
  trajectories_to_file(set).write(output_file(c, "trajectories.srd1"));
  std::cerr << "generated " << set.n_scenarios() << " trajectories\n";
}

void cmd_pod(const Common& c, std::optional<Index> rank) {
  ExperimentConfig config = load_config(c);
  if (rank) config.pod.rank = *rank;
  const TrajectorySet set = trajectories_from_file(TensorFile::read(input_dir(c) / "trajectories.srd1"));
  const PodArtifact pod = run_pod(config, set);
  pod_to_file(pod).write(output_file(c, "pod.srd1"));
  std::cout << "pod_test_error " << format_double(pod.test_error) << '\n';
}

void cmd_dataset(const Common& c) {
  const ExperimentConfig config = load_config(c);
  const fs::path in = input_dir(c);
  const TrajectorySet set = trajectories_from_file(TensorFile::read(in / "trajectories.srd1"));
  const PodArtifact pod = pod_from_file(TensorFile::read(in / "pod.srd1"));
  const SplitPlan plan = experiment_split(config, set);
  check_leakage(pod, plan);
  const DatasetArtifact dataset =
      build_dataset(set, pod.basis, plan, dataset_options(config, set.state_dim()));
  dataset_to_file(dataset).write(output_file(c, "dataset.srd1"));
  std::cerr << "dataset: " << dataset.data.size() << " samples\n";
}

void cmd_train(const Common& c) {
  const ExperimentConfig config = load_config(c);
  const DatasetArtifact dataset = dataset_from_file(TensorFile::read(input_dir(c) / "dataset.srd1"));
  const TrainOutcome out = run_train(config, dataset, config.init_seed(), config.train_seed(),
                                     [](const EpochRecord& r) {
                                       std::cerr << "epoch " << r.epoch << " train " << r.train_loss
                                                 << " val " << r.val_loss << " (" << r.seconds << " s)\n";
                                     });
  model_to_file(out.model).write(output_file(c, "model.srd1"));
  std::ofstream history = open_text(output_file(c, "history.csv"));
  write_history_csv(history, out.history);
  std::cerr << "best epoch " << out.best_epoch << " val loss " << out.best_val_loss << '\n';
}

void cmd_eval(const Common& c) {
  const ExperimentConfig config = load_config(c);
  const fs::path in = input_dir(c);
  const TrajectorySet set = trajectories_from_file(TensorFile::read(in / "trajectories.srd1"));
  const PodArtifact pod = pod_from_file(TensorFile::read(in / "pod.srd1"));
  const TrainedModel model = model_from_file(TensorFile::read(in / "model.srd1"));
  const SplitPlan plan = experiment_split(config, set);
  check_leakage(pod, plan);
  const EvalReport report = evaluate_model(model, set, pod.basis, plan, config.sensors.noise_std,
                                           config.eval_noise_seed());
  std::ofstream csv = open_text(output_file(c, "eval_report.csv"));
  report.write_csv(csv);
  std::cout << format_double(report.mean_relative_error) << '\n';
  for (std::size_t j = 0; j < report.param_mae.size(); ++j) {
    std::cerr << "mae " << report.param_names[j] << ' ' << report.param_mae[j] << '\n';
  }
}

void cmd_ensemble(const Common& c, std::optional<Index> members, std::optional<double> noise_std) {
  const ExperimentConfig config = load_config(c);
  const fs::path in = input_dir(c);
  const TrajectorySet set = trajectories_from_file(TensorFile::read(in / "trajectories.srd1"));
  const PodArtifact pod = pod_from_file(TensorFile::read(in / "pod.srd1"));
  const EnsembleOutcome out = run_ensemble(config, set, pod, members.value_or(config.eval.members),
                                           noise_std.value_or(config.sensors.noise_std), log_line);
  fs::create_directories(fs::path(c.out) / "members");
  for (std::size_t m = 0; m < out.members.size(); ++m) {
    model_to_file(out.members[m]).write(fs::path(c.out) / "members" / ("model_" + std::to_string(m) + ".srd1"));
  }
  std::ofstream csv = open_text(output_file(c, "ensemble.csv"));
  csv << "member,test_eps\n";
  for (std::size_t m = 0; m < out.member_eps.size(); ++m) csv << m << ',' << format_double(out.member_eps[m]) << '\n';
  csv << "mean_member," << format_double(out.mean_member_eps) << '\n';
  csv << "ensemble," << format_double(out.ensemble_eps) << '\n';
  std::ofstream report = open_text(output_file(c, "ensemble_report.csv"));
  out.report.write_csv(report);
  std::cout << "ensemble " << format_double(out.ensemble_eps) << '\n'
            << "mean_member " << format_double(out.mean_member_eps) << '\n';
}

void cmd_sweep(const Common& c, std::optional<std::string> axis_name, std::vector<Index> values,
               std::optional<Index> placements) {
  const ExperimentConfig config = load_config(c);
  const fs::path in = input_dir(c);
  const TrajectorySet set = trajectories_from_file(TensorFile::read(in / "trajectories.srd1"));
  const PodArtifact pod = pod_from_file(TensorFile::read(in / "pod.srd1"));
  const SweepAxis axis = axis_name ? parse_sweep_axis(*axis_name) : config.eval.sweep_axis;
  if (values.empty()) values = config.eval.sweep_values;
  const std::vector<SweepCell> cells =
      run_sweep(config, set, pod, axis, values, placements.value_or(config.eval.sweep_placements), log_line);
  std::ofstream csv = open_text(output_file(c, "sweep.csv"));
  write_sweep_csv(csv, cells);
  std::cout << "value,succeeded,min,q25,median,q75,max\n";
  for (const SweepSummary& s : summarize_sweep(cells)) {
    std::cout << s.value << ',' << s.succeeded << ',' << format_double(s.min) << ',' << format_double(s.q25)
              << ',' << format_double(s.median) << ',' << format_double(s.q75) << ','
              << format_double(s.max) << '\n';
  }
  for (const SweepCell& cell : cells) {
    if (!cell.outcome) std::cerr << "cell " << cell.value << '/' << cell.placement_seed << " failed: " << cell.error << '\n';
  }
}

void report_error(const std::string& kind, const std::string& message, const ConfigError* config) {
  nlohmann::json line{{"error", kind}, {"message", message}};
  if (config) {
    line["section"] = config->section();
    line["key"] = config->key();
    line["line"] = config->line();
  }
  std::cerr << line.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-sensor reduced-order reconstruction of parametric PDE trajectories"};
  app.require_subcommand(1);

  Common common;
  std::optional<Index> rank;
  std::optional<Index> members;
  std::optional<double> noise_std;
  std::optional<std::string> axis;
  std::vector<Index> values;
  std::optional<Index> placements;

  auto* generate = app.add_subcommand("generate", "Simulate KS trajectories");
  auto* pod = app.add_subcommand("pod", "Fit the POD basis on training snapshots");
  auto* dataset = app.add_subcommand("dataset", "Build scaled lag windows and targets");
  auto* train = app.add_subcommand("train", "Train one model");
  auto* eval = app.add_subcommand("eval", "Score the trained model on the test split");
  auto* ensemble = app.add_subcommand("ensemble", "Train and score a noisy-sensor ensemble");
  auto* sweep = app.add_subcommand("sweep", "Sweep lag or sensor count over random placements");
  for (CLI::App* cmd : {generate, pod, dataset, train, eval, ensemble, sweep}) add_common(cmd, common);
  pod->add_option("--rank", rank, "Number of POD modes")->check(CLI::PositiveNumber);
  ensemble->add_option("--members", members, "Ensemble size")->check(CLI::PositiveNumber);
  ensemble->add_option("--noise-std", noise_std, "Sensor noise standard deviation")->check(CLI::NonNegativeNumber);
  sweep->add_option("--axis", axis, "lag or n_sensors")->check(CLI::IsMember({"lag", "n_sensors"}));
  sweep->add_option("--values", values, "Axis values")->delimiter(',');
  sweep->add_option("--placements", placements, "Random placements per value")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    report_error("usage", e.what(), nullptr);
    return 2;
  }

  try {
    if (*generate) cmd_generate(common);
    if (*pod) cmd_pod(common, rank);
    if (*dataset) cmd_dataset(common);
    if (*train) cmd_train(common);
    if (*eval) cmd_eval(common);
    if (*ensemble) cmd_ensemble(common, members, noise_std);
    if (*sweep) cmd_sweep(common, axis, values, placements);
  } catch (const ConfigError& e) {
    report_error(e.kind(), e.what(), &e);
    return 1;
  } catch (const Error& e) {
    report_error(e.kind(), e.what(), nullptr);
    return 1;
  } catch (const std::exception& e) {
    report_error("internal", e.what(), nullptr);
    return 1;
  }
  return 0;
}
