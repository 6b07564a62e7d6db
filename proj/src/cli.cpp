#include "dvqn/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dvqn/env.hpp"
#include "dvqn/errors.hpp"
#include "dvqn/experiment.hpp"
#include "dvqn/options.hpp"
#include "dvqn/plots.hpp"

namespace dvqn {

namespace {

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              std::optional<std::string> out_dir, int jobs) {
  ExperimentConfig config = load_experiment_config(config_path);
  if (seed) config.base_seed = *seed;
  if (out_dir) config.out_dir = *out_dir;
  const TrainResult result = run_training(config, jobs);
  std::printf("wrote %s (%d trials x %d episodes)\n", result.metrics_path.c_str(), config.trials,
              config.episodes);
  std::printf("mean final-window return: %.4f (std %.4f)\n", result.summary.mean_final_return,
              result.summary.std_final_return);
  for (const auto& trial : result.summary.trials)
    if (trial.aborted)
      std::printf("trial %d aborted after %d episodes (numerical divergence)\n", trial.trial,
                  trial.episodes_completed);
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& env_id, int episodes,
             std::uint64_t seed) {
  const LoadedAgent agent = load_agent_checkpoint(checkpoint);
  auto env = make_env(env_id.empty() ? agent.env_id : env_id);
  Rng rng(seed);
  const EvalResult result = evaluate(agent, *env, episodes, rng);
  nlohmann::json doc;
  doc["checkpoint"] = checkpoint;
  doc["env"] = env->id();
  doc["episodes"] = episodes;
  doc["mean_return"] = result.mean_return;
  doc["std_return"] = result.std_return;
  doc["returns"] = result.returns;
  std::cout << doc.dump(1, '\t') << "\n";
  return 0;
}

int cmd_options(const std::string& checkpoint, const std::string& env_id, int episodes,
                const std::string& k_arg, std::uint64_t seed, const std::string& out_dir) {
  const LoadedAgent agent = load_agent_checkpoint(checkpoint);
  auto env = make_env(env_id.empty() ? agent.env_id : env_id);
  Rng rng(seed);
  LatentDataset dataset = collect_embeddings(agent, *env, episodes, rng);
  dataset.seed = seed;

  int k;
  if (k_arg == "auto") {
    k = choose_k(dataset, rng);
  } else {
    try {
      k = std::stoi(k_arg);
    } catch (const std::exception&) {
      throw ConfigError("options: --k must be an integer or 'auto'");
    }
  }
  const ClusterModel model = kmeans(dataset, k, rng);
  const double score = model.k >= 2 ? silhouette(dataset, model) : 0.0;
  double purity = -1.0;
  bool has_labels = false;
  for (const auto& rec : dataset.records)
    if (rec.env_label >= 0) has_labels = true;
  if (has_labels) purity = label_purity(dataset, model);
  const std::vector<OptionSpec> specs = derive_options(model, dataset);

  std::filesystem::create_directories(out_dir);
  save_dataset(out_dir + "/dataset.json", dataset);
  export_options(out_dir + "/options.json", specs, model, dataset, score, purity);
  emit_latent_scatter(dataset, &model, out_dir + "/scatter.svg");

  std::printf("collected %zu embeddings over %d episodes\n", dataset.records.size(), episodes);
  std::printf("k=%d  inertia=%.6g  silhouette=%.4f", model.k, model.inertia, score);
  if (purity >= 0.0) std::printf("  label_purity=%.4f", purity);
  std::printf("\nwrote %s/{dataset.json,options.json,scatter.svg}\n", out_dir.c_str());
  return 0;
}

int cmd_plot_curve(const std::vector<std::string>& inputs, const std::string& out_path) {
  emit_learning_curve(inputs, out_path);
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

int cmd_plot_scatter(const std::vector<std::string>& inputs, const std::string& k_arg,
                     std::uint64_t seed, const std::string& out_path) {
  if (inputs.size() != 1) throw ConfigError("plot scatter: exactly one dataset file expected");
  const LatentDataset dataset = load_dataset(inputs[0]);
  if (k_arg == "none") {
    emit_latent_scatter(dataset, nullptr, out_path);
  } else {
    Rng rng(seed);
    const int k = k_arg == "auto" ? choose_k(dataset, rng) : std::stoi(k_arg);
    const ClusterModel model = kmeans(dataset, k, rng);
    emit_latent_scatter(dataset, &model, out_path);
  }
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Deep Variational Q-Network experiments"};
  app.require_subcommand(1);

  std::string config_path, checkpoint, env_id, out_dir = "runs/options", out_file;
  std::string k_arg = "auto";
  std::vector<std::string> inputs;
  std::uint64_t seed = 1;
  bool seed_set = false, out_set = false;
  int episodes = 20, jobs = 1;

  auto* train = app.add_subcommand("train", "Train an agent from a config file");
  train->add_option("--config", config_path, "experiment config JSON")->required();
  train->add_option("--seed", seed, "override base seed")->each([&](const std::string&) { seed_set = true; });
  train->add_option("--out", out_file, "override output directory")->each([&](const std::string&) { out_set = true; });
  train->add_option("--jobs", jobs, "parallel trial workers")->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint deterministically");
  eval->add_option("--checkpoint", checkpoint, "agent checkpoint")->required();
  eval->add_option("--env", env_id, "environment id (defaults to the checkpoint's)");
  eval->add_option("--episodes", episodes, "evaluation episodes")->check(CLI::PositiveNumber);
  eval->add_option("--seed", seed, "evaluation seed");

  auto* options = app.add_subcommand("options", "Cluster the latent space and derive options");
  options->add_option("--checkpoint", checkpoint, "dvqn checkpoint")->required();
  options->add_option("--env", env_id, "environment id (defaults to the checkpoint's)");
  options->add_option("--episodes", episodes, "rollout episodes")->check(CLI::PositiveNumber);
  options->add_option("--k", k_arg, "cluster count or 'auto'");
  options->add_option("--seed", seed, "rollout seed");
  options->add_option("--out", out_dir, "output directory");

  auto* plot = app.add_subcommand("plot", "Render vector-graphic plots");
  plot->require_subcommand(1);
  auto* curve = plot->add_subcommand("curve", "Learning curves from metrics CSVs");
  curve->add_option("--in", inputs, "metrics.csv files")->required()->expected(-1);
  curve->add_option("--out", out_file, "output SVG")->required();
  auto* scatter = plot->add_subcommand("scatter", "Latent scatter from a dataset JSON");
  scatter->add_option("--in", inputs, "dataset.json file")->required()->expected(-1);
  scatter->add_option("--k", k_arg, "cluster count, 'auto', or 'none'");
  scatter->add_option("--seed", seed, "clustering seed");
  scatter->add_option("--out", out_file, "output SVG")->required();

  try {
    app.parse(argc, argv);
    if (train->parsed())
      return cmd_train(config_path, seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt,
                       out_set ? std::optional<std::string>(out_file) : std::nullopt, jobs);
    if (eval->parsed()) return cmd_eval(checkpoint, env_id, episodes, seed);
    if (options->parsed()) return cmd_options(checkpoint, env_id, episodes, k_arg, seed, out_dir);
    if (curve->parsed()) return cmd_plot_curve(inputs, out_file);
    if (scatter->parsed()) return cmd_plot_scatter(inputs, k_arg, seed, out_file);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace dvqn
