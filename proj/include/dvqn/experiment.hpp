#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dvqn/agent.hpp"
#include "dvqn/metrics.hpp"

namespace dvqn {

struct ExperimentConfig {
  std::string env_id;
  AgentKind agent_kind = AgentKind::kDvqn;
  int episodes = 100;
  int trials = 5;
  std::uint64_t base_seed = 1;
  std::string out_dir = "runs/out";
  bool fidelity_mode = false;  // literal once-per-episode updates, 1m replay
  AgentConfig agent;

  void validate() const;
};

ExperimentConfig experiment_config_from_json(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& config);
std::string config_digest(const ExperimentConfig& config);

// Per-episode callback payload used by callers that need more than the CSV
// (for example gridworld shortest-path ratios).
struct EpisodeStats {
  int trial = 0;
  int episode = 0;
  double episode_return = 0.0;
  int steps = 0;
  int shortest_path = -1;  // layout BFS length, gridworlds only
};
using EpisodeObserver = std::function<void(const EpisodeStats&)>;

struct TrainResult {
  RunSummary summary;
  std::string metrics_path;
  std::vector<std::string> checkpoint_paths;
};

// Trains `config.trials` independent trials, streaming one MetricsRow per
// episode to <out_dir>/metrics.csv, writing one checkpoint per trial and a
// summary JSON. `jobs` > 1 runs trials concurrently; output bytes are
// identical to a serial run. The observer, when set, is invoked from worker
// threads (one trial at a time per thread).
TrainResult run_training(const ExperimentConfig& config, int jobs = 1,
                         const EpisodeObserver& observer = nullptr);

struct EvalResult {
  double mean_return = 0.0;
  double std_return = 0.0;
  std::vector<double> returns;
  std::vector<int> steps;
};

// Deterministic action mode (DVQN) or epsilon = 0 (baselines).
EvalResult evaluate(const LoadedAgent& agent, Environment& env, int episodes, Rng& rng);

}  // namespace dvqn
