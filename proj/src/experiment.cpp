#include "dvqn/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "dvqn/env.hpp"
#include "dvqn/errors.hpp"
#include "dvqn/replay.hpp"

namespace dvqn {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (!is_known_env(env_id)) throw ConfigError("unknown environment id: " + env_id);
  if (episodes <= 0) throw ConfigError("episodes must be positive");
  if (trials <= 0) throw ConfigError("trials must be positive");
  if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
  agent.validate();
  if (agent.kind != agent_kind) throw ConfigError("agent config kind disagrees with experiment");
}

namespace {

OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "rmsprop") return OptimizerKind::kRmsProp;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer: " + name);
}

std::string optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kRmsProp ? "rmsprop" : "adam";
}

ActivationKind activation_from_name(const std::string& name, double alpha) {
  if (name == "identity") return ActivationKind::identity();
  if (name == "relu") return ActivationKind::relu();
  if (name == "elu") return ActivationKind::elu(alpha);
  throw ConfigError("unknown activation: " + name);
}

std::string activation_name(ActivationKind kind) {
  switch (kind.kind) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kRelu:
      return "relu";
    case Activation::kElu:
      return "elu";
  }
  return "?";
}

void apply_agent_overrides(AgentConfig& agent, const json& overrides) {
  double elu_alpha = agent.activation.alpha;
  if (overrides.contains("elu_alpha")) elu_alpha = overrides.at("elu_alpha");
  for (const auto& [key, value] : overrides.items()) {
    if (key == "gamma")
      agent.gamma = value;
    else if (key == "learning_rate")
      agent.learning_rate = value;
    else if (key == "batch_size")
      agent.batch_size = value;
    else if (key == "optimizer")
      agent.optimizer = optimizer_from_name(value);
    else if (key == "activation")
      agent.activation = activation_from_name(value, elu_alpha);
    else if (key == "elu_alpha")
      ;  // consumed above
    else if (key == "c1")
      agent.c1 = value;
    else if (key == "c2")
      agent.c2 = value;
    else if (key == "epsilon_start")
      agent.epsilon_start = value;
    else if (key == "epsilon_end")
      agent.epsilon_end = value;
    else if (key == "epsilon_decay")
      agent.epsilon_decay = value;
    else if (key == "target_sync_frames")
      agent.target_sync_frames = value;
    else if (key == "latent_dim")
      agent.latent_dim = value;
    else if (key == "intermediate_dim")
      agent.intermediate_dim = value;
    else if (key == "updates_per_episode")
      agent.updates_per_episode = value;
    else if (key == "replay_capacity")
      agent.replay_capacity = value;
    else
      throw ConfigError("unknown agent override key: " + key);
  }
  if (agent.activation.kind == Activation::kElu && elu_alpha != agent.activation.alpha)
    agent.activation = ActivationKind::elu(elu_alpha);
}

}  // namespace

ExperimentConfig experiment_config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad JSON: ") + e.what());
  }
  ExperimentConfig config;
  bool have_env = false, have_agent = false;
  for (const auto& [key, value] : doc.items()) {
    if (key == "env") {
      config.env_id = value;
      have_env = true;
    } else if (key == "agent") {
      config.agent_kind = agent_kind_from_name(value.get<std::string>());
      have_agent = true;
    } else if (key == "episodes") {
      config.episodes = value;
    } else if (key == "trials") {
      config.trials = value;
    } else if (key == "seed") {
      config.base_seed = value;
    } else if (key == "out_dir") {
      config.out_dir = value;
    } else if (key == "fidelity_mode") {
      config.fidelity_mode = value;
    } else if (key == "agent_overrides") {
      // applied after defaults below
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  }
  if (!have_env) throw ConfigError("config: missing required key 'env'");
  if (!have_agent) throw ConfigError("config: missing required key 'agent'");
  config.agent = AgentConfig::defaults(config.agent_kind);
  if (config.fidelity_mode) {
    config.agent.updates_per_episode = 1;
    config.agent.replay_capacity = 1000000;
  }
  if (doc.contains("agent_overrides")) apply_agent_overrides(config.agent, doc.at("agent_overrides"));
  config.validate();
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return experiment_config_from_json(text);
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
  json doc;
  doc["env"] = config.env_id;
  doc["agent"] = agent_kind_name(config.agent_kind);
  doc["episodes"] = config.episodes;
  doc["trials"] = config.trials;
  doc["seed"] = config.base_seed;
  doc["out_dir"] = config.out_dir;
  doc["fidelity_mode"] = config.fidelity_mode;
  const AgentConfig& a = config.agent;
  doc["agent_overrides"] = {{"gamma", a.gamma},
                            {"learning_rate", a.learning_rate},
                            {"batch_size", a.batch_size},
                            {"optimizer", optimizer_name(a.optimizer)},
                            {"activation", activation_name(a.activation)},
                            {"elu_alpha", a.activation.alpha},
                            {"c1", a.c1},
                            {"c2", a.c2},
                            {"epsilon_start", a.epsilon_start},
                            {"epsilon_end", a.epsilon_end},
                            {"epsilon_decay", a.epsilon_decay},
                            {"target_sync_frames", a.target_sync_frames},
                            {"latent_dim", a.latent_dim},
                            {"intermediate_dim", a.intermediate_dim},
                            {"updates_per_episode", a.updates_per_episode},
                            {"replay_capacity", a.replay_capacity}};
  return doc.dump(1, '\t');
}

std::string config_digest(const ExperimentConfig& config) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(experiment_config_to_json(config))));
  return buf;
}

namespace {

struct TrialOutput {
  std::string rows;  // formatted CSV block (parallel mode only)
  TrialSummary summary;
  std::string checkpoint_path;
};

using RowSink = std::function<void(const MetricsRow&)>;

TrialOutput run_trial(const ExperimentConfig& config, int trial, const std::string& digest,
                      const EpisodeObserver& observer, const RowSink& row_sink) {
  TrialOutput output;
  Rng trial_rng(mix_seed(config.base_seed, static_cast<std::uint64_t>(trial)));
  Rng init_rng = trial_rng.split("init");
  Rng env_rng = trial_rng.split("env");
  Rng policy_rng = trial_rng.split("policy");
  Rng replay_rng = trial_rng.split("replay");

  auto env = make_env(config.env_id);
  const Vector scale = observation_scale(config.env_id, env->obs_dim());
  std::unique_ptr<DvqnAgent> dvqn;
  std::unique_ptr<BaselineAgent> baseline;
  if (config.agent_kind == AgentKind::kDvqn)
    dvqn = std::make_unique<DvqnAgent>(config.agent, env->obs_dim(), env->action_count(), scale,
                                       init_rng);
  else
    baseline = std::make_unique<BaselineAgent>(config.agent, env->obs_dim(), env->action_count(),
                                               scale, init_rng);
  ReplayBuffer buffer(config.agent.replay_capacity);
  const std::size_t warm = static_cast<std::size_t>(config.agent.batch_size);

  std::vector<MetricsRow> rows;
  rows.reserve(static_cast<std::size_t>(config.episodes));
  bool aborted = false;
  std::int64_t env_steps = 0;

  for (int episode = 0; episode < config.episodes && !aborted; ++episode) {
    Vector obs = env->reset(env_rng);
    const int shortest = env->shortest_path_length();
    double episode_return = 0.0;
    int steps = 0;
    double recon_sum = 0.0, kl_sum = 0.0, q_sum = 0.0, total_sum = 0.0;
    int update_count = 0;
    bool done = false;
    bool diverged = false;

    auto do_update = [&]() {
      if (buffer.size() < warm) return;
      if (dvqn) {
        const LossBreakdown losses = dvqn->train_step(buffer, replay_rng);
        recon_sum += losses.recon;
        kl_sum += losses.kl;
        q_sum += losses.q;
        total_sum += losses.total;
      } else {
        const double loss = baseline->train_step(buffer, replay_rng);
        q_sum += loss;
        total_sum += loss;
      }
      ++update_count;
    };

    try {
      while (!done) {
        int action;
        if (dvqn) {
          action = dvqn->act(obs, ActionMode::kStochastic, policy_rng);
        } else {
          action = baseline->act(obs, baseline->epsilon_at(env_steps), policy_rng);
        }
        const StepResult result = env->step(action);
        buffer.push({obs, action, result.reward, result.observation, result.done});
        obs = result.observation;
        episode_return += result.reward;
        done = result.done;
        steps = result.steps_elapsed;
        ++env_steps;
        if (baseline) baseline->on_env_frame();
        if (config.agent.updates_per_episode == 0) do_update();
      }
      for (int u = 0; u < config.agent.updates_per_episode; ++u) do_update();
    } catch (const NumericalError&) {
      diverged = true;
      aborted = true;
    }

    MetricsRow row;
    row.trial = trial;
    row.episode = episode;
    row.episode_return = episode_return;
    row.steps = steps;
    const double nan = std::nan("");
    if (dvqn) {
      row.recon = update_count ? recon_sum / update_count : nan;
      row.kl = update_count ? kl_sum / update_count : nan;
      row.q_loss = update_count ? q_sum / update_count : nan;
      row.total_loss = update_count ? total_sum / update_count : nan;
      row.epsilon = nan;
    } else {
      row.recon = nan;
      row.kl = nan;
      row.q_loss = update_count ? q_sum / update_count : nan;
      row.total_loss = update_count ? total_sum / update_count : nan;
      row.epsilon = baseline->epsilon_at(env_steps);
    }
    if (diverged) {
      row.recon = nan;
      row.kl = nan;
      row.q_loss = nan;
      row.total_loss = nan;
    }
    rows.push_back(row);
    row_sink(row);
    if (observer) observer({trial, episode, episode_return, steps, shortest});
  }

  output.summary = summarize_trial(rows, trial, aborted);
  output.checkpoint_path = config.out_dir + "/trial" + std::to_string(trial) + ".ckpt";
  if (dvqn)
    save_agent_checkpoint(output.checkpoint_path, *dvqn, config.env_id, digest);
  else
    save_agent_checkpoint(output.checkpoint_path, *baseline, config.env_id, digest);
  return output;
}

void write_summary_json(const std::string& path, const RunSummary& summary,
                        const ExperimentConfig& config) {
  json doc;
  doc["config_digest"] = summary.config_digest;
  doc["env"] = config.env_id;
  doc["agent"] = agent_kind_name(config.agent_kind);
  doc["mean_final_return"] = summary.mean_final_return;
  doc["std_final_return"] = summary.std_final_return;
  doc["wall_clock_seconds"] = summary.wall_clock_seconds;
  json trials = json::array();
  for (const auto& t : summary.trials)
    trials.push_back({{"trial", t.trial},
                      {"final_window_mean", t.final_window_mean},
                      {"window", t.window},
                      {"episodes_completed", t.episodes_completed},
                      {"aborted", t.aborted}});
  doc["trials"] = std::move(trials);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("summary: cannot open " + path);
  out << doc.dump(1, '\t') << "\n";
}

}  // namespace

TrainResult run_training(const ExperimentConfig& config, int jobs, const EpisodeObserver& observer) {
  config.validate();
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(config.out_dir);
  const std::string digest = config_digest(config);
  const std::string metrics_path = config.out_dir + "/metrics.csv";
  std::ofstream metrics(metrics_path, std::ios::binary | std::ios::trunc);
  if (!metrics) throw ConfigError("cannot open " + metrics_path + " for writing");
  metrics << kMetricsHeader << "\n";
  metrics.flush();

  TrainResult result;
  result.metrics_path = metrics_path;
  std::vector<TrialSummary> summaries;

  if (jobs == 1) {
    // Serial: stream every row to disk as the episode completes.
    for (int trial = 0; trial < config.trials; ++trial) {
      TrialOutput output = run_trial(config, trial, digest, observer, [&](const MetricsRow& row) {
        metrics << format_metrics_row(row);
        metrics.flush();
      });
      summaries.push_back(output.summary);
      result.checkpoint_paths.push_back(output.checkpoint_path);
    }
  } else {
    // Parallel: buffer per-trial blocks, commit in trial order.
    std::vector<TrialOutput> outputs(static_cast<std::size_t>(config.trials));
    std::vector<bool> ready(static_cast<std::size_t>(config.trials), false);
    std::mutex mu;
    std::condition_variable cv;
    std::atomic<int> next_trial{0};
    std::exception_ptr failure;

    auto worker = [&]() {
      while (true) {
        const int trial = next_trial.fetch_add(1);
        if (trial >= config.trials) return;
        try {
          std::string block;
          TrialOutput output = run_trial(config, trial, digest, observer,
                                         [&](const MetricsRow& row) { block += format_metrics_row(row); });
          output.rows = std::move(block);
          std::lock_guard<std::mutex> lock(mu);
          outputs[static_cast<std::size_t>(trial)] = std::move(output);
          ready[static_cast<std::size_t>(trial)] = true;
          cv.notify_all();
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
          ready[static_cast<std::size_t>(trial)] = true;
          cv.notify_all();
        }
      }
    };

    const int thread_count = std::min(jobs, config.trials);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(thread_count));
    for (int i = 0; i < thread_count; ++i) threads.emplace_back(worker);

    bool failed = false;
    for (int trial = 0; trial < config.trials && !failed; ++trial) {
      std::unique_lock<std::mutex> lock(mu);
      cv.wait(lock, [&] { return ready[static_cast<std::size_t>(trial)] || failure; });
      if (failure) {
        failed = true;
        break;
      }
      metrics << outputs[static_cast<std::size_t>(trial)].rows;
      metrics.flush();
      summaries.push_back(outputs[static_cast<std::size_t>(trial)].summary);
      result.checkpoint_paths.push_back(outputs[static_cast<std::size_t>(trial)].checkpoint_path);
      outputs[static_cast<std::size_t>(trial)].rows.clear();
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  result.summary = summarize_run(summaries);
  result.summary.config_digest = digest;
  result.summary.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_summary_json(config.out_dir + "/summary.json", result.summary, config);
  return result;
}

EvalResult evaluate(const LoadedAgent& agent, Environment& env, int episodes, Rng& rng) {
  if (episodes <= 0) throw UsageError("evaluate: episodes must be positive");
  EvalResult result;
  for (int episode = 0; episode < episodes; ++episode) {
    Vector obs = env.reset(rng);
    double episode_return = 0.0;
    bool done = false;
    int steps = 0;
    while (!done) {
      const StepResult step = env.step(agent.greedy_act(obs));
      episode_return += step.reward;
      obs = step.observation;
      done = step.done;
      steps = step.steps_elapsed;
    }
    result.returns.push_back(episode_return);
    result.steps.push_back(steps);
  }
  double total = 0.0;
  for (double r : result.returns) total += r;
  result.mean_return = total / static_cast<double>(episodes);
  double var = 0.0;
  for (double r : result.returns) var += (r - result.mean_return) * (r - result.mean_return);
  result.std_return = std::sqrt(var / static_cast<double>(episodes));
  return result;
}

}  // namespace dvqn
