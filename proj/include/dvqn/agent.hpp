#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dvqn/env.hpp"
#include "dvqn/nn.hpp"
#include "dvqn/optim.hpp"
#include "dvqn/replay.hpp"
#include "dvqn/rng.hpp"
#include "dvqn/tape.hpp"

namespace dvqn {

enum class AgentKind { kDvqn, kDqn, kDdqn };

const char* agent_kind_name(AgentKind kind);
AgentKind agent_kind_from_name(std::string_view name);

struct AgentConfig {
  AgentKind kind = AgentKind::kDvqn;
  double gamma = 0.95;
  double learning_rate = 0.000025;
  int batch_size = 128;
  OptimizerKind optimizer = OptimizerKind::kRmsProp;
  ActivationKind activation = ActivationKind::elu();
  double c1 = 1.0;  // VAE objective weight
  double c2 = 1.0;  // Q objective weight
  double epsilon_start = 1.0;
  double epsilon_end = 0.01;
  double epsilon_decay = 0.001;  // per environment step, linear
  int target_sync_frames = 32000;
  int latent_dim = 2;
  int intermediate_dim = 128;
  int updates_per_episode = 0;  // 0 = one update per environment step
  std::size_t replay_capacity = 100000;

  static AgentConfig defaults(AgentKind kind);
  void validate() const;
};

// Fixed per-dimension divisors applied to observations before they enter a
// network; constants, never running statistics.
Vector observation_scale(std::string_view env_id, int obs_dim);

struct GaussianLatent {
  Vector mu;
  Vector logvar;
};

struct LossBreakdown {
  double recon = 0.0;
  double kl = 0.0;
  double q = 0.0;
  double total = 0.0;
  double c1 = 1.0;
  double c2 = 1.0;
};

// -0.5 * sum_i (1 + logvar_i - mu_i^2 - exp(logvar_i)); KL against the
// standard normal prior.
double kl_divergence(const GaussianLatent& latent);

// z = mu + exp(logvar / 2) .* eps
Vector sample_latent(const GaussianLatent& latent, const Vector& eps);

// Bootstrap target: r when done, else r + gamma * q_next[argmax q_next]
// (argmax-then-evaluate on the same values, ties to the lowest index).
double td_target(double reward, bool done, double gamma, const Vector& q_next);

int argmax_lowest(const Vector& v);

enum class ActionMode { kStochastic, kDeterministic };

// Q-learning agent whose state encoder is trained jointly as a variational
// autoencoder: encoder -> (mu, logvar) -> z -> {decoder, Q-head}. Exploration
// comes from the latent sample; there is no epsilon schedule.
class DvqnAgent {
 public:
  DvqnAgent(const AgentConfig& config, int obs_dim, int action_count, Vector obs_scale,
            Rng& init_rng);

  GaussianLatent encode(const Vector& observation) const;
  Vector decode(const Vector& z) const;
  Vector q_values(const Vector& z) const;
  int act(const Vector& observation, ActionMode mode, Rng& rng) const;

  // One sampled batch, one joint forward, one backward, one optimizer step.
  LossBreakdown train_step(const ReplayBuffer& buffer, Rng& rng);

  // Bootstrap targets for a batch, computed through deterministic latents
  // (eps = 0) with the current parameters; excluded from gradient flow.
  Vector compute_targets(const std::vector<Transition>& batch) const;

  // Joint loss for a fixed batch, noise draw, and frozen targets; used by
  // gradient checks.
  double loss_on_batch(const std::vector<Transition>& batch, const Matrix& eps,
                       const Vector& targets) const;
  LossBreakdown last_losses() const { return last_losses_; }

  const AgentConfig& config() const { return config_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  int obs_dim() const { return obs_dim_; }
  int action_count() const { return action_count_; }
  const Vector& obs_scale() const { return obs_scale_; }

 private:
  struct Graph {
    int recon_loss;
    int kl_loss;
    int q_loss;
    int total;
  };
  Graph build_graph(Tape& tape, const Matrix& scaled_obs, const std::vector<int>& actions,
                    const Matrix& eps, const Vector& targets) const;
  Matrix encode_batch(const Matrix& scaled_obs) const;  // returns mu rows

  AgentConfig config_;
  int obs_dim_;
  int action_count_;
  Vector obs_scale_;
  ParamSet params_;
  DenseLayer feature_, intermediate_, mu_head_, logvar_head_;
  DenseLayer dec_hidden_, dec_out_, q_hidden_, q_out_;
  Optimizer optimizer_;
  LossBreakdown last_losses_;
};

// Plain DQN / Double-DQN baseline: observation -> hidden ReLU stack -> Q.
class BaselineAgent {
 public:
  BaselineAgent(const AgentConfig& config, int obs_dim, int action_count, Vector obs_scale,
                Rng& init_rng);

  Vector q_values(const Vector& observation) const;
  int act(const Vector& observation, double epsilon, Rng& rng) const;
  double epsilon_at(std::int64_t env_steps) const;

  // Call once per environment frame; DDQN copies online -> target every
  // config.target_sync_frames frames.
  void on_env_frame();
  std::int64_t frames() const { return frames_; }

  double train_step(const ReplayBuffer& buffer, Rng& rng);
  Vector compute_targets(const std::vector<Transition>& batch) const;
  double loss_on_batch(const std::vector<Transition>& batch, const Vector& targets) const;
  double last_loss() const { return last_loss_; }

  const AgentConfig& config() const { return config_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  const ParamSet& target_params() const { return target_params_; }
  void sync_target();
  int obs_dim() const { return obs_dim_; }
  int action_count() const { return action_count_; }
  const Vector& obs_scale() const { return obs_scale_; }

 private:
  Vector target_q_values(const Vector& observation) const;

  AgentConfig config_;
  int obs_dim_;
  int action_count_;
  Vector obs_scale_;
  ParamSet params_;
  ParamSet target_params_;
  std::vector<DenseLayer> layers_;
  std::vector<DenseLayer> target_layers_;
  Optimizer optimizer_;
  std::int64_t frames_ = 0;
  double last_loss_ = 0.0;
};

// ---- Checkpoint I/O ----

struct LoadedAgent {
  AgentKind kind;
  std::string env_id;
  std::string config_digest;
  std::uint64_t file_digest = 0;
  AgentConfig config;
  std::unique_ptr<DvqnAgent> dvqn;
  std::unique_ptr<BaselineAgent> baseline;

  int greedy_act(const Vector& observation) const;
};

void save_agent_checkpoint(const std::string& path, const DvqnAgent& agent,
                           const std::string& env_id, const std::string& config_digest);
void save_agent_checkpoint(const std::string& path, const BaselineAgent& agent,
                           const std::string& env_id, const std::string& config_digest);
LoadedAgent load_agent_checkpoint(const std::string& path);

}  // namespace dvqn
