#include <cmath>
#include <numbers>

#include "dvqn/agent.hpp"
#include "dvqn/errors.hpp"

namespace dvqn {

const char* agent_kind_name(AgentKind kind) {
  switch (kind) {
    case AgentKind::kDvqn:
      return "dvqn";
    case AgentKind::kDqn:
      return "dqn";
    case AgentKind::kDdqn:
      return "ddqn";
  }
  return "?";
}

AgentKind agent_kind_from_name(std::string_view name) {
  if (name == "dvqn") return AgentKind::kDvqn;
  if (name == "dqn") return AgentKind::kDqn;
  if (name == "ddqn") return AgentKind::kDdqn;
  throw ConfigError("unknown agent kind: " + std::string(name));
}

AgentConfig AgentConfig::defaults(AgentKind kind) {
  AgentConfig config;
  config.kind = kind;
  if (kind == AgentKind::kDvqn) {
    config.learning_rate = 0.000025;
    config.batch_size = 128;
    config.optimizer = OptimizerKind::kRmsProp;
    config.activation = ActivationKind::elu();
  } else {
    config.learning_rate = 0.003;
    config.batch_size = 32;
    config.optimizer = OptimizerKind::kAdam;
    config.activation = ActivationKind::relu();
  }
  return config;
}

void AgentConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in [0, 1]");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (latent_dim <= 0) throw ConfigError("latent_dim must be positive");
  if (intermediate_dim <= 0) throw ConfigError("intermediate_dim must be positive");
  if (updates_per_episode < 0) throw ConfigError("updates_per_episode must be >= 0");
  if (replay_capacity == 0) throw ConfigError("replay_capacity must be positive");
  if (kind == AgentKind::kDvqn) {
    if (!(c1 > 0.0) && !(c2 > 0.0)) throw ConfigError("dvqn: c1 and c2 cannot both be zero");
    if (c1 < 0.0 || c2 < 0.0) throw ConfigError("dvqn: c1 and c2 must be nonnegative");
  } else {
    if (!(epsilon_end <= epsilon_start)) throw ConfigError("epsilon_end must be <= epsilon_start");
    if (epsilon_start > 1.0 || epsilon_end < 0.0) throw ConfigError("epsilon out of [0, 1]");
    if (epsilon_decay < 0.0) throw ConfigError("epsilon_decay must be >= 0");
    if (kind == AgentKind::kDdqn && target_sync_frames <= 0)
      throw ConfigError("target_sync_frames must be positive");
  }
}

Vector observation_scale(std::string_view env_id, int obs_dim) {
  Vector scale = Vector::Ones(obs_dim);
  if (env_id == "cartpole") {
    scale << 2.4, 5.0, 0.21, 5.0;
  } else if (env_id == "acrobot") {
    scale << 1.0, 1.0, 1.0, 1.0, 4.0 * std::numbers::pi, 9.0 * std::numbers::pi;
  }
  return scale;
}

double kl_divergence(const GaussianLatent& latent) {
  if (latent.mu.size() != latent.logvar.size())
    throw StructuralError("kl_divergence: mu/logvar length mismatch");
  return -0.5 * (1.0 + latent.logvar.array() - latent.mu.array().square() -
                 latent.logvar.array().exp())
                    .sum();
}

Vector sample_latent(const GaussianLatent& latent, const Vector& eps) {
  if (latent.mu.size() != eps.size())
    throw StructuralError("sample_latent: eps length mismatch");
  return latent.mu.array() + (latent.logvar.array() / 2.0).exp() * eps.array();
}

int argmax_lowest(const Vector& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = static_cast<int>(i);
  return best;
}

double td_target(double reward, bool done, double gamma, const Vector& q_next) {
  if (done) return reward;
  return reward + gamma * q_next[argmax_lowest(q_next)];
}

DvqnAgent::DvqnAgent(const AgentConfig& config, int obs_dim, int action_count, Vector obs_scale,
                     Rng& init_rng)
    : config_(config),
      obs_dim_(obs_dim),
      action_count_(action_count),
      obs_scale_(std::move(obs_scale)),
      feature_(make_dense(params_, "feature", obs_dim, config.intermediate_dim,
                          config.activation, init_rng)),
      intermediate_(make_dense(params_, "intermediate", config.intermediate_dim,
                               config.intermediate_dim, config.activation, init_rng)),
      mu_head_(make_dense(params_, "mu_head", config.intermediate_dim, config.latent_dim,
                          ActivationKind::identity(), init_rng)),
      logvar_head_(make_dense(params_, "logvar_head", config.intermediate_dim, config.latent_dim,
                              ActivationKind::identity(), init_rng)),
      dec_hidden_(make_dense(params_, "dec_hidden", config.latent_dim, config.intermediate_dim,
                             config.activation, init_rng)),
      dec_out_(make_dense(params_, "dec_out", config.intermediate_dim, obs_dim,
                          ActivationKind::identity(), init_rng)),
      q_hidden_(make_dense(params_, "q_hidden", config.latent_dim, config.intermediate_dim,
                           config.activation, init_rng)),
      q_out_(make_dense(params_, "q_out", config.intermediate_dim, action_count,
                        ActivationKind::identity(), init_rng)),
      optimizer_(config.optimizer == OptimizerKind::kRmsProp
                     ? Optimizer::rmsprop(config.learning_rate)
                     : Optimizer::adam(config.learning_rate)) {
  config_.validate();
  if (obs_scale_.size() != obs_dim) throw StructuralError("dvqn: obs_scale length mismatch");
}

GaussianLatent DvqnAgent::encode(const Vector& observation) const {
  if (observation.size() != obs_dim_) throw StructuralError("dvqn encode: obs length mismatch");
  const Vector scaled = observation.cwiseQuotient(obs_scale_);
  const Vector h = dense_forward(params_, feature_, scaled);
  const Vector h2 = dense_forward(params_, intermediate_, h);
  return {dense_forward(params_, mu_head_, h2), dense_forward(params_, logvar_head_, h2)};
}

Vector DvqnAgent::decode(const Vector& z) const {
  return dense_forward(params_, dec_out_, dense_forward(params_, dec_hidden_, z));
}

Vector DvqnAgent::q_values(const Vector& z) const {
  return dense_forward(params_, q_out_, dense_forward(params_, q_hidden_, z));
}

int DvqnAgent::act(const Vector& observation, ActionMode mode, Rng& rng) const {
  const GaussianLatent latent = encode(observation);
  Vector eps = Vector::Zero(config_.latent_dim);
  if (mode == ActionMode::kStochastic)
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps[i] = rng.normal();
  return argmax_lowest(q_values(sample_latent(latent, eps)));
}

Matrix DvqnAgent::encode_batch(const Matrix& scaled_obs) const {
  const Matrix h = dense_forward_batch(params_, feature_, scaled_obs);
  const Matrix h2 = dense_forward_batch(params_, intermediate_, h);
  return dense_forward_batch(params_, mu_head_, h2);
}

Vector DvqnAgent::compute_targets(const std::vector<Transition>& batch) const {
  Matrix next_scaled(batch.size(), obs_dim_);
  for (std::size_t i = 0; i < batch.size(); ++i)
    next_scaled.row(static_cast<Eigen::Index>(i)) =
        batch[i].next_state.cwiseQuotient(obs_scale_).transpose();
  const Matrix mu_next = encode_batch(next_scaled);
  const Matrix q_next =
      dense_forward_batch(params_, q_out_, dense_forward_batch(params_, q_hidden_, mu_next));
  Vector targets(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Vector q_row = q_next.row(static_cast<Eigen::Index>(i)).transpose();
    targets[static_cast<Eigen::Index>(i)] =
        td_target(batch[i].reward, batch[i].done, config_.gamma, q_row);
  }
  return targets;
}

DvqnAgent::Graph DvqnAgent::build_graph(Tape& tape, const Matrix& scaled_obs,
                                        const std::vector<int>& actions, const Matrix& eps,
                                        const Vector& targets) const {
  const int in = tape.input(scaled_obs);
  const int h = tape.dense(feature_, in);
  const int h2 = tape.dense(intermediate_, h);
  const int mu = tape.dense(mu_head_, h2);
  const int logvar = tape.dense(logvar_head_, h2);
  const int z = tape.reparam(mu, logvar, eps);
  const int dec = tape.dense(dec_out_, tape.dense(dec_hidden_, z));
  const int recon = tape.mse_loss(dec, scaled_obs);
  const int kl = tape.kl_loss(mu, logvar);
  const int q_all = tape.dense(q_out_, tape.dense(q_hidden_, z));
  const int q_picked = tape.pick(q_all, actions);
  const int q_loss = tape.td_mse_loss(q_picked, targets);
  const int total =
      tape.weighted_sum({{recon, config_.c1}, {kl, config_.c1}, {q_loss, config_.c2}});
  return {recon, kl, q_loss, total};
}

LossBreakdown DvqnAgent::train_step(const ReplayBuffer& buffer, Rng& rng) {
  const std::vector<Transition> batch =
      buffer.sample(static_cast<std::size_t>(config_.batch_size), rng);
  Matrix scaled_obs(batch.size(), obs_dim_);
  std::vector<int> actions(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    scaled_obs.row(static_cast<Eigen::Index>(i)) =
        batch[i].state.cwiseQuotient(obs_scale_).transpose();
    actions[i] = batch[i].action;
  }
  Matrix eps(batch.size(), config_.latent_dim);
  for (Eigen::Index i = 0; i < eps.rows(); ++i)
    for (Eigen::Index j = 0; j < eps.cols(); ++j) eps(i, j) = rng.normal();
  const Vector targets = compute_targets(batch);

  Tape tape(params_);
  const Graph graph = build_graph(tape, scaled_obs, actions, eps, targets);
  GradientStore grads = tape.backward(graph.total);
  optimizer_.step(params_, grads);

  LossBreakdown losses;
  losses.recon = tape.scalar(graph.recon_loss);
  losses.kl = tape.scalar(graph.kl_loss);
  losses.q = tape.scalar(graph.q_loss);
  losses.c1 = config_.c1;
  losses.c2 = config_.c2;
  losses.total = losses.c1 * (losses.recon + losses.kl) + losses.c2 * losses.q;
  last_losses_ = losses;
  return losses;
}

double DvqnAgent::loss_on_batch(const std::vector<Transition>& batch, const Matrix& eps,
                                const Vector& targets) const {
  Matrix scaled_obs(batch.size(), obs_dim_);
  std::vector<int> actions(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    scaled_obs.row(static_cast<Eigen::Index>(i)) =
        batch[i].state.cwiseQuotient(obs_scale_).transpose();
    actions[i] = batch[i].action;
  }
  Tape tape(params_);
  const Graph graph = build_graph(tape, scaled_obs, actions, eps, targets);
  return tape.scalar(graph.total);
}

}  // namespace dvqn
