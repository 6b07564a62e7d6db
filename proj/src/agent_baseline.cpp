#include <algorithm>

#include "dvqn/agent.hpp"
#include "dvqn/errors.hpp"

namespace dvqn {

namespace {

std::vector<DenseLayer> build_stack(ParamSet& params, const std::string& prefix, int obs_dim,
                                    int hidden, int action_count, ActivationKind activation,
                                    Rng& rng) {
  std::vector<DenseLayer> layers;
  layers.push_back(make_dense(params, prefix + "q1", obs_dim, hidden, activation, rng));
  layers.push_back(make_dense(params, prefix + "q2", hidden, hidden, activation, rng));
  layers.push_back(
      make_dense(params, prefix + "q3", hidden, action_count, ActivationKind::identity(), rng));
  return layers;
}

Vector forward_stack(const ParamSet& params, const std::vector<DenseLayer>& layers,
                     const Vector& x) {
  Vector h = x;
  for (const auto& layer : layers) h = dense_forward(params, layer, h);
  return h;
}

}  // namespace

BaselineAgent::BaselineAgent(const AgentConfig& config, int obs_dim, int action_count,
                             Vector obs_scale, Rng& init_rng)
    : config_(config),
      obs_dim_(obs_dim),
      action_count_(action_count),
      obs_scale_(std::move(obs_scale)),
      optimizer_(config.optimizer == OptimizerKind::kRmsProp
                     ? Optimizer::rmsprop(config.learning_rate)
                     : Optimizer::adam(config.learning_rate)) {
  config_.validate();
  if (config_.kind == AgentKind::kDvqn)
    throw StructuralError("baseline agent constructed with dvqn config");
  if (obs_scale_.size() != obs_dim) throw StructuralError("baseline: obs_scale length mismatch");
  layers_ = build_stack(params_, "", obs_dim, config.intermediate_dim, action_count,
                        config.activation, init_rng);
  // Target net mirrors the online net; DQN never reads it.
  Rng dummy(0);
  target_layers_ = build_stack(target_params_, "", obs_dim, config.intermediate_dim, action_count,
                               config.activation, dummy);
  sync_target();
}

void BaselineAgent::sync_target() {
  for (const auto& name : params_.names()) target_params_.at(name) = params_.at(name);
}

Vector BaselineAgent::q_values(const Vector& observation) const {
  if (observation.size() != obs_dim_) throw StructuralError("baseline: obs length mismatch");
  return forward_stack(params_, layers_, observation.cwiseQuotient(obs_scale_));
}

Vector BaselineAgent::target_q_values(const Vector& observation) const {
  return forward_stack(target_params_, target_layers_, observation.cwiseQuotient(obs_scale_));
}

int BaselineAgent::act(const Vector& observation, double epsilon, Rng& rng) const {
  if (epsilon > 0.0 && rng.uniform01() < epsilon) return rng.uniform_int(action_count_);
  return argmax_lowest(q_values(observation));
}

double BaselineAgent::epsilon_at(std::int64_t env_steps) const {
  return std::max(config_.epsilon_end,
                  config_.epsilon_start - config_.epsilon_decay * static_cast<double>(env_steps));
}

void BaselineAgent::on_env_frame() {
  ++frames_;
  if (config_.kind == AgentKind::kDdqn && frames_ % config_.target_sync_frames == 0)
    sync_target();
}

Vector BaselineAgent::compute_targets(const std::vector<Transition>& batch) const {
  Vector targets(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = batch[i];
    if (t.done) {
      targets[static_cast<Eigen::Index>(i)] = t.reward;
    } else if (config_.kind == AgentKind::kDdqn) {
      // Select with the online network, evaluate with the target network.
      const int chosen = argmax_lowest(q_values(t.next_state));
      targets[static_cast<Eigen::Index>(i)] =
          t.reward + config_.gamma * target_q_values(t.next_state)[chosen];
    } else {
      targets[static_cast<Eigen::Index>(i)] =
          td_target(t.reward, t.done, config_.gamma, q_values(t.next_state));
    }
  }
  return targets;
}

double BaselineAgent::loss_on_batch(const std::vector<Transition>& batch,
                                    const Vector& targets) const {
  Matrix scaled_obs(batch.size(), obs_dim_);
  std::vector<int> actions(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    scaled_obs.row(static_cast<Eigen::Index>(i)) =
        batch[i].state.cwiseQuotient(obs_scale_).transpose();
    actions[i] = batch[i].action;
  }
  Tape tape(params_);
  int node = tape.input(scaled_obs);
  for (const auto& layer : layers_) node = tape.dense(layer, node);
  const int picked = tape.pick(node, actions);
  return tape.scalar(tape.td_huber_loss(picked, targets));
}

double BaselineAgent::train_step(const ReplayBuffer& buffer, Rng& rng) {
  const std::vector<Transition> batch =
      buffer.sample(static_cast<std::size_t>(config_.batch_size), rng);
  const Vector targets = compute_targets(batch);

  Matrix scaled_obs(batch.size(), obs_dim_);
  std::vector<int> actions(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    scaled_obs.row(static_cast<Eigen::Index>(i)) =
        batch[i].state.cwiseQuotient(obs_scale_).transpose();
    actions[i] = batch[i].action;
  }
  Tape tape(params_);
  int node = tape.input(scaled_obs);
  for (const auto& layer : layers_) node = tape.dense(layer, node);
  const int picked = tape.pick(node, actions);
  const int loss = tape.td_huber_loss(picked, targets);
  GradientStore grads = tape.backward(loss);
  optimizer_.step(params_, grads);
  last_loss_ = tape.scalar(loss);
  return last_loss_;
}

}  // namespace dvqn
