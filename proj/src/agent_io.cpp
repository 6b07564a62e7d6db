#include <cinttypes>
#include <cstdio>
#include <sstream>

#include "dvqn/agent.hpp"
#include "dvqn/checkpoint.hpp"
#include "dvqn/errors.hpp"

namespace dvqn {

namespace {

constexpr std::size_t kConfigRecordLen = 17;

std::vector<double> config_to_values(const AgentConfig& c) {
  return {static_cast<double>(static_cast<int>(c.kind)),
          c.gamma,
          c.learning_rate,
          static_cast<double>(c.batch_size),
          static_cast<double>(static_cast<int>(c.optimizer)),
          static_cast<double>(static_cast<int>(c.activation.kind)),
          c.activation.alpha,
          c.c1,
          c.c2,
          c.epsilon_start,
          c.epsilon_end,
          c.epsilon_decay,
          static_cast<double>(c.target_sync_frames),
          static_cast<double>(c.latent_dim),
          static_cast<double>(c.intermediate_dim),
          static_cast<double>(c.updates_per_episode),
          static_cast<double>(c.replay_capacity)};
}

AgentConfig config_from_values(const std::vector<double>& v) {
  if (v.size() != kConfigRecordLen) throw ConfigError("checkpoint: bad __config__ record length");
  AgentConfig c;
  c.kind = static_cast<AgentKind>(static_cast<int>(v[0]));
  c.gamma = v[1];
  c.learning_rate = v[2];
  c.batch_size = static_cast<int>(v[3]);
  c.optimizer = static_cast<OptimizerKind>(static_cast<int>(v[4]));
  c.activation.kind = static_cast<Activation>(static_cast<int>(v[5]));
  c.activation.alpha = v[6];
  c.c1 = v[7];
  c.c2 = v[8];
  c.epsilon_start = v[9];
  c.epsilon_end = v[10];
  c.epsilon_decay = v[11];
  c.target_sync_frames = static_cast<int>(v[12]);
  c.latent_dim = static_cast<int>(v[13]);
  c.intermediate_dim = static_cast<int>(v[14]);
  c.updates_per_episode = static_cast<int>(v[15]);
  c.replay_capacity = static_cast<std::size_t>(v[16]);
  return c;
}

void save_with_meta(const std::string& path, const ParamSet& params, const AgentConfig& config,
                    const std::string& env_id, const std::string& config_digest) {
  std::vector<CheckpointRecord> records = params_to_records(params);
  records.push_back({"__config__", {static_cast<std::uint32_t>(kConfigRecordLen)},
                     config_to_values(config)});
  records.push_back({"__meta__ kind=" + std::string(agent_kind_name(config.kind)) +
                         " env=" + env_id + " digest=" + config_digest,
                     {0},
                     {}});
  save_checkpoint(path, records);
}

std::string meta_field(const std::string& meta, const std::string& key) {
  std::istringstream stream(meta);
  std::string token;
  while (stream >> token)
    if (token.rfind(key + "=", 0) == 0) return token.substr(key.size() + 1);
  throw ConfigError("checkpoint: metadata missing field " + key);
}

}  // namespace

void save_agent_checkpoint(const std::string& path, const DvqnAgent& agent,
                           const std::string& env_id, const std::string& config_digest) {
  save_with_meta(path, agent.params(), agent.config(), env_id, config_digest);
}

void save_agent_checkpoint(const std::string& path, const BaselineAgent& agent,
                           const std::string& env_id, const std::string& config_digest) {
  save_with_meta(path, agent.params(), agent.config(), env_id, config_digest);
}

LoadedAgent load_agent_checkpoint(const std::string& path) {
  const std::vector<CheckpointRecord> records = load_checkpoint(path);
  LoadedAgent loaded;
  loaded.file_digest = file_digest(path);
  const CheckpointRecord* config_rec = nullptr;
  const CheckpointRecord* meta_rec = nullptr;
  for (const auto& rec : records) {
    if (rec.name == "__config__") config_rec = &rec;
    if (rec.name.rfind("__meta__", 0) == 0) meta_rec = &rec;
  }
  if (!config_rec || !meta_rec) throw ConfigError("checkpoint: missing metadata records");
  loaded.config = config_from_values(config_rec->values);
  loaded.kind = loaded.config.kind;
  loaded.env_id = meta_field(meta_rec->name, "env");
  loaded.config_digest = meta_field(meta_rec->name, "digest");
  if (meta_field(meta_rec->name, "kind") != agent_kind_name(loaded.kind))
    throw ConfigError("checkpoint: metadata kind disagrees with config record");

  // Dimensions come from the stored parameter shapes.
  int obs_dim = 0, action_count = 0;
  for (const auto& rec : records) {
    if (rec.name == "feature.W" || rec.name == "q1.W") obs_dim = static_cast<int>(rec.shape[1]);
    if (rec.name == "q_out.W" || rec.name == "q3.W") action_count = static_cast<int>(rec.shape[0]);
  }
  if (obs_dim == 0 || action_count == 0)
    throw ConfigError("checkpoint: cannot infer model dimensions");

  Rng init(0);
  const Vector scale = observation_scale(loaded.env_id, obs_dim);
  if (loaded.kind == AgentKind::kDvqn) {
    loaded.dvqn =
        std::make_unique<DvqnAgent>(loaded.config, obs_dim, action_count, scale, init);
    records_to_params(records, loaded.dvqn->params());
  } else {
    loaded.baseline =
        std::make_unique<BaselineAgent>(loaded.config, obs_dim, action_count, scale, init);
    records_to_params(records, loaded.baseline->params());
    loaded.baseline->sync_target();
  }
  return loaded;
}

int LoadedAgent::greedy_act(const Vector& observation) const {
  if (kind == AgentKind::kDvqn) {
    Rng unused(0);
    return dvqn->act(observation, ActionMode::kDeterministic, unused);
  }
  return argmax_lowest(baseline->q_values(observation));
}

}  // namespace dvqn
