#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dvqn/agent.hpp"
#include "dvqn/checkpoint.hpp"
#include "dvqn/cli.hpp"
#include "dvqn/env.hpp"
#include "dvqn/errors.hpp"
#include "dvqn/experiment.hpp"
#include "dvqn/options.hpp"
#include "dvqn/plots.hpp"
#include "dvqn/replay.hpp"

namespace py = pybind11;
using namespace dvqn;

PYBIND11_MODULE(_dvqn, m) {
  m.doc() = "Deep Variational Q-Network core: environments, agents, option discovery";

  py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InsufficientSamplesError>(m, "InsufficientSamplesError",
                                                   PyExc_RuntimeError);

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next_u64", &Rng::next_u64)
      .def("uniform01", &Rng::uniform01)
      .def("uniform", &Rng::uniform, py::arg("lo"), py::arg("hi"))
      .def("uniform_int", &Rng::uniform_int, py::arg("n"))
      .def("normal", &Rng::normal)
      .def("split", &Rng::split, py::arg("stream"));

  // ---- nnkit surface ----
  m.def("mse", &mse, py::arg("a"), py::arg("b"));
  m.def("huber", &huber, py::arg("x"), py::arg("delta") = 1.0);
  m.def(
      "activation_apply",
      [](const std::string& kind, double x, double alpha) {
        if (kind == "identity") return activation_apply(ActivationKind::identity(), x);
        if (kind == "relu") return activation_apply(ActivationKind::relu(), x);
        if (kind == "elu") return activation_apply(ActivationKind::elu(alpha), x);
        throw ConfigError("unknown activation: " + kind);
      },
      py::arg("kind"), py::arg("x"), py::arg("alpha") = 1.0);

  // ---- environments ----
  py::class_<StepResult>(m, "StepResult")
      .def_readonly("observation", &StepResult::observation)
      .def_readonly("reward", &StepResult::reward)
      .def_readonly("done", &StepResult::done)
      .def_readonly("steps_elapsed", &StepResult::steps_elapsed);

  py::class_<Environment>(m, "Environment")
      .def_property_readonly("obs_dim", &Environment::obs_dim)
      .def_property_readonly("action_count", &Environment::action_count)
      .def_property_readonly("max_steps", &Environment::max_steps)
      .def_property_readonly("id", &Environment::id)
      .def("reset", &Environment::reset, py::arg("rng"))
      .def("step", &Environment::step, py::arg("action"))
      .def("state_label", &Environment::state_label)
      .def("shortest_path_length", &Environment::shortest_path_length);
  m.def("make_env", &make_env, py::arg("env_id"));

  // ---- replay ----
  py::class_<Transition>(m, "Transition")
      .def(py::init([](Vector state, int action, double reward, Vector next_state, bool done) {
             return Transition{std::move(state), action, reward, std::move(next_state), done};
           }),
           py::arg("state"), py::arg("action"), py::arg("reward"), py::arg("next_state"),
           py::arg("done"))
      .def_readwrite("state", &Transition::state)
      .def_readwrite("action", &Transition::action)
      .def_readwrite("reward", &Transition::reward)
      .def_readwrite("next_state", &Transition::next_state)
      .def_readwrite("done", &Transition::done);

  py::class_<ReplayBuffer>(m, "ReplayBuffer")
      .def(py::init<std::size_t>(), py::arg("capacity"))
      .def("push", &ReplayBuffer::push, py::arg("transition"))
      .def("sample", &ReplayBuffer::sample, py::arg("batch_size"), py::arg("rng"))
      .def("__len__", &ReplayBuffer::size)
      .def("__getitem__", &ReplayBuffer::operator[], py::arg("index"))
      .def_property_readonly("capacity", &ReplayBuffer::capacity);

  // ---- agents ----
  py::enum_<AgentKind>(m, "AgentKind")
      .value("DVQN", AgentKind::kDvqn)
      .value("DQN", AgentKind::kDqn)
      .value("DDQN", AgentKind::kDdqn);

  py::enum_<ActionMode>(m, "ActionMode")
      .value("STOCHASTIC", ActionMode::kStochastic)
      .value("DETERMINISTIC", ActionMode::kDeterministic);

  py::class_<AgentConfig>(m, "AgentConfig")
      .def_static(
          "defaults",
          [](const std::string& kind) { return AgentConfig::defaults(agent_kind_from_name(kind)); },
          py::arg("kind"))
      .def_readwrite("gamma", &AgentConfig::gamma)
      .def_readwrite("learning_rate", &AgentConfig::learning_rate)
      .def_readwrite("batch_size", &AgentConfig::batch_size)
      .def_readwrite("c1", &AgentConfig::c1)
      .def_readwrite("c2", &AgentConfig::c2)
      .def_readwrite("epsilon_start", &AgentConfig::epsilon_start)
      .def_readwrite("epsilon_end", &AgentConfig::epsilon_end)
      .def_readwrite("epsilon_decay", &AgentConfig::epsilon_decay)
      .def_readwrite("target_sync_frames", &AgentConfig::target_sync_frames)
      .def_readwrite("latent_dim", &AgentConfig::latent_dim)
      .def_readwrite("intermediate_dim", &AgentConfig::intermediate_dim)
      .def_readwrite("updates_per_episode", &AgentConfig::updates_per_episode)
      .def_readwrite("replay_capacity", &AgentConfig::replay_capacity)
      .def_property_readonly("kind",
                             [](const AgentConfig& c) { return agent_kind_name(c.kind); });

  py::class_<GaussianLatent>(m, "GaussianLatent")
      .def(py::init([](Vector mu, Vector logvar) {
             return GaussianLatent{std::move(mu), std::move(logvar)};
           }),
           py::arg("mu"), py::arg("logvar"))
      .def_readonly("mu", &GaussianLatent::mu)
      .def_readonly("logvar", &GaussianLatent::logvar);

  py::class_<LossBreakdown>(m, "LossBreakdown")
      .def_readonly("recon", &LossBreakdown::recon)
      .def_readonly("kl", &LossBreakdown::kl)
      .def_readonly("q", &LossBreakdown::q)
      .def_readonly("total", &LossBreakdown::total)
      .def_readonly("c1", &LossBreakdown::c1)
      .def_readonly("c2", &LossBreakdown::c2);

  m.def("kl_divergence", &kl_divergence, py::arg("latent"));
  m.def("sample_latent", &sample_latent, py::arg("latent"), py::arg("eps"));
  m.def("td_target", &td_target, py::arg("reward"), py::arg("done"), py::arg("gamma"),
        py::arg("q_next"));
  m.def("observation_scale", &observation_scale, py::arg("env_id"), py::arg("obs_dim"));

  py::class_<DvqnAgent>(m, "DvqnAgent")
      .def(py::init<const AgentConfig&, int, int, Vector, Rng&>(), py::arg("config"),
           py::arg("obs_dim"), py::arg("action_count"), py::arg("obs_scale"), py::arg("init_rng"))
      .def("encode", &DvqnAgent::encode, py::arg("observation"))
      .def("decode", &DvqnAgent::decode, py::arg("z"))
      .def("q_values", &DvqnAgent::q_values, py::arg("z"))
      .def("act", &DvqnAgent::act, py::arg("observation"), py::arg("mode"), py::arg("rng"))
      .def("train_step", &DvqnAgent::train_step, py::arg("buffer"), py::arg("rng"))
      .def_property_readonly("config", &DvqnAgent::config);

  py::class_<BaselineAgent>(m, "BaselineAgent")
      .def(py::init<const AgentConfig&, int, int, Vector, Rng&>(), py::arg("config"),
           py::arg("obs_dim"), py::arg("action_count"), py::arg("obs_scale"), py::arg("init_rng"))
      .def("q_values", &BaselineAgent::q_values, py::arg("observation"))
      .def("act", &BaselineAgent::act, py::arg("observation"), py::arg("epsilon"), py::arg("rng"))
      .def("epsilon_at", &BaselineAgent::epsilon_at, py::arg("env_steps"))
      .def("on_env_frame", &BaselineAgent::on_env_frame)
      .def("train_step", &BaselineAgent::train_step, py::arg("buffer"), py::arg("rng"))
      .def_property_readonly("config", &BaselineAgent::config);

  m.def(
      "save_agent_checkpoint",
      [](const std::string& path, const DvqnAgent& agent, const std::string& env_id,
         const std::string& digest) { save_agent_checkpoint(path, agent, env_id, digest); },
      py::arg("path"), py::arg("agent"), py::arg("env_id"), py::arg("config_digest") = "");
  m.def(
      "save_baseline_checkpoint",
      [](const std::string& path, const BaselineAgent& agent, const std::string& env_id,
         const std::string& digest) { save_agent_checkpoint(path, agent, env_id, digest); },
      py::arg("path"), py::arg("agent"), py::arg("env_id"), py::arg("config_digest") = "");

  py::class_<LoadedAgent>(m, "LoadedAgent")
      .def_property_readonly("kind", [](const LoadedAgent& a) { return agent_kind_name(a.kind); })
      .def_readonly("env_id", &LoadedAgent::env_id)
      .def_readonly("config_digest", &LoadedAgent::config_digest)
      .def_readonly("config", &LoadedAgent::config)
      .def("greedy_act", &LoadedAgent::greedy_act, py::arg("observation"))
      .def("encode", [](const LoadedAgent& a, const Vector& obs) {
        if (a.kind != AgentKind::kDvqn) throw UsageError("checkpoint is not a dvqn agent");
        return a.dvqn->encode(obs);
      });
  m.def("load_agent_checkpoint", &load_agent_checkpoint, py::arg("path"));

  // ---- options ----
  py::class_<EmbeddingRecord>(m, "EmbeddingRecord")
      .def(py::init([](Vector mu, Vector q, double reward, bool done, int episode, int step,
                       int label) {
             return EmbeddingRecord{std::move(mu), std::move(q), reward, done, episode, step, label};
           }),
           py::arg("mu"), py::arg("q"), py::arg("reward") = 0.0, py::arg("done") = false,
           py::arg("episode") = 0, py::arg("step") = 0, py::arg("label") = -1)
      .def_readonly("mu", &EmbeddingRecord::mu)
      .def_readonly("q", &EmbeddingRecord::q)
      .def_readonly("reward", &EmbeddingRecord::reward)
      .def_readonly("done", &EmbeddingRecord::done)
      .def_readonly("episode", &EmbeddingRecord::episode)
      .def_readonly("step", &EmbeddingRecord::step)
      .def_readonly("env_label", &EmbeddingRecord::env_label);

  py::class_<LatentDataset>(m, "LatentDataset")
      .def(py::init([](std::vector<EmbeddingRecord> records, int latent_dim) {
             LatentDataset d;
             d.records = std::move(records);
             d.latent_dim = latent_dim;
             return d;
           }),
           py::arg("records"), py::arg("latent_dim"))
      .def_readonly("records", &LatentDataset::records)
      .def_readonly("latent_dim", &LatentDataset::latent_dim)
      .def_readonly("env_id", &LatentDataset::env_id)
      .def_readonly("checkpoint_digest", &LatentDataset::checkpoint_digest)
      .def("__len__", [](const LatentDataset& d) { return d.records.size(); });

  py::class_<ClusterModel>(m, "ClusterModel")
      .def_readonly("k", &ClusterModel::k)
      .def_readonly("centroids", &ClusterModel::centroids)
      .def_readonly("assignment", &ClusterModel::assignment)
      .def_readonly("inertia", &ClusterModel::inertia);

  py::class_<PcaResult>(m, "PcaResult")
      .def_readonly("points", &PcaResult::points)
      .def_readonly("explained_ratio", &PcaResult::explained_ratio);

  py::class_<OptionSpec>(m, "OptionSpec")
      .def_readonly("id", &OptionSpec::id)
      .def_readonly("centroid", &OptionSpec::centroid)
      .def_readonly("member_count", &OptionSpec::member_count)
      .def_readonly("label_histogram", &OptionSpec::label_histogram);

  m.def("collect_embeddings", &collect_embeddings, py::arg("agent"), py::arg("env"),
        py::arg("episodes"), py::arg("rng"));
  m.def("kmeans", &kmeans, py::arg("dataset"), py::arg("k"), py::arg("rng"),
        py::arg("restarts") = 20, py::arg("max_iter") = 300, py::arg("tol") = 1e-8);
  m.def("silhouette", &silhouette, py::arg("dataset"), py::arg("model"));
  m.def("choose_k", &choose_k, py::arg("dataset"), py::arg("rng"), py::arg("k_min") = 2,
        py::arg("k_max") = 6);
  m.def("pca_project", &pca_project, py::arg("dataset"), py::arg("target_dim") = 2);
  m.def("derive_options", &derive_options, py::arg("model"), py::arg("dataset"));
  m.def("assign_option", &assign_option, py::arg("specs"), py::arg("mu"));
  m.def("label_purity", &label_purity, py::arg("dataset"), py::arg("model"));
  m.def("save_dataset", &save_dataset, py::arg("path"), py::arg("dataset"));
  m.def("load_dataset", &load_dataset, py::arg("path"));

  // ---- harness ----
  py::class_<TrialSummary>(m, "TrialSummary")
      .def_readonly("trial", &TrialSummary::trial)
      .def_readonly("final_window_mean", &TrialSummary::final_window_mean)
      .def_readonly("window", &TrialSummary::window)
      .def_readonly("episodes_completed", &TrialSummary::episodes_completed)
      .def_readonly("aborted", &TrialSummary::aborted);

  py::class_<RunSummary>(m, "RunSummary")
      .def_readonly("trials", &RunSummary::trials)
      .def_readonly("mean_final_return", &RunSummary::mean_final_return)
      .def_readonly("std_final_return", &RunSummary::std_final_return)
      .def_readonly("wall_clock_seconds", &RunSummary::wall_clock_seconds)
      .def_readonly("config_digest", &RunSummary::config_digest);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("summary", &TrainResult::summary)
      .def_readonly("metrics_path", &TrainResult::metrics_path)
      .def_readonly("checkpoint_paths", &TrainResult::checkpoint_paths);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_readonly("env_id", &ExperimentConfig::env_id)
      .def_readonly("episodes", &ExperimentConfig::episodes)
      .def_readonly("trials", &ExperimentConfig::trials)
      .def_readonly("base_seed", &ExperimentConfig::base_seed)
      .def_readonly("out_dir", &ExperimentConfig::out_dir)
      .def_readonly("agent", &ExperimentConfig::agent);

  m.def("experiment_config_from_json", &experiment_config_from_json, py::arg("text"));
  m.def("load_experiment_config", &load_experiment_config, py::arg("path"));
  m.def(
      "run_training",
      [](const ExperimentConfig& config, int jobs) {
        py::gil_scoped_release release;
        return run_training(config, jobs);
      },
      py::arg("config"), py::arg("jobs") = 1);

  py::class_<EvalResult>(m, "EvalResult")
      .def_readonly("mean_return", &EvalResult::mean_return)
      .def_readonly("std_return", &EvalResult::std_return)
      .def_readonly("returns", &EvalResult::returns)
      .def_readonly("steps", &EvalResult::steps);
  m.def("evaluate", &evaluate, py::arg("agent"), py::arg("env"), py::arg("episodes"),
        py::arg("rng"));

  m.def("emit_learning_curve", &emit_learning_curve, py::arg("metrics_paths"),
        py::arg("out_path"));
  m.def(
      "emit_latent_scatter",
      [](const LatentDataset& dataset, const ClusterModel* model, const std::string& out) {
        emit_latent_scatter(dataset, model, out);
      },
      py::arg("dataset"), py::arg("model"), py::arg("out_path"));

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("dvqn");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
  });

  m.attr("__version__") = "0.1.0";
}
