#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dvqn/nn.hpp"
#include "dvqn/rng.hpp"

namespace dvqn {

struct StepResult {
  Vector observation;
  double reward = 0.0;
  bool done = false;
  int steps_elapsed = 0;
};

// Seedable deterministic episodic environment. After a step returns
// done=true, further steps are a usage error until reset.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual int obs_dim() const = 0;
  virtual int action_count() const = 0;
  virtual int max_steps() const = 0;
  virtual const char* id() const = 0;
  virtual Vector reset(Rng& rng) = 0;
  virtual StepResult step(int action) = 0;
  // Coarse label of the current state for option analysis; -1 if the
  // environment defines none.
  virtual int state_label() const { return -1; }
  // Gridworlds: BFS distance start->goal for the current layout; -1 otherwise.
  virtual int shortest_path_length() const { return -1; }
};

std::unique_ptr<Environment> make_env(std::string_view env_id);
bool is_known_env(std::string_view env_id);

// ---- CartPole ----

class CartPoleEnv final : public Environment {
 public:
  static constexpr double kGravity = 9.8;
  static constexpr double kMassCart = 1.0;
  static constexpr double kMassPole = 0.1;
  static constexpr double kPoleHalfLength = 0.5;
  static constexpr double kForceMag = 10.0;
  static constexpr double kTau = 0.02;
  static constexpr double kXThreshold = 2.4;
  static constexpr double kThetaThreshold = 12.0 * 3.14159265358979323846 / 180.0;
  static constexpr int kMaxSteps = 200;

  int obs_dim() const override { return 4; }
  int action_count() const override { return 2; }
  int max_steps() const override { return kMaxSteps; }
  const char* id() const override { return "cartpole"; }
  Vector reset(Rng& rng) override;
  StepResult step(int action) override;
  int state_label() const override;

  // Test hook: inject an exact state.
  void set_state(double x, double x_dot, double theta, double theta_dot);
  Vector observation() const;

 private:
  double x_ = 0, x_dot_ = 0, theta_ = 0, theta_dot_ = 0;
  int steps_ = 0;
  bool done_ = true;
};

// ---- Acrobot ----

class AcrobotEnv final : public Environment {
 public:
  static constexpr double kDt = 0.2;
  static constexpr int kMaxSteps = 500;

  int obs_dim() const override { return 6; }
  int action_count() const override { return 3; }
  int max_steps() const override { return kMaxSteps; }
  const char* id() const override { return "acrobot"; }
  Vector reset(Rng& rng) override;
  StepResult step(int action) override;

  void set_state(double theta1, double theta2, double omega1, double omega2);
  Vector observation() const;
  // One RK4 step of the two-link dynamics under the given torque; exposed so
  // tests can compare against an independent integrator.
  static void integrate(double& theta1, double& theta2, double& omega1, double& omega2,
                        double torque);

 private:
  double theta1_ = 0, theta2_ = 0, omega1_ = 0, omega2_ = 0;
  int steps_ = 0;
  bool done_ = true;
};

// ---- Gridworlds ----

struct GridWorld {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> walls;  // row-major, y * width + x
  std::vector<std::pair<int, int>> doors;
  std::pair<int, int> start{0, 0};
  std::pair<int, int> goal{0, 0};
  std::pair<int, int> agent{0, 0};
  std::vector<std::uint8_t> visited_doors;
  int steps = 0;

  bool wall_at(int x, int y) const { return walls[static_cast<std::size_t>(y) * width + x] != 0; }
};

// 4 channels {wall, agent, goal, door}, each height x width row-major.
Vector grid_observation(const GridWorld& grid);
// BFS from start to goal; -1 if unreachable.
int grid_shortest_path(const GridWorld& grid);

class GridEnvBase : public Environment {
 public:
  int obs_dim() const override { return 4 * grid_.width * grid_.height; }
  int action_count() const override { return 4; }  // 0:N 1:S 2:E 3:W
  StepResult step(int action) override;
  int shortest_path_length() const override { return shortest_; }
  const GridWorld& grid() const { return grid_; }

 protected:
  virtual double door_bonus(int door_index);
  GridWorld grid_;
  int shortest_ = -1;
  bool done_ = true;
  static constexpr double kStepPenalty = -0.01;
  static constexpr double kGoalReward = 1.0;
  static constexpr int kMaxEpisodeSteps = 400;
};

// 9x9, three random full wall lines each with one gap; layout redrawn every
// reset and guaranteed solvable.
class CrossingEnv final : public GridEnvBase {
 public:
  CrossingEnv();
  int max_steps() const override { return kMaxEpisodeSteps; }
  const char* id() const override { return "crossing"; }
  Vector reset(Rng& rng) override;
  int state_label() const override;
};

// Fixed classic 13x13 four-rooms layout with four doorway cells.
class FourRoomsEnv final : public GridEnvBase {
 public:
  FourRoomsEnv();
  int max_steps() const override { return kMaxEpisodeSteps; }
  const char* id() const override { return "fourrooms"; }
  Vector reset(Rng& rng) override;
  int state_label() const override;

 protected:
  double door_bonus(int door_index) override;

 private:
  static constexpr double kDoorReward = 0.1;
};

}  // namespace dvqn
