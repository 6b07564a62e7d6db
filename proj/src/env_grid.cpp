#include <algorithm>
#include <deque>

#include "dvqn/env.hpp"
#include "dvqn/errors.hpp"

namespace dvqn {

Vector grid_observation(const GridWorld& grid) {
  const int cells = grid.width * grid.height;
  Vector obs = Vector::Zero(4 * cells);
  for (int i = 0; i < cells; ++i) obs[i] = grid.walls[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  obs[cells + grid.agent.second * grid.width + grid.agent.first] = 1.0;
  obs[2 * cells + grid.goal.second * grid.width + grid.goal.first] = 1.0;
  for (const auto& [dx, dy] : grid.doors) obs[3 * cells + dy * grid.width + dx] = 1.0;
  return obs;
}

int grid_shortest_path(const GridWorld& grid) {
  std::vector<int> dist(static_cast<std::size_t>(grid.width) * grid.height, -1);
  std::deque<std::pair<int, int>> queue;
  auto at = [&](int x, int y) -> int& { return dist[static_cast<std::size_t>(y) * grid.width + x]; };
  at(grid.start.first, grid.start.second) = 0;
  queue.push_back(grid.start);
  while (!queue.empty()) {
    auto [x, y] = queue.front();
    queue.pop_front();
    if (x == grid.goal.first && y == grid.goal.second) return at(x, y);
    constexpr int kDx[4] = {0, 0, 1, -1};
    constexpr int kDy[4] = {-1, 1, 0, 0};
    for (int d = 0; d < 4; ++d) {
      const int nx = x + kDx[d], ny = y + kDy[d];
      if (nx < 0 || ny < 0 || nx >= grid.width || ny >= grid.height) continue;
      if (grid.wall_at(nx, ny) || at(nx, ny) >= 0) continue;
      at(nx, ny) = at(x, y) + 1;
      queue.push_back({nx, ny});
    }
  }
  return -1;
}

double GridEnvBase::door_bonus(int) { return 0.0; }

StepResult GridEnvBase::step(int action) {
  if (done_) throw UsageError(std::string(id()) + ": step after done");
  if (action < 0 || action > 3) throw UsageError(std::string(id()) + ": action out of range");

  constexpr int kDx[4] = {0, 0, 1, -1};  // N S E W
  constexpr int kDy[4] = {-1, 1, 0, 0};
  const int nx = grid_.agent.first + kDx[action];
  const int ny = grid_.agent.second + kDy[action];
  if (nx >= 0 && ny >= 0 && nx < grid_.width && ny < grid_.height && !grid_.wall_at(nx, ny))
    grid_.agent = {nx, ny};
  ++grid_.steps;

  StepResult result;
  if (grid_.agent == grid_.goal) {
    done_ = true;
    result.reward = kGoalReward;
  } else {
    result.reward = kStepPenalty;
    for (std::size_t d = 0; d < grid_.doors.size(); ++d) {
      if (grid_.doors[d] == grid_.agent && !grid_.visited_doors[d]) {
        grid_.visited_doors[d] = 1;
        result.reward += door_bonus(static_cast<int>(d));
      }
    }
    if (grid_.steps >= kMaxEpisodeSteps) done_ = true;
  }
  result.observation = grid_observation(grid_);
  result.done = done_;
  result.steps_elapsed = grid_.steps;
  return result;
}

// ---- Crossing ----

CrossingEnv::CrossingEnv() {
  grid_.width = 9;
  grid_.height = 9;
  grid_.start = {1, 1};
  grid_.goal = {7, 7};
  grid_.agent = grid_.start;
  grid_.walls.assign(81, 0);
}

Vector CrossingEnv::reset(Rng& rng) {
  auto& walls = grid_.walls;
  while (true) {
    walls.assign(81, 0);
    for (int x = 0; x < 9; ++x) {
      walls[static_cast<std::size_t>(x)] = 1;
      walls[static_cast<std::size_t>(8 * 9 + x)] = 1;
    }
    for (int y = 0; y < 9; ++y) {
      walls[static_cast<std::size_t>(y * 9)] = 1;
      walls[static_cast<std::size_t>(y * 9 + 8)] = 1;
    }
    for (int line = 0; line < 3; ++line) {
      const bool horizontal = rng.uniform_int(2) == 0;
      const int pos = 1 + rng.uniform_int(7);
      const int gap = 1 + rng.uniform_int(7);
      for (int i = 1; i <= 7; ++i) {
        if (i == gap) continue;
        if (horizontal)
          walls[static_cast<std::size_t>(pos * 9 + i)] = 1;
        else
          walls[static_cast<std::size_t>(i * 9 + pos)] = 1;
      }
    }
    if (grid_.wall_at(grid_.start.first, grid_.start.second)) continue;
    if (grid_.wall_at(grid_.goal.first, grid_.goal.second)) continue;
    const int path = grid_shortest_path(grid_);
    if (path > 0) {
      shortest_ = path;
      break;
    }
  }
  grid_.agent = grid_.start;
  grid_.steps = 0;
  done_ = false;
  return grid_observation(grid_);
}

int CrossingEnv::state_label() const {
  return (grid_.agent.first > 4 ? 1 : 0) + (grid_.agent.second > 4 ? 2 : 0);
}

// ---- FourRooms ----

FourRoomsEnv::FourRoomsEnv() {
  grid_.width = 13;
  grid_.height = 13;
  grid_.start = {1, 1};
  grid_.goal = {11, 11};
  grid_.agent = grid_.start;
  grid_.doors = {{6, 3}, {6, 9}, {3, 6}, {9, 6}};
  grid_.walls.assign(169, 0);
  auto set_wall = [&](int x, int y) { grid_.walls[static_cast<std::size_t>(y * 13 + x)] = 1; };
  for (int i = 0; i < 13; ++i) {
    set_wall(i, 0);
    set_wall(i, 12);
    set_wall(0, i);
    set_wall(12, i);
    set_wall(6, i);
    set_wall(i, 6);
  }
  for (const auto& [x, y] : grid_.doors) grid_.walls[static_cast<std::size_t>(y * 13 + x)] = 0;
  grid_.visited_doors.assign(grid_.doors.size(), 0);
}

Vector FourRoomsEnv::reset(Rng&) {
  grid_.agent = grid_.start;
  grid_.steps = 0;
  std::fill(grid_.visited_doors.begin(), grid_.visited_doors.end(), 0);
  shortest_ = grid_shortest_path(grid_);
  done_ = false;
  return grid_observation(grid_);
}

int FourRoomsEnv::state_label() const {
  return (grid_.agent.first > 6 ? 1 : 0) + (grid_.agent.second > 6 ? 2 : 0);
}

double FourRoomsEnv::door_bonus(int) { return kDoorReward; }

// ---- Factory ----

std::unique_ptr<Environment> make_env(std::string_view env_id) {
  if (env_id == "cartpole") return std::make_unique<CartPoleEnv>();
  if (env_id == "acrobot") return std::make_unique<AcrobotEnv>();
  if (env_id == "crossing") return std::make_unique<CrossingEnv>();
  if (env_id == "fourrooms") return std::make_unique<FourRoomsEnv>();
  throw ConfigError("unknown environment id: " + std::string(env_id));
}

bool is_known_env(std::string_view env_id) {
  return env_id == "cartpole" || env_id == "acrobot" || env_id == "crossing" ||
         env_id == "fourrooms";
}

}  // namespace dvqn
