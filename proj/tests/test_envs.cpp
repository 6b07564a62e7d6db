#include <doctest.h>

#include <cmath>
#include <set>

#include "dvqn/env.hpp"
#include "dvqn/errors.hpp"
#include "dvqn/rng.hpp"
#include "oracles.hpp"

using namespace dvqn;

TEST_CASE("cartpole reset: seeded, bounded, 4-dim") {
  CartPoleEnv env;
  Rng a(77), b(77);
  const Vector obs1 = env.reset(a);
  CartPoleEnv env2;
  const Vector obs2 = env2.reset(b);
  CHECK(obs1 == obs2);
  CHECK(obs1.size() == 4);
  CHECK(obs1.cwiseAbs().maxCoeff() <= 0.05);
  CHECK(env.obs_dim() == 4);
  CHECK(env.action_count() == 2);
}

TEST_CASE("cartpole single step from rest matches the spec derivation") {
  CartPoleEnv env;
  env.set_state(0, 0, 0, 0);
  const StepResult r = env.step(1);
  CHECK(r.observation[0] == doctest::Approx(0.0));
  CHECK(r.observation[1] == doctest::Approx(0.1951).epsilon(1e-3));
  CHECK(r.observation[2] == doctest::Approx(0.0));
  CHECK(r.observation[3] == doctest::Approx(-0.2927).epsilon(1e-3));
  CHECK(r.reward == 1.0);
  CHECK_FALSE(r.done);
}

TEST_CASE("cartpole matches the oracle integrator on random states") {
  Rng rng(123);
  for (int i = 0; i < 200; ++i) {
    oracles::CartPoleState s{rng.uniform(-2.0, 2.0), rng.uniform(-3.0, 3.0),
                             rng.uniform(-0.2, 0.2), rng.uniform(-3.0, 3.0)};
    const int action = rng.uniform_int(2);
    CartPoleEnv env;
    env.set_state(s.x, s.x_dot, s.theta, s.theta_dot);
    const StepResult r = env.step(action);
    const oracles::CartPoleState expect = oracles::cartpole_euler(s, action);
    CHECK(std::abs(r.observation[0] - expect.x) < 1e-10);
    CHECK(std::abs(r.observation[1] - expect.x_dot) < 1e-10);
    CHECK(std::abs(r.observation[2] - expect.theta) < 1e-10);
    CHECK(std::abs(r.observation[3] - expect.theta_dot) < 1e-10);
  }
}

TEST_CASE("cartpole failure terminates with reward -1") {
  CartPoleEnv env;
  env.set_state(0, 0, 0.205, 2.0);  // about to cross the 12 degree threshold
  const StepResult r = env.step(1);
  CHECK(r.done);
  CHECK(r.reward == -1.0);
  CHECK(std::abs(r.observation[2]) > 12.0 * M_PI / 180.0);
  CHECK_THROWS_AS(env.step(0), UsageError);
}

TEST_CASE("cartpole bang-bang controller reaches the 200-step cap") {
  CartPoleEnv env;
  Rng rng(5);
  env.reset(rng);
  Vector obs = env.observation();
  int steps = 0;
  bool done = false;
  double last_reward = 0;
  while (!done) {
    const int action = (obs[2] + obs[3] > 0) ? 1 : 0;
    const StepResult r = env.step(action);
    obs = r.observation;
    done = r.done;
    steps = r.steps_elapsed;
    last_reward = r.reward;
  }
  CHECK(steps == 200);
  CHECK(last_reward == 1.0);
}

TEST_CASE("cartpole state labels bucket the pole angle") {
  CartPoleEnv env;
  env.set_state(0, 0, 0.0, 0);
  CHECK(env.state_label() == 1);
  env.set_state(0, 0, -0.1, 0);
  CHECK(env.state_label() == 0);
  env.set_state(0, 0, 0.1, 0);
  CHECK(env.state_label() == 2);
  env.set_state(0, 0, 0.03, 0);  // under 2 degrees ~ 0.0349
  CHECK(env.state_label() == 1);
}

TEST_CASE("acrobot reset ranges and hanging state") {
  AcrobotEnv env;
  Rng rng(9);
  const Vector obs = env.reset(rng);
  CHECK(obs.size() == 6);
  CHECK(obs[0] >= std::cos(0.1));
  CHECK(std::abs(obs[1]) <= std::sin(0.1) + 1e-12);
  CHECK(obs[2] >= std::cos(0.1));
  CHECK(std::abs(obs[3]) <= std::sin(0.1) + 1e-12);

  AcrobotEnv rest;
  rest.set_state(0, 0, 0, 0);
  const StepResult r = rest.step(1);  // zero torque
  CHECK_FALSE(r.done);
  CHECK(r.reward == -1.0);
}

TEST_CASE("acrobot matches an independent RK4 oracle") {
  Rng rng(321);
  for (int i = 0; i < 200; ++i) {
    const oracles::AcrobotState s{rng.uniform(-M_PI, M_PI), rng.uniform(-M_PI, M_PI),
                                  rng.uniform(-4 * M_PI, 4 * M_PI),
                                  rng.uniform(-9 * M_PI, 9 * M_PI)};
    const int action = rng.uniform_int(3);
    double t1 = s[0], t2 = s[1], w1 = s[2], w2 = s[3];
    AcrobotEnv::integrate(t1, t2, w1, w2, action - 1);
    const oracles::AcrobotState expect = oracles::acrobot_rk4(s, action - 1);
    CHECK(std::abs(t1 - expect[0]) < 1e-10);
    CHECK(std::abs(t2 - expect[1]) < 1e-10);
    CHECK(std::abs(w1 - expect[2]) < 1e-10);
    CHECK(std::abs(w2 - expect[3]) < 1e-10);
  }
}

TEST_CASE("acrobot hits the step cap under zero torque") {
  AcrobotEnv env;
  Rng rng(4);
  env.reset(rng);
  int steps = 0;
  bool done = false;
  while (!done) {
    const StepResult r = env.step(1);
    steps = r.steps_elapsed;
    done = r.done;
    CHECK(r.observation.cwiseAbs().maxCoeff() <= 9 * M_PI + 1e-9);
  }
  CHECK(steps == 500);
  CHECK_THROWS_AS(env.step(1), UsageError);
}

TEST_CASE("crossing: layouts are always solvable and observed correctly") {
  CrossingEnv env;
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector obs = env.reset(rng);
    CHECK(obs.size() == 324);
    CHECK(env.shortest_path_length() >= 12);  // manhattan distance start->goal
    // wall channel equals the wall grid; exactly one agent cell
    int agent_cells = 0;
    for (int i = 0; i < 81; ++i) {
      CHECK(obs[i] == (env.grid().walls[static_cast<std::size_t>(i)] ? 1.0 : 0.0));
      agent_cells += obs[81 + i] == 1.0 ? 1 : 0;
    }
    CHECK(agent_cells == 1);
    // fresh layout each reset: drive one full episode with random actions
    bool done = false;
    while (!done) done = env.step(rng.uniform_int(4)).done;
  }
}

TEST_CASE("crossing: wall bump keeps position, goal pays +1") {
  CrossingEnv env;
  Rng rng(31);
  env.reset(rng);
  const StepResult bump = env.step(0);  // N from (1,1) into the outer wall
  CHECK(env.grid().agent == std::pair<int, int>{1, 1});
  CHECK(bump.reward == doctest::Approx(-0.01));

  // follow a BFS path to the goal
  const GridWorld& g = env.grid();
  std::vector<int> prev(81, -1);
  std::vector<int> dist(81, -1);
  std::vector<int> queue{g.agent.second * 9 + g.agent.first};
  dist[static_cast<std::size_t>(queue[0])] = 0;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const int cur = queue[qi];
    const int x = cur % 9, y = cur / 9;
    const int dx[4] = {0, 0, 1, -1}, dy[4] = {-1, 1, 0, 0};
    for (int d = 0; d < 4; ++d) {
      const int nx = x + dx[d], ny = y + dy[d];
      const int nxt = ny * 9 + nx;
      if (g.wall_at(nx, ny) || dist[static_cast<std::size_t>(nxt)] >= 0) continue;
      dist[static_cast<std::size_t>(nxt)] = dist[static_cast<std::size_t>(cur)] + 1;
      prev[static_cast<std::size_t>(nxt)] = d;
      queue.push_back(nxt);
    }
  }
  std::vector<int> actions;
  int cur = g.goal.second * 9 + g.goal.first;
  while (cur != g.agent.second * 9 + g.agent.first) {
    const int d = prev[static_cast<std::size_t>(cur)];
    actions.push_back(d);
    const int dx[4] = {0, 0, 1, -1}, dy[4] = {-1, 1, 0, 0};
    cur -= dy[d] * 9 + dx[d];
  }
  double last_reward = 0;
  bool done = false;
  for (auto it = actions.rbegin(); it != actions.rend(); ++it) {
    REQUIRE_FALSE(done);
    const StepResult r = env.step(*it);
    last_reward = r.reward;
    done = r.done;
  }
  CHECK(done);
  CHECK(last_reward == 1.0);
}

TEST_CASE("fourrooms: fixed layout, doors pay once") {
  FourRoomsEnv env;
  Rng rng(8);
  env.reset(rng);
  CHECK(env.obs_dim() == 676);
  CHECK(env.grid().doors.size() == 4);
  CHECK(env.shortest_path_length() > 0);

  // (1,1) -> S x4 -> (1,5), E x2 -> (3,5), S -> door (3,6)
  for (int i = 0; i < 4; ++i) env.step(1);
  env.step(2);
  env.step(2);
  const StepResult first = env.step(1);
  CHECK(env.grid().agent == std::pair<int, int>{3, 6});
  CHECK(first.reward == doctest::Approx(0.09));
  const StepResult away = env.step(0);
  CHECK(away.reward == doctest::Approx(-0.01));
  const StepResult again = env.step(1);
  CHECK(env.grid().agent == std::pair<int, int>{3, 6});
  CHECK(again.reward == doctest::Approx(-0.01));
}

TEST_CASE("fourrooms room label starts in room 0") {
  FourRoomsEnv env;
  Rng rng(8);
  env.reset(rng);
  CHECK(env.state_label() == 0);
}

TEST_CASE("gridworld fuzz: never on a wall, steps capped, done sticky") {
  Rng rng(99);
  for (const char* id : {"crossing", "fourrooms"}) {
    auto env = make_env(id);
    for (int episode = 0; episode < 6; ++episode) {
      env->reset(rng);
      bool done = false;
      int steps = 0;
      while (!done) {
        const StepResult r = env->step(rng.uniform_int(4));
        done = r.done;
        steps = r.steps_elapsed;
        const auto* grid_env = dynamic_cast<const GridEnvBase*>(env.get());
        REQUIRE(grid_env != nullptr);
        CHECK_FALSE(grid_env->grid().wall_at(grid_env->grid().agent.first,
                                             grid_env->grid().agent.second));
        REQUIRE(steps <= env->max_steps());
      }
      CHECK_THROWS_AS(env->step(0), UsageError);
    }
  }
}

TEST_CASE("determinism: same seed, same action sequence, same trajectory") {
  for (const char* id : {"cartpole", "acrobot", "crossing", "fourrooms"}) {
    auto env1 = make_env(id);
    auto env2 = make_env(id);
    Rng r1(6060), r2(6060);
    Rng actions1(17), actions2(17);
    Vector o1 = env1->reset(r1);
    Vector o2 = env2->reset(r2);
    REQUIRE(o1 == o2);
    bool done = false;
    while (!done) {
      const int a1 = actions1.uniform_int(env1->action_count());
      const int a2 = actions2.uniform_int(env2->action_count());
      REQUIRE(a1 == a2);
      const StepResult s1 = env1->step(a1);
      const StepResult s2 = env2->step(a2);
      REQUIRE(s1.observation == s2.observation);
      REQUIRE(s1.reward == s2.reward);
      REQUIRE(s1.done == s2.done);
      done = s1.done;
    }
  }
}

TEST_CASE("unknown environment id is a config error") {
  CHECK_THROWS_AS(make_env("mountaincar"), ConfigError);
  CHECK(is_known_env("cartpole"));
  CHECK_FALSE(is_known_env("mountaincar"));
}
