#include <cmath>

#include "dvqn/env.hpp"
#include "dvqn/errors.hpp"

namespace dvqn {

Vector CartPoleEnv::reset(Rng& rng) {
  x_ = rng.uniform(-0.05, 0.05);
  x_dot_ = rng.uniform(-0.05, 0.05);
  theta_ = rng.uniform(-0.05, 0.05);
  theta_dot_ = rng.uniform(-0.05, 0.05);
  steps_ = 0;
  done_ = false;
  return observation();
}

StepResult CartPoleEnv::step(int action) {
  if (done_) throw UsageError("cartpole: step after done");
  if (action < 0 || action > 1) throw UsageError("cartpole: action out of range");

  const double force = action == 1 ? kForceMag : -kForceMag;
  const double cos_t = std::cos(theta_);
  const double sin_t = std::sin(theta_);
  const double total_mass = kMassCart + kMassPole;
  const double temp =
      (force + kMassPole * kPoleHalfLength * theta_dot_ * theta_dot_ * sin_t) / total_mass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) /
      (kPoleHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / total_mass));
  const double x_acc = temp - kMassPole * kPoleHalfLength * theta_acc * cos_t / total_mass;

  x_ += kTau * x_dot_;
  x_dot_ += kTau * x_acc;
  theta_ += kTau * theta_dot_;
  theta_dot_ += kTau * theta_acc;
  ++steps_;

  StepResult result;
  const bool failed = std::abs(x_) > kXThreshold || std::abs(theta_) > kThetaThreshold;
  if (failed) {
    done_ = true;
    result.reward = -1.0;
  } else {
    result.reward = 1.0;
    if (steps_ >= kMaxSteps) done_ = true;
  }
  result.observation = observation();
  result.done = done_;
  result.steps_elapsed = steps_;
  return result;
}

int CartPoleEnv::state_label() const {
  static constexpr double kCenterBand = 2.0 * 3.14159265358979323846 / 180.0;
  if (std::abs(theta_) < kCenterBand) return 1;
  return theta_ < 0.0 ? 0 : 2;
}

void CartPoleEnv::set_state(double x, double x_dot, double theta, double theta_dot) {
  x_ = x;
  x_dot_ = x_dot;
  theta_ = theta;
  theta_dot_ = theta_dot;
  steps_ = 0;
  done_ = false;
}

Vector CartPoleEnv::observation() const {
  Vector obs(4);
  obs << x_, x_dot_, theta_, theta_dot_;
  return obs;
}

}  // namespace dvqn
