#include <array>
#include <cmath>
#include <numbers>

#include "dvqn/env.hpp"
#include "dvqn/errors.hpp"

namespace dvqn {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGravity = 9.8;
constexpr double kLink1Length = 1.0;
constexpr double kLinkMass = 1.0;      // both links
constexpr double kLinkCom = 0.5;       // distance to center of mass
constexpr double kLinkInertia = 1.0;   // both links
constexpr double kOmega1Max = 4.0 * kPi;
constexpr double kOmega2Max = 9.0 * kPi;

double wrap_pi(double angle) {
  return angle - 2.0 * kPi * std::floor((angle + kPi) / (2.0 * kPi));
}

// State derivative for the two-link underactuated arm; torque acts on the
// second joint.
std::array<double, 4> dynamics(const std::array<double, 4>& s, double torque) {
  const double theta1 = s[0], theta2 = s[1], omega1 = s[2], omega2 = s[3];
  const double m = kLinkMass, l1 = kLink1Length, lc = kLinkCom, inertia = kLinkInertia;
  const double d1 =
      m * lc * lc + m * (l1 * l1 + lc * lc + 2.0 * l1 * lc * std::cos(theta2)) + 2.0 * inertia;
  const double d2 = m * (lc * lc + l1 * lc * std::cos(theta2)) + inertia;
  const double phi2 = m * lc * kGravity * std::cos(theta1 + theta2 - kPi / 2.0);
  const double phi1 = -m * l1 * lc * omega2 * omega2 * std::sin(theta2) -
                      2.0 * m * l1 * lc * omega2 * omega1 * std::sin(theta2) +
                      (m * lc + m * l1) * kGravity * std::cos(theta1 - kPi / 2.0) + phi2;
  const double alpha2 =
      (torque + (d2 / d1) * phi1 - m * l1 * lc * omega1 * omega1 * std::sin(theta2) - phi2) /
      (m * lc * lc + inertia - d2 * d2 / d1);
  const double alpha1 = -(d2 * alpha2 + phi1) / d1;
  return {omega1, omega2, alpha1, alpha2};
}

}  // namespace

void AcrobotEnv::integrate(double& theta1, double& theta2, double& omega1, double& omega2,
                           double torque) {
  const std::array<double, 4> y0{theta1, theta2, omega1, omega2};
  const auto k1 = dynamics(y0, torque);
  std::array<double, 4> tmp;
  for (int i = 0; i < 4; ++i) tmp[i] = y0[i] + 0.5 * kDt * k1[i];
  const auto k2 = dynamics(tmp, torque);
  for (int i = 0; i < 4; ++i) tmp[i] = y0[i] + 0.5 * kDt * k2[i];
  const auto k3 = dynamics(tmp, torque);
  for (int i = 0; i < 4; ++i) tmp[i] = y0[i] + kDt * k3[i];
  const auto k4 = dynamics(tmp, torque);
  std::array<double, 4> y1;
  for (int i = 0; i < 4; ++i)
    y1[i] = y0[i] + kDt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

  theta1 = wrap_pi(y1[0]);
  theta2 = wrap_pi(y1[1]);
  omega1 = std::clamp(y1[2], -kOmega1Max, kOmega1Max);
  omega2 = std::clamp(y1[3], -kOmega2Max, kOmega2Max);
}

Vector AcrobotEnv::reset(Rng& rng) {
  theta1_ = rng.uniform(-0.1, 0.1);
  theta2_ = rng.uniform(-0.1, 0.1);
  omega1_ = rng.uniform(-0.1, 0.1);
  omega2_ = rng.uniform(-0.1, 0.1);
  steps_ = 0;
  done_ = false;
  return observation();
}

StepResult AcrobotEnv::step(int action) {
  if (done_) throw UsageError("acrobot: step after done");
  if (action < 0 || action > 2) throw UsageError("acrobot: action out of range");

  integrate(theta1_, theta2_, omega1_, omega2_, static_cast<double>(action - 1));
  ++steps_;

  StepResult result;
  const bool reached = -std::cos(theta1_) - std::cos(theta1_ + theta2_) > 1.0;
  if (reached) {
    done_ = true;
    result.reward = 0.0;
  } else {
    result.reward = -1.0;
    if (steps_ >= kMaxSteps) done_ = true;
  }
  result.observation = observation();
  result.done = done_;
  result.steps_elapsed = steps_;
  return result;
}

void AcrobotEnv::set_state(double theta1, double theta2, double omega1, double omega2) {
  theta1_ = theta1;
  theta2_ = theta2;
  omega1_ = omega1;
  omega2_ = omega2;
  steps_ = 0;
  done_ = false;
}

Vector AcrobotEnv::observation() const {
  Vector obs(6);
  obs << std::cos(theta1_), std::sin(theta1_), std::cos(theta2_), std::sin(theta2_), omega1_,
      omega2_;
  return obs;
}

}  // namespace dvqn
