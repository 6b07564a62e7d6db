#pragma once

// Independent single-step integrators for the control environments, coded
// separately from the library so env tests have a second route to the same
// dynamics.

#include <array>
#include <cmath>

namespace oracles {

struct CartPoleState {
  double x, x_dot, theta, theta_dot;
};

// Euler step of the cart-pole equations with the canonical v0 constants.
inline CartPoleState cartpole_euler(const CartPoleState& s, int action) {
  const double g = 9.8, mc = 1.0, mp = 0.1, l = 0.5, fmag = 10.0, tau = 0.02;
  const double force = action == 1 ? fmag : -fmag;
  const double ct = std::cos(s.theta), st = std::sin(s.theta);
  const double temp = (force + mp * l * s.theta_dot * s.theta_dot * st) / (mc + mp);
  const double theta_acc = (g * st - ct * temp) / (l * (4.0 / 3.0 - mp * ct * ct / (mc + mp)));
  const double x_acc = temp - mp * l * theta_acc * ct / (mc + mp);
  return {s.x + tau * s.x_dot, s.x_dot + tau * x_acc, s.theta + tau * s.theta_dot,
          s.theta_dot + tau * theta_acc};
}

using AcrobotState = std::array<double, 4>;  // theta1, theta2, omega1, omega2

inline AcrobotState acrobot_deriv(const AcrobotState& s, double torque) {
  const double m1 = 1.0, m2 = 1.0, l1 = 1.0, lc1 = 0.5, lc2 = 0.5, i1 = 1.0, i2 = 1.0, g = 9.8;
  const double t1 = s[0], t2 = s[1], w1 = s[2], w2 = s[3];
  const double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * std::cos(t2)) +
                    i1 + i2;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(t2)) + i2;
  const double phi2 = m2 * lc2 * g * std::cos(t1 + t2 - M_PI / 2);
  const double phi1 = -m2 * l1 * lc2 * w2 * w2 * std::sin(t2) -
                      2 * m2 * l1 * lc2 * w2 * w1 * std::sin(t2) +
                      (m1 * lc1 + m2 * l1) * g * std::cos(t1 - M_PI / 2) + phi2;
  const double a2 = (torque + (d2 / d1) * phi1 - m2 * l1 * lc2 * w1 * w1 * std::sin(t2) - phi2) /
                    (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  const double a1 = -(d2 * a2 + phi1) / d1;
  return {w1, w2, a1, a2};
}

inline double wrap_angle(double a) {
  while (a >= M_PI) a -= 2 * M_PI;
  while (a < -M_PI) a += 2 * M_PI;
  return a;
}

// RK4 step, dt = 0.2, followed by the canonical wrap/clamp.
inline AcrobotState acrobot_rk4(const AcrobotState& s, double torque) {
  const double dt = 0.2;
  const AcrobotState k1 = acrobot_deriv(s, torque);
  AcrobotState mid;
  for (int i = 0; i < 4; ++i) mid[i] = s[i] + dt / 2 * k1[i];
  const AcrobotState k2 = acrobot_deriv(mid, torque);
  for (int i = 0; i < 4; ++i) mid[i] = s[i] + dt / 2 * k2[i];
  const AcrobotState k3 = acrobot_deriv(mid, torque);
  for (int i = 0; i < 4; ++i) mid[i] = s[i] + dt * k3[i];
  const AcrobotState k4 = acrobot_deriv(mid, torque);
  AcrobotState out;
  for (int i = 0; i < 4; ++i) out[i] = s[i] + dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  out[0] = wrap_angle(out[0]);
  out[1] = wrap_angle(out[1]);
  out[2] = std::clamp(out[2], -4 * M_PI, 4 * M_PI);
  out[3] = std::clamp(out[3], -9 * M_PI, 9 * M_PI);
  return out;
}

}  // namespace oracles
