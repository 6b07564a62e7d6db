#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>

#include "dvqn/nn.hpp"

namespace dvqn {

enum class OptimizerKind { kRmsProp, kAdam };

// Per-parameter moment state plus the update rule. Every parameter in the
// set must have a gradient entry on each step.
class Optimizer {
 public:
  static Optimizer rmsprop(double learning_rate, double rho = 0.99, double eps = 1e-8);
  static Optimizer adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                        double eps = 1e-8);

  void step(ParamSet& params, const GradientStore& grads);

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return learning_rate_; }
  std::int64_t step_count() const { return step_count_; }

 private:
  Optimizer(OptimizerKind kind, double lr, double a, double b, double eps)
      : kind_(kind), learning_rate_(lr), decay_a_(a), decay_b_(b), eps_(eps) {}

  OptimizerKind kind_;
  double learning_rate_;
  double decay_a_;  // rmsprop rho / adam beta1
  double decay_b_;  // adam beta2
  double eps_;
  std::int64_t step_count_ = 0;
  std::unordered_map<std::string, Matrix> first_;   // rmsprop sq-avg / adam m
  std::unordered_map<std::string, Matrix> second_;  // adam v
};

}  // namespace dvqn
