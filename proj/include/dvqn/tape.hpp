#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "dvqn/nn.hpp"

namespace dvqn {

// Reverse-mode differentiation over a recorded forward trace. Node values are
// batch matrices (rows = samples); loss nodes reduce to 1x1. Every node value
// is checked for finiteness as it is produced; a non-finite intermediate
// raises NumericalError naming the node.
class Tape {
 public:
  explicit Tape(const ParamSet& params) : params_(&params) {}

  int input(Matrix x);
  int dense(const DenseLayer& layer, int x);
  // z = mu + exp(logvar / 2) .* eps
  int reparam(int mu, int logvar, Matrix eps);
  // mean over all entries of (x - target)^2
  int mse_loss(int x, Matrix target);
  // mean over rows of -0.5 * sum_d (1 + lv - mu^2 - exp(lv))
  int kl_loss(int mu, int logvar);
  // per-row gather: out(i, 0) = x(i, actions[i])
  int pick(int x, std::vector<int> actions);
  // mean over rows of (target_i - x_i)^2
  int td_mse_loss(int picked, Vector targets);
  // mean over rows of huber(target_i - x_i)
  int td_huber_loss(int picked, Vector targets, double delta = 1.0);
  int weighted_sum(const std::vector<std::pair<int, double>>& terms);

  const Matrix& value(int node) const { return nodes_[static_cast<std::size_t>(node)].value; }
  double scalar(int node) const;

  // Accumulates parameter gradients reachable from `node` into `out`,
  // seeding the node's adjoint with `seed`.
  void backward(int node, GradientStore& out, double seed = 1.0) const;
  GradientStore backward(int node, double seed = 1.0) const;

 private:
  enum class Op { kInput, kDense, kReparam, kMse, kKl, kPick, kTdMse, kTdHuber, kWeightedSum };

  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    Matrix value;
    Matrix aux;  // dense: pre-activation; reparam: eps; mse: target
    Vector targets;
    const DenseLayer* layer = nullptr;
    std::vector<int> actions;
    std::vector<std::pair<int, double>> terms;
  };

  int push(Node node, const char* what);

  const ParamSet* params_;
  std::vector<Node> nodes_;
};

// Central-difference check of `analytic` against the loss function: returns
// the max over parameter entries of |analytic - numeric| / max(|analytic|,
// |numeric|, 1e-4). `loss` must be a pure function of the params.
double finite_difference_check(const std::function<double(ParamSet&)>& loss, ParamSet& params,
                               const GradientStore& analytic, double step = 1e-5);

}  // namespace dvqn
