#include "dvqn/optim.hpp"

#include <cmath>

#include "dvqn/errors.hpp"

namespace dvqn {

Optimizer Optimizer::rmsprop(double learning_rate, double rho, double eps) {
  return Optimizer(OptimizerKind::kRmsProp, learning_rate, rho, 0.0, eps);
}

Optimizer Optimizer::adam(double learning_rate, double beta1, double beta2, double eps) {
  return Optimizer(OptimizerKind::kAdam, learning_rate, beta1, beta2, eps);
}

void Optimizer::step(ParamSet& params, const GradientStore& grads) {
  ++step_count_;
  for (const auto& name : params.names()) {
    Matrix& p = params.at(name);
    if (!grads.contains(name))
      throw StructuralError("optimizer: missing gradient for parameter " + name);
    const Matrix& g = grads.at(name);
    if (g.rows() != p.rows() || g.cols() != p.cols())
      throw StructuralError("optimizer: gradient shape mismatch for " + name);

    if (kind_ == OptimizerKind::kRmsProp) {
      auto [it, fresh] = first_.try_emplace(name, Matrix::Zero(p.rows(), p.cols()));
      Matrix& s = it->second;
      s = decay_a_ * s + (1.0 - decay_a_) * g.cwiseProduct(g);
      p.array() -= learning_rate_ * g.array() / (s.array().sqrt() + eps_);
    } else {
      auto [mit, f1] = first_.try_emplace(name, Matrix::Zero(p.rows(), p.cols()));
      auto [vit, f2] = second_.try_emplace(name, Matrix::Zero(p.rows(), p.cols()));
      Matrix& m = mit->second;
      Matrix& v = vit->second;
      m = decay_a_ * m + (1.0 - decay_a_) * g;
      v = decay_b_ * v + (1.0 - decay_b_) * g.cwiseProduct(g);
      const double bias1 = 1.0 - std::pow(decay_a_, static_cast<double>(step_count_));
      const double bias2 = 1.0 - std::pow(decay_b_, static_cast<double>(step_count_));
      p.array() -=
          learning_rate_ * (m.array() / bias1) / ((v.array() / bias2).sqrt() + eps_);
    }
    if (!p.allFinite()) throw NumericalError("optimizer: non-finite parameter " + name);
  }
}

}  // namespace dvqn
