#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dvqn/rng.hpp"

namespace dvqn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---- Activations ----

enum class Activation { kIdentity, kRelu, kElu };

struct ActivationKind {
  Activation kind = Activation::kIdentity;
  double alpha = 1.0;  // ELU only, must be > 0

  static ActivationKind identity() { return {Activation::kIdentity, 1.0}; }
  static ActivationKind relu() { return {Activation::kRelu, 1.0}; }
  static ActivationKind elu(double alpha = 1.0);
};

double activation_apply(ActivationKind kind, double x);
// Derivative with respect to the pre-activation. ReLU'(0) is defined as 0;
// ELU'(0) equals alpha on both sides.
double activation_derivative(ActivationKind kind, double pre);

// ---- Losses ----

double mse(const Vector& a, const Vector& b);
double huber(double x, double delta = 1.0);

// ---- Parameters ----

// Named parameter matrices with stable insertion order. Vectors are stored
// as n x 1 matrices. Checkpoints serialize values row-major.
class ParamSet {
 public:
  Matrix& add(const std::string& name, Matrix value);
  Matrix& at(std::string_view name);
  const Matrix& at(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::size_t size() const { return order_.size(); }
  const std::vector<std::string>& names() const { return order_; }
  std::size_t entry_count() const;

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, Matrix> values_;
};

// One gradient matrix per parameter name, accumulated additively.
class GradientStore {
 public:
  void accumulate(const std::string& name, const Matrix& grad);
  const Matrix& at(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::size_t size() const { return grads_.size(); }
  bool all_finite() const;

 private:
  std::unordered_map<std::string, Matrix> grads_;
};

// ---- Dense layer ----

// Weights live in a ParamSet under "<name>.W" (out x in) and "<name>.b"
// (out x 1); the layer itself only carries wiring.
struct DenseLayer {
  std::string w_name;
  std::string b_name;
  ActivationKind activation;
  int in = 0;
  int out = 0;
};

// Glorot-uniform weights, zero biases.
DenseLayer make_dense(ParamSet& params, const std::string& name, int in, int out,
                      ActivationKind activation, Rng& rng);

Vector dense_forward(const ParamSet& params, const DenseLayer& layer, const Vector& x);
// Batched: rows are samples.
Matrix dense_forward_batch(const ParamSet& params, const DenseLayer& layer, const Matrix& x);

Matrix glorot_uniform(int rows, int cols, Rng& rng);

}  // namespace dvqn
