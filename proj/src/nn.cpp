#include "dvqn/nn.hpp"

#include <cmath>

#include "dvqn/errors.hpp"

namespace dvqn {

ActivationKind ActivationKind::elu(double alpha) {
  if (!(alpha > 0.0)) throw StructuralError("ELU alpha must be positive");
  return {Activation::kElu, alpha};
}

double activation_apply(ActivationKind kind, double x) {
  switch (kind.kind) {
    case Activation::kIdentity:
      return x;
    case Activation::kRelu:
      return x > 0.0 ? x : 0.0;
    case Activation::kElu:
      return x > 0.0 ? x : kind.alpha * std::expm1(x);
  }
  return x;
}

double activation_derivative(ActivationKind kind, double pre) {
  switch (kind.kind) {
    case Activation::kIdentity:
      return 1.0;
    case Activation::kRelu:
      return pre > 0.0 ? 1.0 : 0.0;
    case Activation::kElu:
      return pre > 0.0 ? 1.0 : kind.alpha * std::exp(pre);
  }
  return 1.0;
}

double mse(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw StructuralError("mse: length mismatch");
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

double huber(double x, double delta) {
  const double ax = std::abs(x);
  if (ax <= delta) return 0.5 * x * x;
  return delta * (ax - 0.5 * delta);
}

Matrix& ParamSet::add(const std::string& name, Matrix value) {
  if (contains(name)) throw StructuralError("ParamSet: duplicate parameter " + name);
  order_.push_back(name);
  return values_.emplace(name, std::move(value)).first->second;
}

Matrix& ParamSet::at(std::string_view name) {
  auto it = values_.find(std::string(name));
  if (it == values_.end()) throw StructuralError("ParamSet: unknown parameter " + std::string(name));
  return it->second;
}

const Matrix& ParamSet::at(std::string_view name) const {
  auto it = values_.find(std::string(name));
  if (it == values_.end()) throw StructuralError("ParamSet: unknown parameter " + std::string(name));
  return it->second;
}

bool ParamSet::contains(std::string_view name) const {
  return values_.find(std::string(name)) != values_.end();
}

std::size_t ParamSet::entry_count() const {
  std::size_t n = 0;
  for (const auto& name : order_) n += static_cast<std::size_t>(at(name).size());
  return n;
}

void GradientStore::accumulate(const std::string& name, const Matrix& grad) {
  auto it = grads_.find(name);
  if (it == grads_.end()) {
    grads_.emplace(name, grad);
    return;
  }
  if (it->second.rows() != grad.rows() || it->second.cols() != grad.cols())
    throw StructuralError("GradientStore: shape mismatch for " + name);
  it->second += grad;
}

const Matrix& GradientStore::at(std::string_view name) const {
  auto it = grads_.find(std::string(name));
  if (it == grads_.end())
    throw StructuralError("GradientStore: missing gradient for " + std::string(name));
  return it->second;
}

bool GradientStore::contains(std::string_view name) const {
  return grads_.find(std::string(name)) != grads_.end();
}

bool GradientStore::all_finite() const {
  for (const auto& [name, g] : grads_)
    if (!g.allFinite()) return false;
  return true;
}

Matrix glorot_uniform(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-limit, limit);
  return m;
}

DenseLayer make_dense(ParamSet& params, const std::string& name, int in, int out,
                      ActivationKind activation, Rng& rng) {
  if (in <= 0 || out <= 0) throw StructuralError("make_dense: sizes must be positive");
  DenseLayer layer{name + ".W", name + ".b", activation, in, out};
  params.add(layer.w_name, glorot_uniform(out, in, rng));
  params.add(layer.b_name, Matrix::Zero(out, 1));
  return layer;
}

Vector dense_forward(const ParamSet& params, const DenseLayer& layer, const Vector& x) {
  if (x.size() != layer.in) throw StructuralError("dense_forward: input length mismatch");
  const Matrix& w = params.at(layer.w_name);
  const Matrix& b = params.at(layer.b_name);
  Vector z = w * x + b.col(0);
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = activation_apply(layer.activation, z[i]);
  return z;
}

Matrix dense_forward_batch(const ParamSet& params, const DenseLayer& layer, const Matrix& x) {
  if (x.cols() != layer.in) throw StructuralError("dense_forward_batch: input width mismatch");
  const Matrix& w = params.at(layer.w_name);
  const Matrix& b = params.at(layer.b_name);
  Matrix z = x * w.transpose();
  z.rowwise() += b.col(0).transpose();
  for (Eigen::Index i = 0; i < z.size(); ++i)
    z.data()[i] = activation_apply(layer.activation, z.data()[i]);
  return z;
}

}  // namespace dvqn
