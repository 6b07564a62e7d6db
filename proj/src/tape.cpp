#include "dvqn/tape.hpp"

#include <cmath>
#include <string>

#include "dvqn/errors.hpp"

namespace dvqn {

int Tape::push(Node node, const char* what) {
  if (!node.value.allFinite())
    throw NumericalError(std::string("tape: non-finite value at node ") +
                         std::to_string(nodes_.size()) + " (" + what + ")");
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::input(Matrix x) {
  Node n;
  n.op = Op::kInput;
  n.value = std::move(x);
  return push(std::move(n), "input");
}

int Tape::dense(const DenseLayer& layer, int x) {
  const Matrix& in = value(x);
  if (in.cols() != layer.in) throw StructuralError("tape dense: input width mismatch");
  const Matrix& w = params_->at(layer.w_name);
  const Matrix& b = params_->at(layer.b_name);
  Node n;
  n.op = Op::kDense;
  n.a = x;
  n.layer = &layer;
  n.aux.noalias() = in * w.transpose();
  n.aux.rowwise() += b.col(0).transpose();
  n.value = n.aux;
  for (Eigen::Index i = 0; i < n.value.size(); ++i)
    n.value.data()[i] = activation_apply(layer.activation, n.value.data()[i]);
  return push(std::move(n), layer.w_name.c_str());
}

int Tape::reparam(int mu, int logvar, Matrix eps) {
  const Matrix& m = value(mu);
  const Matrix& lv = value(logvar);
  if (m.rows() != lv.rows() || m.cols() != lv.cols() || m.rows() != eps.rows() ||
      m.cols() != eps.cols())
    throw StructuralError("tape reparam: shape mismatch");
  Node n;
  n.op = Op::kReparam;
  n.a = mu;
  n.b = logvar;
  n.value = m.array() + (lv.array() / 2.0).exp() * eps.array();
  n.aux = std::move(eps);
  return push(std::move(n), "reparam");
}

int Tape::mse_loss(int x, Matrix target) {
  const Matrix& v = value(x);
  if (v.rows() != target.rows() || v.cols() != target.cols())
    throw StructuralError("tape mse: shape mismatch");
  Node n;
  n.op = Op::kMse;
  n.a = x;
  n.value = Matrix::Constant(1, 1, (v - target).squaredNorm() / static_cast<double>(v.size()));
  n.aux = std::move(target);
  return push(std::move(n), "mse");
}

int Tape::kl_loss(int mu, int logvar) {
  const Matrix& m = value(mu);
  const Matrix& lv = value(logvar);
  if (m.rows() != lv.rows() || m.cols() != lv.cols())
    throw StructuralError("tape kl: shape mismatch");
  const double total =
      -0.5 * (1.0 + lv.array() - m.array().square() - lv.array().exp()).sum();
  Node n;
  n.op = Op::kKl;
  n.a = mu;
  n.b = logvar;
  n.value = Matrix::Constant(1, 1, total / static_cast<double>(m.rows()));
  return push(std::move(n), "kl");
}

int Tape::pick(int x, std::vector<int> actions) {
  const Matrix& v = value(x);
  if (static_cast<Eigen::Index>(actions.size()) != v.rows())
    throw StructuralError("tape pick: one action per row required");
  Node n;
  n.op = Op::kPick;
  n.a = x;
  n.value.resize(v.rows(), 1);
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const int a = actions[static_cast<std::size_t>(i)];
    if (a < 0 || a >= v.cols()) throw StructuralError("tape pick: action out of range");
    n.value(i, 0) = v(i, a);
  }
  n.actions = std::move(actions);
  return push(std::move(n), "pick");
}

int Tape::td_mse_loss(int picked, Vector targets) {
  const Matrix& v = value(picked);
  if (v.cols() != 1 || v.rows() != targets.size())
    throw StructuralError("tape td_mse: expected column matching targets");
  Node n;
  n.op = Op::kTdMse;
  n.a = picked;
  n.value = Matrix::Constant(
      1, 1, (targets - v.col(0)).squaredNorm() / static_cast<double>(targets.size()));
  n.targets = std::move(targets);
  return push(std::move(n), "td_mse");
}

int Tape::td_huber_loss(int picked, Vector targets, double delta) {
  const Matrix& v = value(picked);
  if (v.cols() != 1 || v.rows() != targets.size())
    throw StructuralError("tape td_huber: expected column matching targets");
  double total = 0.0;
  for (Eigen::Index i = 0; i < targets.size(); ++i) total += huber(targets[i] - v(i, 0), delta);
  Node n;
  n.op = Op::kTdHuber;
  n.a = picked;
  n.value = Matrix::Constant(1, 1, total / static_cast<double>(targets.size()));
  n.targets = std::move(targets);
  n.aux = Matrix::Constant(1, 1, delta);
  return push(std::move(n), "td_huber");
}

int Tape::weighted_sum(const std::vector<std::pair<int, double>>& terms) {
  double total = 0.0;
  for (const auto& [node, coeff] : terms) {
    if (value(node).size() != 1) throw StructuralError("tape weighted_sum: scalar nodes required");
    total += coeff * value(node)(0, 0);
  }
  Node n;
  n.op = Op::kWeightedSum;
  n.value = Matrix::Constant(1, 1, total);
  n.terms = terms;
  return push(std::move(n), "weighted_sum");
}

double Tape::scalar(int node) const {
  const Matrix& v = value(node);
  if (v.size() != 1) throw StructuralError("tape scalar: node is not scalar");
  return v(0, 0);
}

void Tape::backward(int node, GradientStore& out, double seed) const {
  if (node < 0 || node >= static_cast<int>(nodes_.size()))
    throw StructuralError("tape backward: bad node id");
  std::vector<Matrix> adj(nodes_.size());
  std::vector<bool> live(nodes_.size(), false);
  auto bump = [&](int id, auto&& grad) {
    if (!live[static_cast<std::size_t>(id)]) {
      adj[static_cast<std::size_t>(id)] = grad;
      live[static_cast<std::size_t>(id)] = true;
    } else {
      adj[static_cast<std::size_t>(id)] += grad;
    }
  };
  bump(node, Matrix::Constant(nodes_[static_cast<std::size_t>(node)].value.rows(),
                              nodes_[static_cast<std::size_t>(node)].value.cols(), seed));

  for (int id = node; id >= 0; --id) {
    const std::size_t i = static_cast<std::size_t>(id);
    if (!live[i]) continue;
    const Node& n = nodes_[i];
    const Matrix& g = adj[i];
    switch (n.op) {
      case Op::kInput:
        break;
      case Op::kDense: {
        Matrix gpre = g;
        for (Eigen::Index j = 0; j < gpre.size(); ++j)
          gpre.data()[j] *= activation_derivative(n.layer->activation, n.aux.data()[j]);
        const Matrix& x = value(n.a);
        out.accumulate(n.layer->w_name, gpre.transpose() * x);
        out.accumulate(n.layer->b_name, gpre.colwise().sum().transpose());
        bump(n.a, gpre * params_->at(n.layer->w_name));
        break;
      }
      case Op::kReparam: {
        bump(n.a, g);
        // d z / d logvar = 0.5 * sigma * eps = 0.5 * (z - mu)
        bump(n.b, (g.array() * 0.5 * (n.value - value(n.a)).array()).matrix());
        break;
      }
      case Op::kMse: {
        const double scale = 2.0 * g(0, 0) / static_cast<double>(n.aux.size());
        bump(n.a, (scale * (value(n.a) - n.aux)).eval());
        break;
      }
      case Op::kKl: {
        const double scale = g(0, 0) / static_cast<double>(value(n.a).rows());
        bump(n.a, (scale * value(n.a)).eval());
        bump(n.b, (scale * 0.5 * (value(n.b).array().exp() - 1.0)).matrix());
        break;
      }
      case Op::kPick: {
        Matrix gx = Matrix::Zero(value(n.a).rows(), value(n.a).cols());
        for (Eigen::Index r = 0; r < gx.rows(); ++r)
          gx(r, n.actions[static_cast<std::size_t>(r)]) = g(r, 0);
        bump(n.a, gx);
        break;
      }
      case Op::kTdMse: {
        const double scale = 2.0 * g(0, 0) / static_cast<double>(n.targets.size());
        bump(n.a, (scale * (value(n.a).col(0) - n.targets)).eval());
        break;
      }
      case Op::kTdHuber: {
        const double delta = n.aux(0, 0);
        const double scale = g(0, 0) / static_cast<double>(n.targets.size());
        Matrix gx(n.targets.size(), 1);
        for (Eigen::Index r = 0; r < n.targets.size(); ++r) {
          const double resid = n.targets[r] - value(n.a)(r, 0);
          gx(r, 0) = -scale * std::clamp(resid, -delta, delta);
        }
        bump(n.a, gx);
        break;
      }
      case Op::kWeightedSum: {
        for (const auto& [child, coeff] : n.terms)
          bump(child, Matrix::Constant(1, 1, g(0, 0) * coeff));
        break;
      }
    }
  }
}

GradientStore Tape::backward(int node, double seed) const {
  GradientStore out;
  backward(node, out, seed);
  return out;
}

double finite_difference_check(const std::function<double(ParamSet&)>& loss, ParamSet& params,
                               const GradientStore& analytic, double step) {
  double worst = 0.0;
  for (const auto& name : params.names()) {
    Matrix& p = params.at(name);
    const Matrix* g = analytic.contains(name) ? &analytic.at(name) : nullptr;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double saved = p.data()[i];
      p.data()[i] = saved + step;
      const double up = loss(params);
      p.data()[i] = saved - step;
      const double down = loss(params);
      p.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = g ? g->data()[i] : 0.0;
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-4});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace dvqn
