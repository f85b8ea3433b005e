#include "mot/nn/tape.hpp"

#include <cmath>
#include <stdexcept>

#include "mot/angles.hpp"

namespace mot::nn {

namespace {

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>;
using RowMajorMutMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>>;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Tape::Id Tape::input(const Eigen::VectorXd& v) {
  Node n;
  n.op = Op::kInput;
  n.value = v;
  return push(std::move(n));
}

Tape::Id Tape::affine(int w_id, Id x, int b_id) {
  const Eigen::MatrixXd& w = params_->value(w_id);
  const Eigen::MatrixXd& b = params_->value(b_id);
  require(w.cols() == nodes_[x].value.size(), "affine: W vs x");
  require(b.rows() == w.rows() && b.cols() == 1, "affine: b shape");
  Node n;
  n.op = Op::kAffine;
  n.a = x;
  n.w_id = w_id;
  n.b_id = b_id;
  n.value = w * nodes_[x].value + b.col(0);
  return push(std::move(n));
}

Tape::Id Tape::matvec(int w_id, Id x) {
  const Eigen::MatrixXd& w = params_->value(w_id);
  require(w.cols() == nodes_[x].value.size(), "matvec: W vs x");
  Node n;
  n.op = Op::kMatVec;
  n.a = x;
  n.w_id = w_id;
  n.value = w * nodes_[x].value;
  return push(std::move(n));
}

Tape::Id Tape::matvec_dyn(Id mat, Id x, int rows, int cols) {
  require(nodes_[mat].value.size() == rows * cols, "matvec_dyn: mat size");
  require(nodes_[x].value.size() == cols, "matvec_dyn: x size");
  Node n;
  n.op = Op::kMatVecDyn;
  n.a = mat;
  n.b = x;
  n.rows = rows;
  n.cols = cols;
  const RowMajorMap m(nodes_[mat].value.data(), rows, cols);
  n.value = m * nodes_[x].value;
  return push(std::move(n));
}

Tape::Id Tape::add(Id a, Id b) {
  require(nodes_[a].value.size() == nodes_[b].value.size(), "add: sizes");
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.value = nodes_[a].value + nodes_[b].value;
  return push(std::move(n));
}

Tape::Id Tape::sub(Id a, Id b) {
  require(nodes_[a].value.size() == nodes_[b].value.size(), "sub: sizes");
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.value = nodes_[a].value - nodes_[b].value;
  return push(std::move(n));
}

Tape::Id Tape::hadamard(Id a, Id b) {
  require(nodes_[a].value.size() == nodes_[b].value.size(), "hadamard: sizes");
  Node n;
  n.op = Op::kHadamard;
  n.a = a;
  n.b = b;
  n.value = nodes_[a].value.cwiseProduct(nodes_[b].value);
  return push(std::move(n));
}

Tape::Id Tape::one_minus(Id a) {
  Node n;
  n.op = Op::kOneMinus;
  n.a = a;
  n.value = Eigen::VectorXd::Ones(nodes_[a].value.size()) - nodes_[a].value;
  return push(std::move(n));
}

Tape::Id Tape::scale(Id a, double s) {
  Node n;
  n.op = Op::kScale;
  n.a = a;
  n.scalar = s;
  n.value = s * nodes_[a].value;
  return push(std::move(n));
}

Tape::Id Tape::sigmoid(Id a) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = a;
  n.value = nodes_[a].value.unaryExpr(
      [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  return push(std::move(n));
}

Tape::Id Tape::tanh(Id a) {
  Node n;
  n.op = Op::kTanh;
  n.a = a;
  n.value = nodes_[a].value.array().tanh().matrix();
  return push(std::move(n));
}

Tape::Id Tape::relu(Id a) {
  Node n;
  n.op = Op::kRelu;
  n.a = a;
  n.value = nodes_[a].value.cwiseMax(0.0);
  return push(std::move(n));
}

Tape::Id Tape::concat(Id a, Id b) {
  Node n;
  n.op = Op::kConcat2;
  n.a = a;
  n.b = b;
  n.value.resize(nodes_[a].value.size() + nodes_[b].value.size());
  n.value << nodes_[a].value, nodes_[b].value;
  return push(std::move(n));
}

Tape::Id Tape::concat(Id a, Id b, Id c) {
  Node n;
  n.op = Op::kConcat3;
  n.a = a;
  n.b = b;
  n.c = c;
  n.value.resize(nodes_[a].value.size() + nodes_[b].value.size() +
                 nodes_[c].value.size());
  n.value << nodes_[a].value, nodes_[b].value, nodes_[c].value;
  return push(std::move(n));
}

Tape::Id Tape::wrap_angles(Id a, const std::vector<int>& indices) {
  Node n;
  n.op = Op::kWrapAngles;
  n.a = a;
  n.angle_idx = indices;
  n.value = nodes_[a].value;
  for (int idx : indices) n.value(idx) = wrap_angle(n.value(idx));
  return push(std::move(n));
}

Tape::Id Tape::predict(Id x, const StateSpaceModel& model, double dt) {
  require(nodes_[x].value.size() == model.state_dim(), "predict: state size");
  Node n;
  n.op = Op::kPredict;
  n.a = x;
  n.model = &model;
  n.dt = dt;
  n.value = model.predict_state(nodes_[x].value, dt);
  return push(std::move(n));
}

Tape::Id Tape::observe(Id x, const StateSpaceModel& model) {
  require(nodes_[x].value.size() == model.state_dim(), "observe: state size");
  Node n;
  n.op = Op::kObserve;
  n.a = x;
  n.model = &model;
  n.value = model.observe(nodes_[x].value);
  return push(std::move(n));
}

Tape::Id Tape::sum_sq(Id a) {
  Node n;
  n.op = Op::kSumSq;
  n.a = a;
  n.value = Eigen::VectorXd::Constant(1, nodes_[a].value.squaredNorm());
  return push(std::move(n));
}

Tape::Id Tape::huber(Id a, double delta) {
  Node n;
  n.op = Op::kHuber;
  n.a = a;
  n.scalar = delta;
  double total = 0.0;
  for (int i = 0; i < nodes_[a].value.size(); ++i) {
    const double v = std::abs(nodes_[a].value(i));
    total += v <= delta ? 0.5 * v * v : delta * (v - 0.5 * delta);
  }
  n.value = Eigen::VectorXd::Constant(1, total);
  return push(std::move(n));
}

bool Tape::backward(Id loss, GradStore& grads, double clip_norm) {
  require(loss >= 0 && loss < size(), "backward: bad loss id");
  require(nodes_[loss].value.size() == 1, "backward: loss must be scalar");
  grads.zero();
  node_grads_.assign(nodes_.size(), Eigen::VectorXd());
  for (size_t i = 0; i < nodes_.size(); ++i) {
    node_grads_[i] = Eigen::VectorXd::Zero(nodes_[i].value.size());
  }
  node_grads_[loss](0) = 1.0;

  for (Id i = loss; i >= 0; --i) {
    const Node& n = nodes_[i];
    const Eigen::VectorXd& g = node_grads_[i];
    if (g.isZero(0.0)) continue;
    switch (n.op) {
      case Op::kInput:
        break;
      case Op::kAffine:
        grads.grad(n.w_id) += g * nodes_[n.a].value.transpose();
        grads.grad(n.b_id).col(0) += g;
        node_grads_[n.a] += params_->value(n.w_id).transpose() * g;
        break;
      case Op::kMatVec:
        grads.grad(n.w_id) += g * nodes_[n.a].value.transpose();
        node_grads_[n.a] += params_->value(n.w_id).transpose() * g;
        break;
      case Op::kMatVecDyn: {
        RowMajorMutMap gm(node_grads_[n.a].data(), n.rows, n.cols);
        gm += g * nodes_[n.b].value.transpose();
        const RowMajorMap m(nodes_[n.a].value.data(), n.rows, n.cols);
        node_grads_[n.b] += m.transpose() * g;
        break;
      }
      case Op::kAdd:
        node_grads_[n.a] += g;
        node_grads_[n.b] += g;
        break;
      case Op::kSub:
        node_grads_[n.a] += g;
        node_grads_[n.b] -= g;
        break;
      case Op::kHadamard:
        node_grads_[n.a] += g.cwiseProduct(nodes_[n.b].value);
        node_grads_[n.b] += g.cwiseProduct(nodes_[n.a].value);
        break;
      case Op::kOneMinus:
        node_grads_[n.a] -= g;
        break;
      case Op::kScale:
        node_grads_[n.a] += n.scalar * g;
        break;
      case Op::kSigmoid:
        node_grads_[n.a] +=
            g.cwiseProduct(n.value.cwiseProduct(Eigen::VectorXd::Ones(
                                                    n.value.size()) -
                                                n.value));
        break;
      case Op::kTanh:
        node_grads_[n.a] += g.cwiseProduct(
            (1.0 - n.value.array().square()).matrix());
        break;
      case Op::kRelu:
        for (int k = 0; k < g.size(); ++k) {
          if (nodes_[n.a].value(k) > 0.0) node_grads_[n.a](k) += g(k);
        }
        break;
      case Op::kConcat2: {
        const int sa = static_cast<int>(nodes_[n.a].value.size());
        node_grads_[n.a] += g.head(sa);
        node_grads_[n.b] += g.tail(g.size() - sa);
        break;
      }
      case Op::kConcat3: {
        const int sa = static_cast<int>(nodes_[n.a].value.size());
        const int sb = static_cast<int>(nodes_[n.b].value.size());
        node_grads_[n.a] += g.head(sa);
        node_grads_[n.b] += g.segment(sa, sb);
        node_grads_[n.c] += g.tail(g.size() - sa - sb);
        break;
      }
      case Op::kWrapAngles:
        node_grads_[n.a] += g;  // wrapping is a piecewise constant shift
        break;
      case Op::kPredict:
        node_grads_[n.a] +=
            n.model->jacobian_f(nodes_[n.a].value, n.dt).transpose() * g;
        break;
      case Op::kObserve:
        node_grads_[n.a] +=
            n.model->jacobian_h(nodes_[n.a].value).transpose() * g;
        break;
      case Op::kSumSq:
        node_grads_[n.a] += 2.0 * g(0) * nodes_[n.a].value;
        break;
      case Op::kHuber:
        for (int k = 0; k < nodes_[n.a].value.size(); ++k) {
          const double v = nodes_[n.a].value(k);
          const double d =
              std::abs(v) <= n.scalar ? v : n.scalar * (v > 0 ? 1.0 : -1.0);
          node_grads_[n.a](k) += g(0) * d;
        }
        break;
    }
  }

  if (clip_norm > 0.0) {
    const double norm = grads.global_norm();
    if (norm > clip_norm) {
      grads.scale(clip_norm / norm);
      return true;
    }
  }
  return false;
}

}  // namespace mot::nn
