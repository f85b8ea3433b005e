#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "mot/motion.hpp"
#include "mot/nn/params.hpp"

namespace mot::nn {

// Reverse-mode autodiff over vector-valued nodes. Parameters enter through
// affine/matvec ops and receive gradients in a GradStore; every node's
// gradient stays readable after backward for diagnostics.
//
// The predict/observe ops call into a StateSpaceModel and backpropagate
// through its analytic Jacobians, which is what lets a whole tracked sequence
// (including the motion recurrence) sit on one tape.
class Tape {
 public:
  using Id = int;

  explicit Tape(const ParamStore& params) : params_(&params) {}

  // Leaves.
  Id input(const Eigen::VectorXd& v);  // gradient tracked but unused

  // Parameterized ops.
  Id affine(int w_id, Id x, int b_id);  // W x + b
  Id matvec(int w_id, Id x);            // W x

  // A vector node reinterpreted as a rows x cols row-major matrix times a
  // vector node. Used for the emitted gain times the innovation.
  Id matvec_dyn(Id mat, Id x, int rows, int cols);

  // Elementwise and structural ops.
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id hadamard(Id a, Id b);
  Id one_minus(Id a);  // 1 - a
  Id scale(Id a, double s);
  Id sigmoid(Id a);
  Id tanh(Id a);
  Id relu(Id a);
  Id concat(Id a, Id b);
  Id concat(Id a, Id b, Id c);
  Id wrap_angles(Id a, const std::vector<int>& indices);

  // State-space model hooks (exact analytic-Jacobian backward). The nodes
  // keep a pointer to `model`, which must stay alive until the tape is done;
  // retain() extends a model's lifetime to the tape's when the caller's copy
  // goes out of scope earlier.
  Id predict(Id x, const StateSpaceModel& model, double dt);
  Id observe(Id x, const StateSpaceModel& model);
  void retain(std::shared_ptr<const void> owned) {
    retained_.push_back(std::move(owned));
  }

  // Scalar (1-vector) reductions.
  Id sum_sq(Id a);              // [sum a_i^2]
  Id huber(Id a, double delta); // [sum huber_delta(a_i)]

  const Eigen::VectorXd& value(Id id) const { return nodes_[id].value; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // Reverse pass from a scalar node. Fills `grads`; when clip_norm > 0 the
  // parameter gradients are rescaled to that global norm if they exceed it.
  // Returns true when clipping engaged.
  bool backward(Id loss, GradStore& grads, double clip_norm = 0.0);

  // Gradient of the last backward() pass with respect to any node.
  const Eigen::VectorXd& node_grad(Id id) const { return node_grads_[id]; }

 private:
  enum class Op {
    kInput,
    kAffine,
    kMatVec,
    kMatVecDyn,
    kAdd,
    kSub,
    kHadamard,
    kOneMinus,
    kScale,
    kSigmoid,
    kTanh,
    kRelu,
    kConcat2,
    kConcat3,
    kWrapAngles,
    kPredict,
    kObserve,
    kSumSq,
    kHuber,
  };

  struct Node {
    Op op;
    Id a = -1, b = -1, c = -1;
    int w_id = -1, b_id = -1;
    double scalar = 0.0;
    int rows = 0, cols = 0;
    std::vector<int> angle_idx;
    const StateSpaceModel* model = nullptr;
    double dt = 0.0;
    Eigen::VectorXd value;
  };

  Id push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size()) - 1;
  }

  const ParamStore* params_;
  std::vector<Node> nodes_;
  std::vector<Eigen::VectorXd> node_grads_;
  std::vector<std::shared_ptr<const void>> retained_;
};

}  // namespace mot::nn
