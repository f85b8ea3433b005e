#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mot/rng.hpp"

namespace mot::nn {

// Named parameter tensors. Vectors are stored as n x 1 matrices.
class ParamStore {
 public:
  int add(const std::string& name, int rows, int cols) {
    names_.push_back(name);
    values_.emplace_back(Eigen::MatrixXd::Zero(rows, cols));
    return static_cast<int>(values_.size()) - 1;
  }

  Eigen::MatrixXd& value(int id) { return values_[id]; }
  const Eigen::MatrixXd& value(int id) const { return values_[id]; }
  const std::string& name(int id) const { return names_[id]; }
  int count() const { return static_cast<int>(values_.size()); }

  int find(const std::string& name) const {
    for (int i = 0; i < count(); ++i) {
      if (names_[i] == name) return i;
    }
    return -1;
  }

  int total_scalars() const {
    int n = 0;
    for (const auto& m : values_) n += static_cast<int>(m.size());
    return n;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Eigen::MatrixXd> values_;
};

// Gradient accumulator with the same shapes as a ParamStore.
class GradStore {
 public:
  explicit GradStore(const ParamStore& params) {
    grads_.reserve(params.count());
    for (int i = 0; i < params.count(); ++i) {
      grads_.emplace_back(
          Eigen::MatrixXd::Zero(params.value(i).rows(), params.value(i).cols()));
    }
  }

  Eigen::MatrixXd& grad(int id) { return grads_[id]; }
  const Eigen::MatrixXd& grad(int id) const { return grads_[id]; }
  int count() const { return static_cast<int>(grads_.size()); }

  void zero() {
    for (auto& g : grads_) g.setZero();
  }

  double global_norm() const {
    double sq = 0.0;
    for (const auto& g : grads_) sq += g.squaredNorm();
    return std::sqrt(sq);
  }

  void scale(double s) {
    for (auto& g : grads_) g *= s;
  }

  bool all_finite() const {
    for (const auto& g : grads_) {
      if (!g.allFinite()) return false;
    }
    return true;
  }

  void add(const GradStore& other) {
    for (int i = 0; i < count(); ++i) grads_[i] += other.grads_[i];
  }

 private:
  std::vector<Eigen::MatrixXd> grads_;
};

// Uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) for weight matrices; biases are
// left at zero. fan_in is the column count.
inline void init_uniform(ParamStore& params, int id, Rng& rng) {
  Eigen::MatrixXd& w = params.value(id);
  const double bound = std::sqrt(1.0 / static_cast<double>(w.cols()));
  for (int i = 0; i < w.rows(); ++i)
    for (int j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-bound, bound);
}

}  // namespace mot::nn
