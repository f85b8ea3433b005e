#pragma once

#include <Eigen/Dense>

#include "mot/motion.hpp"

namespace mot::testing {

// f = identity, h = identity, one-dimensional.
class ScalarRandomWalk : public StateSpaceModel {
 public:
  int state_dim() const override { return 1; }
  int obs_dim() const override { return 1; }
  Eigen::VectorXd predict_state(const Eigen::VectorXd& x, double) const override {
    return x;
  }
  Eigen::VectorXd observe(const Eigen::VectorXd& x) const override { return x; }
  Eigen::MatrixXd jacobian_f(const Eigen::VectorXd&, double) const override {
    return Eigen::MatrixXd::Identity(1, 1);
  }
  Eigen::MatrixXd jacobian_h(const Eigen::VectorXd&) const override {
    return Eigen::MatrixXd::Identity(1, 1);
  }
};

// State (pos, vel), observation (pos). Exercises state_dim != obs_dim.
class ToyConstVel : public StateSpaceModel {
 public:
  int state_dim() const override { return 2; }
  int obs_dim() const override { return 1; }
  Eigen::VectorXd predict_state(const Eigen::VectorXd& x, double dt) const override {
    Eigen::VectorXd xn(2);
    xn << x(0) + dt * x(1), x(1);
    return xn;
  }
  Eigen::VectorXd observe(const Eigen::VectorXd& x) const override {
    return x.head(1);
  }
  Eigen::MatrixXd jacobian_f(const Eigen::VectorXd&, double dt) const override {
    Eigen::MatrixXd f = Eigen::MatrixXd::Identity(2, 2);
    f(0, 1) = dt;
    return f;
  }
  Eigen::MatrixXd jacobian_h(const Eigen::VectorXd&) const override {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1, 2);
    h(0, 0) = 1.0;
    return h;
  }
};

}  // namespace mot::testing
