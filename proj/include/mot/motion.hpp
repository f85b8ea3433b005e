#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mot/geometry.hpp"

namespace mot {

enum class MotionKind { kCV, kCA, kCTRA, kBicycle };

MotionKind motion_kind_from_string(const std::string& name);
std::string to_string(MotionKind kind);

// Abstract state-space model: x' = f(x, dt), y = h(x).
// Filters and the learned-gain module only talk to this interface, so toy
// scalar models plug in next to the 3D box models.
class StateSpaceModel {
 public:
  virtual ~StateSpaceModel() = default;

  virtual int state_dim() const = 0;
  virtual int obs_dim() const = 0;
  virtual Eigen::VectorXd predict_state(const Eigen::VectorXd& x, double dt) const = 0;
  virtual Eigen::VectorXd observe(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::MatrixXd jacobian_f(const Eigen::VectorXd& x, double dt) const = 0;
  virtual Eigen::MatrixXd jacobian_h(const Eigen::VectorXd& x) const = 0;

  // Indices of angular components, used for residual wrapping.
  virtual std::vector<int> state_angle_indices() const { return {}; }
  virtual std::vector<int> obs_angle_indices() const { return {}; }
};

// Box-tracking motion models. Observation is always the 7-vector
// (x, y, z, w, l, h, theta).
//
// State layouts:
//   CV      (x, y, z, w, l, h, theta, vx, vy)                  m = 9
//   CA      (x, y, z, w, l, h, theta, vx, vy, ax, ay)          m = 11
//   CTRA    (x, y, z, w, l, h, v, a, theta, omega)             m = 10
//   Bicycle CTRA layout; (x, y) is a reference point beta*l/2
//           behind the box center along the heading
class MotionModel final : public StateSpaceModel {
 public:
  static constexpr int kObsDim = 7;

  explicit MotionModel(MotionKind kind, double bicycle_beta = 0.5);

  MotionKind kind() const { return kind_; }

  int state_dim() const override;
  int obs_dim() const override { return kObsDim; }
  Eigen::VectorXd predict_state(const Eigen::VectorXd& x, double dt) const override;
  Eigen::VectorXd observe(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd jacobian_f(const Eigen::VectorXd& x, double dt) const override;
  Eigen::MatrixXd jacobian_h(const Eigen::VectorXd& x) const override;
  std::vector<int> state_angle_indices() const override;
  std::vector<int> obs_angle_indices() const override { return {6}; }

  // New-track state from a detection box; the velocity hint seeds the motion
  // components (projected onto the heading for CTRA/Bicycle).
  Eigen::VectorXd init_state(const Box3D& box,
                             const Eigen::Vector2d& velocity = Eigen::Vector2d::Zero()) const;

  // Box recovered from a state (undoes the Bicycle reference-point shift).
  Box3D state_box(const Eigen::VectorXd& x) const;

  // Ground-plane velocity of the tracked object implied by the state.
  Eigen::Vector2d state_velocity(const Eigen::VectorXd& x) const;

  // Config-default noise diagonals.
  Eigen::VectorXd default_process_noise() const;
  Eigen::VectorXd default_measurement_noise() const;

 private:
  MotionKind kind_;
  double beta_;  // Bicycle reference-point fraction
};

// Observation vector (x,y,z,w,l,h,theta) from a box and back.
Eigen::VectorXd observation_from_box(const Box3D& box);
Box3D box_from_observation(const Eigen::VectorXd& y);

}  // namespace mot
