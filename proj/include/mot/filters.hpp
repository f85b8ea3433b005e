#pragma once

#include <Eigen/Dense>
#include <optional>

#include "mot/motion.hpp"

namespace mot {

// Posterior belief plus the noise settings it was filtered with.
struct FilterState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;         // m x m, kept symmetric positive-definite
  Eigen::MatrixXd process_noise;      // Q, m x m
  Eigen::MatrixXd measurement_noise;  // R, obs x obs
  bool regularized = false;           // jitter guard engaged at least once
};

// One-step-ahead belief before the measurement arrives.
struct PriorState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd predicted_observation;   // h(mean)
  Eigen::MatrixXd innovation_covariance;   // S = H P H^T + R
  Eigen::MatrixXd process_noise;           // carried through for the update
  Eigen::MatrixXd measurement_noise;
  bool regularized = false;
};

FilterState make_filter_state(const StateSpaceModel& model,
                              const Eigen::VectorXd& x0,
                              const Eigen::MatrixXd& p0,
                              const Eigen::MatrixXd& q,
                              const Eigen::MatrixXd& r);

// Convenience: diagonal initial covariance and model-default noise.
FilterState make_default_filter_state(const MotionModel& model,
                                      const Eigen::VectorXd& x0);

PriorState ekf_predict(const FilterState& fs, const StateSpaceModel& model,
                       double dt);

// Measurement update. When heading_flip is set, an observed heading more than
// pi/2 away from the prediction is rotated by pi first (detectors are
// heading-ambiguous by pi).
FilterState ekf_update(const PriorState& prior, Eigen::VectorXd y,
                       const StateSpaceModel& model, bool heading_flip = true);

// Prior belief downgraded to a posterior when the detection is missing.
FilterState coast(const PriorState& prior);

// predict + update, or predict-only when y is absent.
FilterState ekf_step(const FilterState& fs,
                     const std::optional<Eigen::VectorXd>& y,
                     const StateSpaceModel& model, double dt,
                     bool heading_flip = true);

}  // namespace mot
