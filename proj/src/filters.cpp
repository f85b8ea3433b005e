#include "mot/filters.hpp"

#include <cmath>

#include "mot/angles.hpp"

namespace mot {

namespace {

constexpr double kJitter = 1e-9;

// Symmetrize and, if the factorization says indefinite, add jitter and flag.
void enforce_spd(Eigen::MatrixXd& p, bool& flag) {
  p = 0.5 * (p + p.transpose()).eval();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(p);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    p += kJitter * Eigen::MatrixXd::Identity(p.rows(), p.cols());
    flag = true;
  }
}

}  // namespace

FilterState make_filter_state(const StateSpaceModel& model,
                              const Eigen::VectorXd& x0,
                              const Eigen::MatrixXd& p0,
                              const Eigen::MatrixXd& q,
                              const Eigen::MatrixXd& r) {
  FilterState fs;
  fs.mean = x0;
  fs.covariance = p0;
  fs.process_noise = q;
  fs.measurement_noise = r;
  enforce_spd(fs.covariance, fs.regularized);
  (void)model;
  return fs;
}

FilterState make_default_filter_state(const MotionModel& model,
                                      const Eigen::VectorXd& x0) {
  const Eigen::VectorXd q = model.default_process_noise();
  const Eigen::VectorXd r = model.default_measurement_noise();
  // A fresh track trusts the detection geometry but knows little about motion,
  // so start from the measurement noise scaled up.
  Eigen::VectorXd p0 = 2.0 * q;
  p0.head(3).setConstant(1.0);
  return make_filter_state(model, x0, p0.asDiagonal(), q.asDiagonal(),
                           r.asDiagonal());
}

PriorState ekf_predict(const FilterState& fs, const StateSpaceModel& model,
                       double dt) {
  PriorState prior;
  prior.regularized = fs.regularized;
  prior.mean = model.predict_state(fs.mean, dt);
  const Eigen::MatrixXd f = model.jacobian_f(fs.mean, dt);
  prior.covariance = f * fs.covariance * f.transpose() + fs.process_noise;
  enforce_spd(prior.covariance, prior.regularized);
  prior.predicted_observation = model.observe(prior.mean);
  const Eigen::MatrixXd h = model.jacobian_h(prior.mean);
  prior.innovation_covariance =
      h * prior.covariance * h.transpose() + fs.measurement_noise;
  enforce_spd(prior.innovation_covariance, prior.regularized);
  prior.process_noise = fs.process_noise;
  prior.measurement_noise = fs.measurement_noise;
  return prior;
}

FilterState ekf_update(const PriorState& prior, Eigen::VectorXd y,
                       const StateSpaceModel& model, bool heading_flip) {
  FilterState out;
  out.regularized = prior.regularized;
  out.process_noise = prior.process_noise;
  out.measurement_noise = prior.measurement_noise;

  Eigen::VectorXd innovation = y - prior.predicted_observation;
  for (int idx : model.obs_angle_indices()) {
    double res = angle_diff(y(idx), prior.predicted_observation(idx));
    if (heading_flip && std::abs(res) > 0.5 * kPi) {
      res = angle_diff(y(idx) + kPi, prior.predicted_observation(idx));
    }
    innovation(idx) = res;
  }

  const Eigen::MatrixXd h = model.jacobian_h(prior.mean);
  Eigen::MatrixXd s = prior.innovation_covariance;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    s += kJitter * Eigen::MatrixXd::Identity(s.rows(), s.cols());
    ldlt.compute(s);
    out.regularized = true;
  }
  // K = P H^T S^-1, computed as solve(S, H P)^T with P symmetric.
  const Eigen::MatrixXd gain = ldlt.solve(h * prior.covariance).transpose();

  out.mean = prior.mean + gain * innovation;
  for (int idx : model.state_angle_indices()) out.mean(idx) = wrap_angle(out.mean(idx));
  out.covariance =
      prior.covariance - gain * prior.innovation_covariance * gain.transpose();
  enforce_spd(out.covariance, out.regularized);
  return out;
}

FilterState coast(const PriorState& prior) {
  FilterState out;
  out.mean = prior.mean;
  out.covariance = prior.covariance;
  out.process_noise = prior.process_noise;
  out.measurement_noise = prior.measurement_noise;
  out.regularized = prior.regularized;
  return out;
}

FilterState ekf_step(const FilterState& fs,
                     const std::optional<Eigen::VectorXd>& y,
                     const StateSpaceModel& model, double dt,
                     bool heading_flip) {
  const PriorState prior = ekf_predict(fs, model, dt);
  if (!y.has_value()) return coast(prior);
  return ekf_update(prior, *y, model, heading_flip);
}

}  // namespace mot
