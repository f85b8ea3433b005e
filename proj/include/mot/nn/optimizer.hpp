#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "mot/angles.hpp"
#include "mot/nn/params.hpp"

namespace mot::nn {

struct AdamWConfig {
  double weight_decay = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// AdamW with decoupled weight decay:
//   p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + wd * p)
class AdamW {
 public:
  AdamW(const ParamStore& params, AdamWConfig cfg = {}) : cfg_(cfg) {
    m_.reserve(params.count());
    v_.reserve(params.count());
    for (int i = 0; i < params.count(); ++i) {
      m_.emplace_back(Eigen::MatrixXd::Zero(params.value(i).rows(),
                                            params.value(i).cols()));
      v_.emplace_back(Eigen::MatrixXd::Zero(params.value(i).rows(),
                                            params.value(i).cols()));
    }
  }

  // Returns false (and leaves everything untouched) on non-finite gradients.
  bool step(ParamStore& params, const GradStore& grads, double lr) {
    if (!grads.all_finite()) {
      ++skipped_;
      return false;
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (int i = 0; i < params.count(); ++i) {
      const Eigen::MatrixXd& g = grads.grad(i);
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
      const Eigen::MatrixXd m_hat = m_[i] / bc1;
      const Eigen::MatrixXd v_hat = v_[i] / bc2;
      params.value(i) -=
          lr * (m_hat.cwiseQuotient(
                    v_hat.cwiseSqrt() +
                    Eigen::MatrixXd::Constant(v_hat.rows(), v_hat.cols(),
                                              cfg_.eps)) +
                cfg_.weight_decay * params.value(i));
    }
    return true;
  }

  long steps_taken() const { return t_; }
  long steps_skipped() const { return skipped_; }
  const AdamWConfig& config() const { return cfg_; }

  // Checkpoint access.
  std::vector<Eigen::MatrixXd>& first_moments() { return m_; }
  std::vector<Eigen::MatrixXd>& second_moments() { return v_; }
  const std::vector<Eigen::MatrixXd>& first_moments() const { return m_; }
  const std::vector<Eigen::MatrixXd>& second_moments() const { return v_; }
  void set_steps_taken(long t) { t_ = t; }

 private:
  AdamWConfig cfg_;
  std::vector<Eigen::MatrixXd> m_, v_;
  long t_ = 0;
  long skipped_ = 0;
};

// Cosine annealing from max_lr (step 0) down to min_lr (step total_steps).
inline double cosine_lr(long step, long total_steps, double max_lr,
                        double min_lr) {
  const double phase =
      kPi * static_cast<double>(step) / static_cast<double>(total_steps);
  return min_lr + 0.5 * (max_lr - min_lr) * (1.0 + std::cos(phase));
}

}  // namespace mot::nn
