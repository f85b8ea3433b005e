#pragma once

#include <json.hpp>
#include <memory>
#include <optional>

#include "mot/motion.hpp"
#include "mot/nn/layers.hpp"
#include "mot/nn/tape.hpp"

namespace mot {

// Recurrent filter that replaces the analytic Kalman gain with a learned one.
// Three GRUs carry the second-order bookkeeping (process noise, state
// covariance, innovation covariance); a dense head turns the carried state
// into the gain matrix.

struct GainNetworkConfig {
  int state_dim = 10;
  int obs_dim = 7;
  int hidden_cap = 200;  // ceiling for the moment-tracking hidden sizes
};

// Per-track recurrent carriers plus the difference-feature bookkeeping.
// Empty vectors mean "not yet available".
struct TrackHidden {
  Eigen::VectorXd h_q, h_p, h_s;
  Eigen::VectorXd last_posterior;
  Eigen::VectorXd last_prior;
  Eigen::VectorXd prev_posterior;
  Eigen::VectorXd last_observation;
};

// Tape-resident counterpart; -1 marks an unset reference.
struct TapeTrackHidden {
  nn::Tape::Id h_q = -1, h_p = -1, h_s = -1;
  nn::Tape::Id last_posterior = -1;
  nn::Tape::Id last_prior = -1;
  nn::Tape::Id prev_posterior = -1;
  nn::Tape::Id last_observation = -1;
};

// Difference features feeding the gain network (heading components wrapped).
struct GkfFeatures {
  Eigen::VectorXd dx_update;      // previous posterior - previous prior
  Eigen::VectorXd dx_evolution;   // previous posterior - the one before it
  Eigen::VectorXd dy_obs;         // y_n - previous associated observation
  Eigen::VectorXd dy_innovation;  // y_n - h(prior)
};

struct TapeGkfFeatures {
  nn::Tape::Id dx_update = -1;
  nn::Tape::Id dx_evolution = -1;
  nn::Tape::Id dy_obs = -1;
  nn::Tape::Id dy_innovation = -1;
};

class GainNetwork {
 public:
  explicit GainNetwork(const GainNetworkConfig& cfg);

  // Uniform(+-sqrt(1/fan_in)) weights, zero biases, reproducible.
  void init_params(unsigned long seed);

  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  int state_dim() const { return cfg_.state_dim; }
  int obs_dim() const { return cfg_.obs_dim; }
  int hidden_q() const { return hidden_q_; }
  int hidden_p() const { return hidden_p_; }
  int hidden_s() const { return hidden_s_; }

  nlohmann::json architecture() const;
  static GainNetworkConfig config_from_architecture(const nlohmann::json& arch);

  struct GainOut {
    nn::Tape::Id k_flat;  // state_dim * obs_dim, row-major
    nn::Tape::Id h_q, h_p, h_s;
  };
  GainOut forward(nn::Tape& tape, const TapeGkfFeatures& feats,
                  nn::Tape::Id h_q, nn::Tape::Id h_p, nn::Tape::Id h_s) const;

 private:
  GainNetworkConfig cfg_;
  int hidden_q_, hidden_p_, hidden_s_;
  nn::ParamStore params_;
  std::unique_ptr<nn::DenseLayer> embed_q_, embed_p_, embed_s_, bridge_ps_;
  std::unique_ptr<nn::GruCell> gru_q_, gru_p_, gru_s_;
  std::unique_ptr<nn::DenseLayer> head_hidden_, head_out_;
};

// Fresh track carriers: zero hidden state, posterior seeded from the
// detection. Differences are unavailable until real updates accumulate.
TrackHidden init_track_hidden(const GainNetwork& net,
                              const StateSpaceModel& model,
                              const Eigen::VectorXd& x0);

// Value-mode feature construction (the tape path builds the same vectors).
GkfFeatures compute_features(const TrackHidden& hidden,
                             const Eigen::VectorXd& prior,
                             const Eigen::VectorXd& y,
                             const StateSpaceModel& model);

// One filter step on an existing tape; the recurrence reads and rewrites
// `hidden` in place. With no observation the step coasts: the prior becomes
// the posterior and the gain carriers stay untouched.
struct TapeGkfStep {
  nn::Tape::Id prior = -1;
  nn::Tape::Id posterior = -1;
  nn::Tape::Id gain = -1;  // -1 when coasted
  bool updated = false;
};
TapeGkfStep gkf_step_tape(const GainNetwork& net, nn::Tape& tape,
                          TapeTrackHidden& hidden,
                          const std::optional<Eigen::VectorXd>& y,
                          const StateSpaceModel& model, double dt,
                          bool heading_flip = true);

// Value-mode step (runs a scratch tape internally).
struct GkfStep {
  Eigen::VectorXd prior;
  Eigen::VectorXd posterior;
  Eigen::MatrixXd gain;  // zero when coasted
  bool updated = false;
};
GkfStep gkf_step(const GainNetwork& net, TrackHidden& hidden,
                 const std::optional<Eigen::VectorXd>& y,
                 const StateSpaceModel& model, double dt,
                 bool heading_flip = true);

// Bridges between the value and tape representations.
TapeTrackHidden lift_hidden(nn::Tape& tape, const TrackHidden& hidden);
TrackHidden lower_hidden(const nn::Tape& tape, const TapeTrackHidden& hidden);

}  // namespace mot
