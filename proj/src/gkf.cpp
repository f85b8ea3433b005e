#include "mot/gkf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mot/angles.hpp"

namespace mot {

namespace {

Eigen::VectorXd wrap_at(Eigen::VectorXd v, const std::vector<int>& indices) {
  for (int idx : indices) v(idx) = wrap_angle(v(idx));
  return v;
}

}  // namespace

GainNetwork::GainNetwork(const GainNetworkConfig& cfg) : cfg_(cfg) {
  if (cfg.state_dim < 1 || cfg.obs_dim < 1 || cfg.hidden_cap < 1) {
    throw std::invalid_argument("gain network dimensions must be positive");
  }
  const int m = cfg.state_dim;
  const int n = cfg.obs_dim;
  // The recurrent carriers stand in for the second-moment matrices a Kalman
  // filter would propagate, so their width tracks the matrix sizes (m x m for
  // the state moments, n x n for the innovation moment) up to a ceiling.
  hidden_q_ = std::min(2 * m * m, cfg.hidden_cap);
  hidden_p_ = std::min(2 * m * m, cfg.hidden_cap);
  hidden_s_ = std::min(2 * n * n, cfg.hidden_cap);

  using nn::Activation;
  embed_q_ = std::make_unique<nn::DenseLayer>(params_, "embed_q", 2 * m,
                                              hidden_q_, Activation::kRelu);
  gru_q_ = std::make_unique<nn::GruCell>(params_, "gru_q", hidden_q_, hidden_q_);
  embed_p_ = std::make_unique<nn::DenseLayer>(params_, "embed_p", hidden_q_ + m,
                                              hidden_p_, Activation::kRelu);
  gru_p_ = std::make_unique<nn::GruCell>(params_, "gru_p", hidden_p_, hidden_p_);
  // Linear bridge: plays the role the observation map plays between the state
  // and innovation moments, so it carries no nonlinearity.
  bridge_ps_ = std::make_unique<nn::DenseLayer>(params_, "bridge_ps", hidden_p_,
                                                hidden_s_, Activation::kIdentity);
  embed_s_ = std::make_unique<nn::DenseLayer>(params_, "embed_s",
                                              hidden_s_ + 2 * n, hidden_s_,
                                              Activation::kRelu);
  gru_s_ = std::make_unique<nn::GruCell>(params_, "gru_s", hidden_s_, hidden_s_);
  head_hidden_ = std::make_unique<nn::DenseLayer>(
      params_, "head_hidden", hidden_p_ + hidden_s_, 2 * m * n, Activation::kRelu);
  head_out_ = std::make_unique<nn::DenseLayer>(params_, "head_out", 2 * m * n,
                                               m * n, Activation::kIdentity);
}

void GainNetwork::init_params(unsigned long seed) {
  Rng rng(seed);
  embed_q_->init_params(params_, rng);
  gru_q_->init_params(params_, rng);
  embed_p_->init_params(params_, rng);
  gru_p_->init_params(params_, rng);
  bridge_ps_->init_params(params_, rng);
  embed_s_->init_params(params_, rng);
  gru_s_->init_params(params_, rng);
  head_hidden_->init_params(params_, rng);
  head_out_->init_params(params_, rng);
}

nlohmann::json GainNetwork::architecture() const {
  return {{"type", "gain-network"},
          {"state_dim", cfg_.state_dim},
          {"obs_dim", cfg_.obs_dim},
          {"hidden_cap", cfg_.hidden_cap},
          {"hidden_q", hidden_q_},
          {"hidden_p", hidden_p_},
          {"hidden_s", hidden_s_}};
}

GainNetworkConfig GainNetwork::config_from_architecture(
    const nlohmann::json& arch) {
  GainNetworkConfig cfg;
  cfg.state_dim = arch.at("state_dim").get<int>();
  cfg.obs_dim = arch.at("obs_dim").get<int>();
  cfg.hidden_cap = arch.at("hidden_cap").get<int>();
  return cfg;
}

GainNetwork::GainOut GainNetwork::forward(nn::Tape& tape,
                                          const TapeGkfFeatures& feats,
                                          nn::Tape::Id h_q, nn::Tape::Id h_p,
                                          nn::Tape::Id h_s) const {
  const nn::Tape::Id xq =
      embed_q_->apply(tape, tape.concat(feats.dx_update, feats.dx_evolution));
  const nn::Tape::Id hq = gru_q_->step(tape, h_q, xq);

  const nn::Tape::Id xp =
      embed_p_->apply(tape, tape.concat(hq, feats.dx_evolution));
  const nn::Tape::Id hp = gru_p_->step(tape, h_p, xp);

  const nn::Tape::Id xs = embed_s_->apply(
      tape, tape.concat(bridge_ps_->apply(tape, hp), feats.dy_obs,
                        feats.dy_innovation));
  const nn::Tape::Id hs = gru_s_->step(tape, h_s, xs);

  const nn::Tape::Id k =
      head_out_->apply(tape, head_hidden_->apply(tape, tape.concat(hp, hs)));
  return {k, hq, hp, hs};
}

TrackHidden init_track_hidden(const GainNetwork& net,
                              const StateSpaceModel& model,
                              const Eigen::VectorXd& x0) {
  if (model.state_dim() != net.state_dim() ||
      model.obs_dim() != net.obs_dim()) {
    throw std::invalid_argument("gain network does not match the model dims");
  }
  TrackHidden hidden;
  hidden.h_q = Eigen::VectorXd::Zero(net.hidden_q());
  hidden.h_p = Eigen::VectorXd::Zero(net.hidden_p());
  hidden.h_s = Eigen::VectorXd::Zero(net.hidden_s());
  hidden.last_posterior = x0;
  return hidden;
}

GkfFeatures compute_features(const TrackHidden& hidden,
                             const Eigen::VectorXd& prior,
                             const Eigen::VectorXd& y,
                             const StateSpaceModel& model) {
  const auto& sa = model.state_angle_indices();
  const auto& oa = model.obs_angle_indices();
  GkfFeatures f;
  f.dx_update =
      hidden.last_prior.size() > 0
          ? wrap_at(hidden.last_posterior - hidden.last_prior, sa)
          : Eigen::VectorXd::Zero(model.state_dim());
  f.dx_evolution =
      hidden.prev_posterior.size() > 0
          ? wrap_at(hidden.last_posterior - hidden.prev_posterior, sa)
          : Eigen::VectorXd::Zero(model.state_dim());
  f.dy_obs = hidden.last_observation.size() > 0
                 ? wrap_at(y - hidden.last_observation, oa)
                 : Eigen::VectorXd::Zero(model.obs_dim());
  f.dy_innovation = wrap_at(y - model.observe(prior), oa);
  return f;
}

TapeGkfStep gkf_step_tape(const GainNetwork& net, nn::Tape& tape,
                          TapeTrackHidden& hidden,
                          const std::optional<Eigen::VectorXd>& y,
                          const StateSpaceModel& model, double dt,
                          bool heading_flip) {
  if (model.state_dim() != net.state_dim() ||
      model.obs_dim() != net.obs_dim()) {
    throw std::invalid_argument("gain network does not match the model dims");
  }

  TapeGkfStep out;
  out.prior = tape.predict(hidden.last_posterior, model, dt);

  if (!y.has_value()) {
    out.posterior = out.prior;
    hidden.prev_posterior = hidden.last_posterior;
    hidden.last_posterior = out.posterior;
    hidden.last_prior = out.prior;
    return out;
  }

  // Boxes are symmetric under a half-turn, so a detector heading that points
  // the wrong way gets flipped before it enters the residual.
  Eigen::VectorXd obs = *y;
  const Eigen::VectorXd pred = model.observe(tape.value(out.prior));
  for (int idx : model.obs_angle_indices()) {
    double res = angle_diff(obs(idx), pred(idx));
    if (heading_flip && std::abs(res) > 0.5 * kPi) {
      obs(idx) = wrap_angle(obs(idx) + kPi);
    } else {
      obs(idx) = wrap_angle(obs(idx));
    }
  }
  const nn::Tape::Id y_node = tape.input(obs);

  const nn::Tape::Id pred_obs = tape.observe(out.prior, model);
  const nn::Tape::Id innovation = tape.wrap_angles(
      tape.sub(y_node, pred_obs), model.obs_angle_indices());

  TapeGkfFeatures feats;
  const auto& sa = model.state_angle_indices();
  feats.dx_update =
      hidden.last_prior >= 0
          ? tape.wrap_angles(tape.sub(hidden.last_posterior, hidden.last_prior),
                             sa)
          : tape.input(Eigen::VectorXd::Zero(net.state_dim()));
  feats.dx_evolution =
      hidden.prev_posterior >= 0
          ? tape.wrap_angles(
                tape.sub(hidden.last_posterior, hidden.prev_posterior), sa)
          : tape.input(Eigen::VectorXd::Zero(net.state_dim()));
  feats.dy_obs =
      hidden.last_observation >= 0
          ? tape.wrap_angles(tape.sub(y_node, hidden.last_observation),
                             model.obs_angle_indices())
          : tape.input(Eigen::VectorXd::Zero(net.obs_dim()));
  feats.dy_innovation = innovation;

  const GainNetwork::GainOut gain =
      net.forward(tape, feats, hidden.h_q, hidden.h_p, hidden.h_s);

  const nn::Tape::Id correction = tape.matvec_dyn(
      gain.k_flat, innovation, net.state_dim(), net.obs_dim());
  out.posterior = tape.wrap_angles(tape.add(out.prior, correction),
                                   model.state_angle_indices());
  out.gain = gain.k_flat;
  out.updated = true;

  hidden.h_q = gain.h_q;
  hidden.h_p = gain.h_p;
  hidden.h_s = gain.h_s;
  hidden.prev_posterior = hidden.last_posterior;
  hidden.last_posterior = out.posterior;
  hidden.last_prior = out.prior;
  hidden.last_observation = y_node;
  return out;
}

TapeTrackHidden lift_hidden(nn::Tape& tape, const TrackHidden& hidden) {
  TapeTrackHidden t;
  t.h_q = tape.input(hidden.h_q);
  t.h_p = tape.input(hidden.h_p);
  t.h_s = tape.input(hidden.h_s);
  t.last_posterior = tape.input(hidden.last_posterior);
  if (hidden.last_prior.size() > 0) t.last_prior = tape.input(hidden.last_prior);
  if (hidden.prev_posterior.size() > 0) {
    t.prev_posterior = tape.input(hidden.prev_posterior);
  }
  if (hidden.last_observation.size() > 0) {
    t.last_observation = tape.input(hidden.last_observation);
  }
  return t;
}

TrackHidden lower_hidden(const nn::Tape& tape, const TapeTrackHidden& hidden) {
  TrackHidden v;
  v.h_q = tape.value(hidden.h_q);
  v.h_p = tape.value(hidden.h_p);
  v.h_s = tape.value(hidden.h_s);
  v.last_posterior = tape.value(hidden.last_posterior);
  if (hidden.last_prior >= 0) v.last_prior = tape.value(hidden.last_prior);
  if (hidden.prev_posterior >= 0) {
    v.prev_posterior = tape.value(hidden.prev_posterior);
  }
  if (hidden.last_observation >= 0) {
    v.last_observation = tape.value(hidden.last_observation);
  }
  return v;
}

GkfStep gkf_step(const GainNetwork& net, TrackHidden& hidden,
                 const std::optional<Eigen::VectorXd>& y,
                 const StateSpaceModel& model, double dt, bool heading_flip) {
  nn::Tape tape(net.params());
  TapeTrackHidden lifted = lift_hidden(tape, hidden);
  const TapeGkfStep step =
      gkf_step_tape(net, tape, lifted, y, model, dt, heading_flip);
  hidden = lower_hidden(tape, lifted);

  GkfStep out;
  out.prior = tape.value(step.prior);
  out.posterior = tape.value(step.posterior);
  out.updated = step.updated;
  if (step.gain >= 0) {
    const Eigen::VectorXd& flat = tape.value(step.gain);
    out.gain = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                              Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data(), net.state_dim(), net.obs_dim());
  } else {
    out.gain = Eigen::MatrixXd::Zero(net.state_dim(), net.obs_dim());
  }
  return out;
}

}  // namespace mot
