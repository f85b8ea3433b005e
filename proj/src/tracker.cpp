#include "mot/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>

#include "mot/assignment.hpp"

namespace mot {

MotionMode motion_mode_from_string(const std::string& name) {
  if (name == "ekf") return MotionMode::kEkf;
  if (name == "gkf") return MotionMode::kGkf;
  throw std::invalid_argument("unknown motion mode: " + name);
}

std::string to_string(MotionMode mode) {
  return mode == MotionMode::kEkf ? "ekf" : "gkf";
}

std::vector<DetectionBox> preprocess(const std::vector<DetectionBox>& raw,
                                     double score_threshold,
                                     double nms_threshold) {
  std::vector<DetectionBox> scored;
  for (const DetectionBox& d : raw) {
    if (d.score >= score_threshold) scored.push_back(d);
  }

  // Suppress within each class independently; no cross-class suppression.
  std::vector<int> classes;
  for (const DetectionBox& d : scored) classes.push_back(d.class_id);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  std::vector<char> keep(scored.size(), 0);
  for (int cls : classes) {
    std::vector<std::pair<Box3D, double>> boxes;
    std::vector<int> original;
    for (size_t i = 0; i < scored.size(); ++i) {
      if (scored[i].class_id != cls) continue;
      boxes.emplace_back(scored[i].box, scored[i].score);
      original.push_back(static_cast<int>(i));
    }
    for (int idx : nms(boxes, nms_threshold)) keep[original[idx]] = 1;
  }

  std::vector<DetectionBox> out;
  for (size_t i = 0; i < scored.size(); ++i) {
    if (keep[i]) out.push_back(scored[i]);
  }
  return out;
}

namespace {

// One association stage over the given track/detection subsets. Matches are
// solved over the full class-gated cost matrix, then pairs scoring below
// `tau` are rejected back into the unmatched pools.
void run_stage(const std::vector<TrackView>& tracks,
               const std::vector<DetectionBox>& dets,
               const std::vector<int>& track_rows,
               const std::vector<int>& det_cols, bool bev, double tau,
               bool greedy, std::vector<std::pair<int, int>>* matches,
               std::vector<int>* left_tracks, std::vector<int>* left_dets) {
  left_tracks->clear();
  left_dets->clear();
  if (track_rows.empty() || det_cols.empty()) {
    *left_tracks = track_rows;
    *left_dets = det_cols;
    return;
  }

  Eigen::MatrixXd cost(track_rows.size(), det_cols.size());
  for (size_t i = 0; i < track_rows.size(); ++i) {
    const TrackView& tr = tracks[track_rows[i]];
    for (size_t j = 0; j < det_cols.size(); ++j) {
      const DetectionBox& det = dets[det_cols[j]];
      if (tr.class_id != det.class_id) {
        cost(i, j) = kUnmatchableCost;
      } else {
        cost(i, j) = bev ? -giou_bev(tr.predicted, det.box)
                         : -giou3d(tr.predicted, det.box);
      }
    }
  }

  const std::vector<int> row_to_col =
      greedy ? solve_assignment_greedy(cost) : solve_assignment_optimal(cost);

  std::vector<char> det_used(det_cols.size(), 0);
  for (size_t i = 0; i < track_rows.size(); ++i) {
    const int j = row_to_col[i];
    if (j >= 0 && -cost(i, j) >= tau) {
      matches->emplace_back(track_rows[i], det_cols[j]);
      det_used[j] = 1;
    } else {
      left_tracks->push_back(track_rows[i]);
    }
  }
  for (size_t j = 0; j < det_cols.size(); ++j) {
    if (!det_used[j]) left_dets->push_back(det_cols[j]);
  }
}

}  // namespace

void validate(const TrackerConfig& config) {
  const auto bad = [](const char* field) {
    throw std::invalid_argument(std::string("invalid tracker config field: ") +
                                field);
  };
  if (config.bicycle_beta < 0.0 || config.bicycle_beta > 1.0)
    bad("bicycle_beta");
  if (config.score_threshold < 0.0 || config.score_threshold > 1.0)
    bad("score_threshold");
  if (config.nms_threshold < 0.0 || config.nms_threshold > 1.0)
    bad("nms_threshold");
  if (config.tau1 < -1.0 || config.tau1 > 1.0) bad("tau1");
  if (config.tau2 < -1.0 || config.tau2 > 1.0) bad("tau2");
  if (config.lambda < 0.0) bad("lambda");
  if (config.delete_confidence < 0.0 || config.delete_confidence > 1.0)
    bad("delete_confidence");
  if (config.max_coast < 0) bad("max_coast");
  if (config.hit_min < 1) bad("hit_min");
  if (config.birth_threshold < 0.0 || config.birth_threshold > 1.0)
    bad("birth_threshold");
  if (!(config.default_dt > 0.0)) bad("default_dt");
}

AssociationResult associate(const std::vector<TrackView>& tracks,
                            const std::vector<DetectionBox>& detections,
                            const TrackerConfig& config) {
  std::vector<int> all_tracks(tracks.size());
  std::vector<int> all_dets(detections.size());
  for (size_t i = 0; i < tracks.size(); ++i) all_tracks[i] = static_cast<int>(i);
  for (size_t j = 0; j < detections.size(); ++j) all_dets[j] = static_cast<int>(j);

  std::vector<std::pair<int, int>> matched_indices;
  std::vector<int> left_tracks, left_dets;
  run_stage(tracks, detections, all_tracks, all_dets, /*bev=*/false,
            config.tau1, config.greedy_assignment, &matched_indices,
            &left_tracks, &left_dets);

  std::vector<int> final_tracks, final_dets;
  run_stage(tracks, detections, left_tracks, left_dets, /*bev=*/true,
            config.tau2, config.greedy_assignment, &matched_indices,
            &final_tracks, &final_dets);

  AssociationResult result;
  for (const auto& [ti, dj] : matched_indices) {
    result.matches.emplace_back(tracks[ti].id, dj);
  }
  std::sort(result.matches.begin(), result.matches.end());
  for (int ti : final_tracks) result.unmatched_tracks.push_back(tracks[ti].id);
  std::sort(result.unmatched_tracks.begin(), result.unmatched_tracks.end());
  result.unmatched_detections = final_dets;
  std::sort(result.unmatched_detections.begin(),
            result.unmatched_detections.end());
  return result;
}

namespace {

// Motion-module dispatch. Slots are assigned in creation order and align
// with TrackResult::tracks.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual int new_track(const DetectionBox& det) = 0;
  virtual Box3D predict_box(int slot, double dt) const = 0;
  virtual void step(int slot, const std::optional<DetectionBox>& det,
                    int det_index, int frame_index, double dt) = 0;
  virtual Box3D posterior_box(int slot) const = 0;
  virtual Eigen::Vector2d posterior_velocity(int slot) const = 0;
};

class EkfBackend final : public Backend {
 public:
  EkfBackend(const MotionModel& model, bool heading_flip)
      : model_(model), flip_(heading_flip) {}

  int new_track(const DetectionBox& det) override {
    states_.push_back(make_default_filter_state(
        model_, model_.init_state(det.box, det.velocity)));
    return static_cast<int>(states_.size()) - 1;
  }
  Box3D predict_box(int slot, double dt) const override {
    return model_.state_box(model_.predict_state(states_[slot].mean, dt));
  }
  void step(int slot, const std::optional<DetectionBox>& det, int, int,
            double dt) override {
    std::optional<Eigen::VectorXd> y;
    if (det.has_value()) y = observation_from_box(det->box);
    states_[slot] = ekf_step(states_[slot], y, model_, dt, flip_);
  }
  Box3D posterior_box(int slot) const override {
    return model_.state_box(states_[slot].mean);
  }
  Eigen::Vector2d posterior_velocity(int slot) const override {
    return model_.state_velocity(states_[slot].mean);
  }

 private:
  const MotionModel& model_;
  bool flip_;
  std::vector<FilterState> states_;
};

class GkfBackend final : public Backend {
 public:
  GkfBackend(const MotionModel& model, const GainNetwork& net,
             bool heading_flip)
      : model_(model), net_(net), flip_(heading_flip) {}

  int new_track(const DetectionBox& det) override {
    hiddens_.push_back(init_track_hidden(
        net_, model_, model_.init_state(det.box, det.velocity)));
    return static_cast<int>(hiddens_.size()) - 1;
  }
  Box3D predict_box(int slot, double dt) const override {
    return model_.state_box(
        model_.predict_state(hiddens_[slot].last_posterior, dt));
  }
  void step(int slot, const std::optional<DetectionBox>& det, int, int,
            double dt) override {
    std::optional<Eigen::VectorXd> y;
    if (det.has_value()) y = observation_from_box(det->box);
    gkf_step(net_, hiddens_[slot], y, model_, dt, flip_);
  }
  Box3D posterior_box(int slot) const override {
    return model_.state_box(hiddens_[slot].last_posterior);
  }
  Eigen::Vector2d posterior_velocity(int slot) const override {
    return model_.state_velocity(hiddens_[slot].last_posterior);
  }

 private:
  const MotionModel& model_;
  const GainNetwork& net_;
  bool flip_;
  std::vector<TrackHidden> hiddens_;
};

class TapeGkfBackend final : public Backend {
 public:
  TapeGkfBackend(const MotionModel& model, const GainNetwork& net,
                 nn::Tape& tape, bool heading_flip,
                 std::vector<std::vector<TapeStepRecord>>* records)
      : model_(model), net_(net), tape_(tape), flip_(heading_flip),
        records_(records) {}

  int new_track(const DetectionBox& det) override {
    const TrackHidden fresh = init_track_hidden(
        net_, model_, model_.init_state(det.box, det.velocity));
    hiddens_.push_back(lift_hidden(tape_, fresh));
    if (records_) records_->emplace_back();
    return static_cast<int>(hiddens_.size()) - 1;
  }
  Box3D predict_box(int slot, double dt) const override {
    return model_.state_box(model_.predict_state(
        tape_.value(hiddens_[slot].last_posterior), dt));
  }
  void step(int slot, const std::optional<DetectionBox>& det, int det_index,
            int frame_index, double dt) override {
    std::optional<Eigen::VectorXd> y;
    if (det.has_value()) y = observation_from_box(det->box);
    const TapeGkfStep st =
        gkf_step_tape(net_, tape_, hiddens_[slot], y, model_, dt, flip_);
    if (records_) {
      (*records_)[slot].push_back(
          {frame_index, st.posterior, st.updated, det_index});
    }
  }
  Box3D posterior_box(int slot) const override {
    return model_.state_box(tape_.value(hiddens_[slot].last_posterior));
  }
  Eigen::Vector2d posterior_velocity(int slot) const override {
    return model_.state_velocity(tape_.value(hiddens_[slot].last_posterior));
  }

 private:
  const MotionModel& model_;
  const GainNetwork& net_;
  nn::Tape& tape_;
  bool flip_;
  std::vector<TapeTrackHidden> hiddens_;
  std::vector<std::vector<TapeStepRecord>>* records_;
};

TrackResult run_pipeline(const std::vector<std::vector<DetectionBox>>& frames,
                         const std::vector<double>& timestamps,
                         const TrackerConfig& config, Backend& backend) {
  if (!timestamps.empty() && timestamps.size() != frames.size()) {
    throw std::invalid_argument("timestamps must align with frames");
  }
  TrackResult result;
  std::vector<int> live;  // slots of non-dead tracks, creation order
  int next_id = 1;

  for (size_t f = 0; f < frames.size(); ++f) {
    const double ts =
        timestamps.empty() ? f * config.default_dt : timestamps[f];
    double dt = config.default_dt;
    if (f > 0 && !timestamps.empty()) {
      dt = timestamps[f] - timestamps[f - 1];
      if (!(dt > 0.0)) {
        throw std::invalid_argument("timestamps must be strictly increasing");
      }
    }

    const std::vector<DetectionBox> dets =
        preprocess(frames[f], config.score_threshold, config.nms_threshold);

    std::vector<TrackView> views;
    views.reserve(live.size());
    for (int slot : live) {
      views.push_back({result.tracks[slot].id, result.tracks[slot].class_id,
                       backend.predict_box(slot, dt)});
    }
    const AssociationResult assoc = associate(views, dets, config);

    std::map<int, int> slot_of;
    for (int slot : live) slot_of[result.tracks[slot].id] = slot;
    std::vector<int> matched_det(result.tracks.size() + dets.size(), -1);

    for (const auto& [tid, dj] : assoc.matches) {
      const int slot = slot_of.at(tid);
      backend.step(slot, dets[dj], dj, static_cast<int>(f), dt);
      Trajectory& tr = result.tracks[slot];
      tr.confidence =
          std::max(dets[dj].score, tr.confidence * std::exp(-config.lambda));
      tr.time_since_update = 0;
      tr.consecutive_hits += 1;
      tr.age += 1;
      if (tr.status == TrackStatus::kTentative &&
          tr.consecutive_hits >= config.hit_min) {
        tr.status = TrackStatus::kActive;
      }
      matched_det[slot] = dj;
    }

    for (const int tid : assoc.unmatched_tracks) {
      const int slot = slot_of.at(tid);
      backend.step(slot, std::nullopt, -1, static_cast<int>(f), dt);
      Trajectory& tr = result.tracks[slot];
      tr.confidence *= std::exp(-config.lambda);
      tr.time_since_update += 1;
      tr.consecutive_hits = 0;
      tr.age += 1;
      if (tr.confidence < config.delete_confidence ||
          tr.time_since_update > config.max_coast) {
        tr.status = TrackStatus::kDead;
      }
    }

    for (const int dj : assoc.unmatched_detections) {
      if (dets[dj].score < config.birth_threshold) continue;
      const int slot = backend.new_track(dets[dj]);
      Trajectory tr;
      tr.id = next_id++;
      tr.class_id = dets[dj].class_id;
      tr.confidence = dets[dj].score;
      tr.age = 1;
      tr.consecutive_hits = 1;  // the seeding detection counts as a hit
      tr.birth_frame = static_cast<int>(f);
      tr.status = config.hit_min <= 1 ? TrackStatus::kActive
                                      : TrackStatus::kTentative;
      result.tracks.push_back(tr);
      matched_det[slot] = dj;
      live.push_back(slot);
    }

    // Active tracks emit every frame they survive, coasting included.
    for (const int slot : live) {
      Trajectory& tr = result.tracks[slot];
      if (tr.status != TrackStatus::kActive) continue;
      TrackOutputBox out;
      out.frame_index = static_cast<int>(f);
      out.timestamp = ts;
      out.box = backend.posterior_box(slot);
      out.velocity = backend.posterior_velocity(slot);
      out.confidence = tr.confidence;
      out.detection_index = matched_det[slot];
      tr.history.push_back(out);
    }

    live.erase(std::remove_if(live.begin(), live.end(),
                              [&](int slot) {
                                return result.tracks[slot].status ==
                                       TrackStatus::kDead;
                              }),
               live.end());
  }
  return result;
}

}  // namespace

TrackResult track_sequence(const std::vector<std::vector<DetectionBox>>& frames,
                           const std::vector<double>& timestamps,
                           MotionMode mode, const TrackerConfig& config,
                           const GainNetwork* net) {
  const MotionModel model(config.motion, config.bicycle_beta);
  if (mode == MotionMode::kGkf) {
    if (net == nullptr) {
      throw std::invalid_argument("gkf mode requires a gain network");
    }
    if (net->state_dim() != model.state_dim() ||
        net->obs_dim() != model.obs_dim()) {
      throw std::invalid_argument(
          "gain network dimensions do not match the motion model");
    }
    GkfBackend backend(model, *net, config.heading_flip);
    return run_pipeline(frames, timestamps, config, backend);
  }
  EkfBackend backend(model, config.heading_flip);
  return run_pipeline(frames, timestamps, config, backend);
}

TrackResult track_sequence_tape(
    const std::vector<std::vector<DetectionBox>>& frames,
    const std::vector<double>& timestamps, const TrackerConfig& config,
    const GainNetwork& net, nn::Tape& tape,
    std::vector<std::vector<TapeStepRecord>>* records) {
  // The tape's predict/observe nodes reference the model during backward,
  // which happens after this call returns, so the tape co-owns it.
  auto model = std::make_shared<const MotionModel>(config.motion,
                                                   config.bicycle_beta);
  tape.retain(model);
  if (net.state_dim() != model->state_dim() ||
      net.obs_dim() != model->obs_dim()) {
    throw std::invalid_argument(
        "gain network dimensions do not match the motion model");
  }
  if (records) records->clear();
  TapeGkfBackend backend(*model, net, tape, config.heading_flip, records);
  return run_pipeline(frames, timestamps, config, backend);
}

}  // namespace mot
