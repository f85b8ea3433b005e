#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mot/filters.hpp"
#include "mot/gkf.hpp"
#include "mot/motion.hpp"
#include "mot/nn/tape.hpp"
#include "mot/types.hpp"

namespace mot {

// Frame-by-frame tracking: preprocess, predict, two-stage association,
// motion-module update, confidence lifecycle.

enum class MotionMode { kEkf, kGkf };
MotionMode motion_mode_from_string(const std::string& name);
std::string to_string(MotionMode mode);

enum class TrackStatus { kTentative, kActive, kDead };

struct TrackerConfig {
  MotionKind motion = MotionKind::kCTRA;
  double bicycle_beta = 0.5;

  double score_threshold = 0.2;  // preprocess filter
  double nms_threshold = 0.08;   // per-class BEV IoU suppression

  double tau1 = 0.3;  // stage-1 acceptance: giou3d >= tau1
  double tau2 = 0.0;  // stage-2 acceptance: giou_bev >= tau2
  bool greedy_assignment = false;

  double lambda = 0.25;            // per-frame confidence decay e^-lambda
  double delete_confidence = 0.05; // dead below this
  int max_coast = 5;               // dead beyond this many missed frames
  int hit_min = 2;                 // consecutive matches to turn active
  double birth_threshold = 0.3;    // minimum score to seed a track

  bool heading_flip = true;   // half-turn-flip observed headings
  double default_dt = 0.5;    // fallback when timestamps are absent
};

// Per-frame output sample of a live, active trajectory.
// Throws std::invalid_argument naming the offending field.
void validate(const TrackerConfig& config);

struct TrackOutputBox {
  int frame_index = 0;
  double timestamp = 0.0;
  Box3D box;
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
  double confidence = 0.0;
  int detection_index = -1;  // post-preprocess index; -1 when coasting
};

struct Trajectory {
  int id = 0;
  int class_id = 0;
  TrackStatus status = TrackStatus::kTentative;
  double confidence = 0.0;
  int age = 0;
  int time_since_update = 0;
  int consecutive_hits = 0;
  int birth_frame = 0;
  std::vector<TrackOutputBox> history;  // active frames only
};

// What association needs to know about a live track.
struct TrackView {
  int id = 0;
  int class_id = 0;
  Box3D predicted;
};

struct AssociationResult {
  std::vector<std::pair<int, int>> matches;  // (track id, detection index)
  std::vector<int> unmatched_tracks;         // track ids
  std::vector<int> unmatched_detections;     // detection indices
};

// Score filter followed by per-class non-maximum suppression. Survivors keep
// their input order.
std::vector<DetectionBox> preprocess(const std::vector<DetectionBox>& raw,
                                     double score_threshold,
                                     double nms_threshold);

// Two stages, both class-gated and solved as an optimal assignment (greedy
// behind the config flag). Stage 1 scores pairs by 3D generalized IoU and
// keeps matches at tau1 or above; stage 2 re-runs the leftovers under the
// looser BEV criterion at tau2.
AssociationResult associate(const std::vector<TrackView>& tracks,
                            const std::vector<DetectionBox>& detections,
                            const TrackerConfig& config);

struct TrackResult {
  std::vector<Trajectory> tracks;  // creation order; includes dead tracks
};

// Value-mode tracking. GRU-gain mode requires `net`; its dimensions must
// match the configured motion model.
TrackResult track_sequence(const std::vector<std::vector<DetectionBox>>& frames,
                           const std::vector<double>& timestamps,
                           MotionMode mode, const TrackerConfig& config,
                           const GainNetwork* net = nullptr);

// Training-mode tracking: identical decisions to the value path, but every
// posterior lives on the caller's tape so a sequence loss can backpropagate
// through the whole recurrence. records[i] aligns with tracks[i].
struct TapeStepRecord {
  int frame_index = -1;
  nn::Tape::Id posterior = -1;
  bool updated = false;
  int detection_index = -1;
};
TrackResult track_sequence_tape(
    const std::vector<std::vector<DetectionBox>>& frames,
    const std::vector<double>& timestamps, const TrackerConfig& config,
    const GainNetwork& net, nn::Tape& tape,
    std::vector<std::vector<TapeStepRecord>>* records);

}  // namespace mot
