#pragma once

#include <string>
#include <vector>

#include "mot/simulator.hpp"
#include "mot/tracker.hpp"
#include "mot/types.hpp"

namespace mot {

// Tracking evaluation: greedy center-distance matching per frame, a recall
// sweep on the prediction scores, and the AMOTA / AMOTP / IDS summary.

// One box in evaluation form; predictions carry a score, ground truth an
// instance id.
struct EvalBox {
  int frame_index = 0;
  int id = 0;
  int class_id = 0;
  Box3D box;
  double score = 1.0;
};

std::vector<EvalBox> eval_boxes_from_tracks(const TrackResult& result);
std::vector<EvalBox> eval_boxes_from_scenario(const Scenario& scenario);

struct EvalMatch {
  int frame_index = 0;
  int gt_id = 0;
  int pred_id = 0;
  double distance = 0.0;  // BEV center distance
};

struct MatchResult {
  std::vector<EvalMatch> matches;  // true positives, frame order
  int false_positives = 0;
  int false_negatives = 0;
  int id_switches = 0;
  double mean_matched_distance = 0.0;
};

// Greedy per-frame matching by ascending BEV center distance within class,
// gated at `dist_gate` meters (inclusive). An identity switch is counted when
// a ground-truth instance's matched prediction id differs from the id it
// matched most recently.
MatchResult match_for_eval(const std::vector<EvalBox>& predictions,
                           const std::vector<EvalBox>& ground_truth,
                           double dist_gate);

struct EvalConfig {
  double dist_gate = 2.0;
  int recall_levels = 10;  // r = 1/L, 2/L, ..., 1
};

// Throws std::invalid_argument naming the offending field.
void validate(const EvalConfig& config);

struct ThresholdRow {
  double recall_target = 0.0;
  bool achievable = false;
  double threshold = 0.0;  // minimal score cut reaching the target recall
  int tp = 0, fp = 0, fn = 0, ids = 0;
  double motar = 0.0;
  double mean_distance = 0.0;
};

struct ClassEval {
  int class_id = 0;
  int gt_count = 0;
  double amota = 0.0;
  double amotp = 0.0;  // meters
  int ids = 0;         // at the best-MOTAR threshold
  std::vector<ThresholdRow> rows;
};

struct EvalReport {
  std::vector<ClassEval> classes;
  double amota = 0.0;  // mean over evaluated classes
  double amotp = 0.0;  // mean over evaluated classes
  int ids = 0;         // sum over evaluated classes
  std::vector<int> skipped_classes;  // predicted classes absent from gt
};

// Recall sweep per class: at each target r, the largest score cut whose
// matching achieves recall >= r is evaluated; MOTAR is clamped to [0, 1].
// AMOTA and AMOTP average over the achievable targets only.
EvalReport evaluate(const std::vector<EvalBox>& predictions,
                    const std::vector<EvalBox>& ground_truth,
                    const EvalConfig& config = {});

// Human-readable summary and a flat CSV (one row per class x recall target).
std::string report_text(const EvalReport& report);
std::string report_csv(const EvalReport& report);

}  // namespace mot
