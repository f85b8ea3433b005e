#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mot/gkf.hpp"
#include "mot/metrics.hpp"
#include "mot/nn/optimizer.hpp"
#include "mot/simulator.hpp"
#include "mot/tracker.hpp"
#include "mot/types.hpp"

namespace mot {

// Training of the gain network on tracked sequences. Supervision targets are
// the observable components (x, y, z, w, l, h, yaw); annotation boxes define
// what is observable, so velocity components never enter the loss. When a
// track's frame has no annotation within the gate, semi-supervised mode
// substitutes the posterior of a classical filter run on the identical
// detection stream, paired through the shared detection index.

enum class TrainMode { kSupervised, kSemi };
std::string to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& name);

enum class SupervisionSource { kAnnotation, kPseudoLabel };

struct SupervisionRecord {
  int track_id = 0;
  int frame_index = 0;
  Eigen::VectorXd target;  // observable components
  SupervisionSource source = SupervisionSource::kAnnotation;
};

struct LossConfig {
  bool huber = false;        // Huber on each residual component vs squared
  double huber_delta = 1.0;
  double pseudo_label_weight = 1.0;
};

// Greedy nearest-center (BEV) matching of one frame's annotations to track
// boxes within class. Returns the matched annotation index per track, -1 when
// unmatched; each annotation is used at most once.
std::vector<int> associate_annotations(
    const std::vector<TrackView>& tracks,
    const std::vector<AnnotationBox>& annotations, double gate = 2.0);

// Sum over pairs of squared (or Huber) residuals on the observable
// components, heading wrapped. estimates[i] pairs with targets[i].
double supervised_loss(const std::vector<Eigen::VectorXd>& estimates,
                       const std::vector<Eigen::VectorXd>& targets,
                       const LossConfig& config = {});

// Same residuals with per-record sources: annotation terms enter at weight
// one, pseudo-label terms at config.pseudo_label_weight.
double semi_supervised_loss(const std::vector<SupervisionRecord>& records,
                            const std::vector<Eigen::VectorXd>& estimates,
                            const LossConfig& config = {});

// d/dK ||K dy - dx||^2 = 2 (K dy - dx) dy^T; closed-form oracle for the tape
// gradient of the squared update residual with respect to the gain.
Eigen::MatrixXd gain_gradient_closed_form(const Eigen::MatrixXd& gain,
                                          const Eigen::VectorXd& innovation,
                                          const Eigen::VectorXd& state_residual);

// The annotated subset of each frame's ground truth, indexed by frame.
std::vector<std::vector<AnnotationBox>> annotated_boxes(
    const Scenario& scenario);

struct SequenceLoss {
  nn::Tape::Id node = -1;  // -1 when nothing contributed
  double value = 0.0;
  double annotation_term = 0.0;
  double pseudo_term = 0.0;  // already weighted
  int annotation_count = 0;
  int pseudo_count = 0;
  int uncovered = 0;  // active-track frames with no usable target
  std::vector<SupervisionRecord> records;  // frame-ascending contribution order
};

// Assembles the per-sequence loss on the tape of a training-mode tracking
// run. Only frames emitted by active tracks contribute: annotation-matched
// frames take the annotation target; in semi mode the remaining updated
// frames take the teacher posterior matched to the same detection; anything
// else is counted as uncovered.
SequenceLoss sequence_loss_tape(
    nn::Tape& tape, const TrackResult& student,
    const std::vector<std::vector<TapeStepRecord>>& records,
    const std::vector<std::vector<AnnotationBox>>& annotations,
    const TrackResult& teacher, const MotionModel& model, TrainMode mode,
    const LossConfig& config, double annotation_gate = 2.0);

struct TrainerConfig {
  TrainMode mode = TrainMode::kSemi;
  TrackerConfig tracker;  // shared by the student and the teacher
  int epochs = 1;         // optimizer steps = epochs * sequence count
  double learning_rate = 1e-3;
  double min_learning_rate = 0.0;  // cosine annealing floor
  double weight_decay = 1e-5;
  double clip_norm = 10.0;
  LossConfig loss;
  double annotation_gate = 2.0;
  int validation_interval = 0;  // steps between tracking probes; 0 = off
  EvalConfig eval;
  unsigned long seed = 1;  // parameter initialization
  int max_restores = 3;    // divergence guard budget
};

struct TrainLogEntry {
  int step = 0;  // 1-based optimizer step
  double lr = 0.0;
  double loss = 0.0;
  double annotation_term = 0.0;
  double pseudo_term = 0.0;
  double coverage = 0.0;  // annotation records / active-track frames
  int uncovered = 0;
  bool stepped = false;   // optimizer update applied
  bool restored = false;  // divergence guard fired on this step
  bool validated = false;
  double val_amota = 0.0;  // meaningful only when validated
};

struct TrainResult {
  std::vector<TrainLogEntry> log;
  int restores = 0;
  bool aborted = false;
};

// Throws std::invalid_argument naming the offending field; covers the nested
// tracker and eval configs too.
void validate(const TrainerConfig& config);

// Mean aggregate score of value-mode gain-network tracking over scenarios.
double validation_amota(const GainNetwork& net,
                        const std::vector<Scenario>& scenarios,
                        const TrackerConfig& tracker, const EvalConfig& eval);

// Initializes `net` from config.seed, then runs one optimizer step per
// sequence visit: forward the whole sequence on a tape, backpropagate once,
// AdamW with cosine-annealed lr. A non-finite loss restores the last good
// parameters and halves the lr from then on; training aborts after
// config.max_restores restores. Validation uses `validation` when given,
// otherwise the training sequences.
TrainResult train(GainNetwork& net, const std::vector<Scenario>& sequences,
                  const TrainerConfig& config,
                  const std::vector<Scenario>* validation = nullptr);

}  // namespace mot
