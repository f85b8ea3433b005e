#include "mot/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "mot/angles.hpp"
#include "mot/nn/tape.hpp"

namespace mot {
namespace {

constexpr int kHeadingIndex = 6;  // observable layout (x,y,z,w,l,h,yaw)

double residual_term(const Eigen::VectorXd& estimate,
                     const Eigen::VectorXd& target, const LossConfig& config) {
  double total = 0.0;
  for (int i = 0; i < estimate.size(); ++i) {
    const double r = i == kHeadingIndex
                         ? angle_diff(estimate(i), target(i))
                         : estimate(i) - target(i);
    if (!config.huber) {
      total += r * r;
    } else {
      const double a = std::abs(r);
      const double d = config.huber_delta;
      total += a <= d ? 0.5 * r * r : d * (a - 0.5 * d);
    }
  }
  return total;
}

}  // namespace

std::string to_string(TrainMode mode) {
  return mode == TrainMode::kSupervised ? "supervised" : "semi";
}

TrainMode train_mode_from_string(const std::string& name) {
  if (name == "supervised") return TrainMode::kSupervised;
  if (name == "semi") return TrainMode::kSemi;
  throw std::invalid_argument("unknown train mode: " + name);
}

std::vector<int> associate_annotations(
    const std::vector<TrackView>& tracks,
    const std::vector<AnnotationBox>& annotations, double gate) {
  struct Candidate {
    double distance;
    int track_index;
    int annotation_index;
  };
  std::vector<Candidate> candidates;
  for (int t = 0; t < static_cast<int>(tracks.size()); ++t) {
    for (int a = 0; a < static_cast<int>(annotations.size()); ++a) {
      if (tracks[t].class_id != annotations[a].class_id) continue;
      const double d = (tracks[t].predicted.center.head<2>() -
                        annotations[a].box.center.head<2>())
                           .norm();
      if (d <= gate) candidates.push_back({d, t, a});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& x, const Candidate& y) {
              if (x.distance != y.distance) return x.distance < y.distance;
              if (x.track_index != y.track_index)
                return x.track_index < y.track_index;
              return x.annotation_index < y.annotation_index;
            });

  std::vector<int> matched(tracks.size(), -1);
  std::vector<char> annotation_used(annotations.size(), 0);
  for (const Candidate& c : candidates) {
    if (matched[c.track_index] >= 0 || annotation_used[c.annotation_index])
      continue;
    matched[c.track_index] = c.annotation_index;
    annotation_used[c.annotation_index] = 1;
  }
  return matched;
}

double supervised_loss(const std::vector<Eigen::VectorXd>& estimates,
                       const std::vector<Eigen::VectorXd>& targets,
                       const LossConfig& config) {
  if (estimates.size() != targets.size())
    throw std::invalid_argument("supervised_loss: length mismatch");
  double total = 0.0;
  for (size_t i = 0; i < estimates.size(); ++i)
    total += residual_term(estimates[i], targets[i], config);
  return total;
}

double semi_supervised_loss(const std::vector<SupervisionRecord>& records,
                            const std::vector<Eigen::VectorXd>& estimates,
                            const LossConfig& config) {
  if (records.size() != estimates.size())
    throw std::invalid_argument("semi_supervised_loss: length mismatch");
  double annotation = 0.0, pseudo = 0.0;
  for (size_t i = 0; i < records.size(); ++i) {
    const double term = residual_term(estimates[i], records[i].target, config);
    if (records[i].source == SupervisionSource::kAnnotation)
      annotation += term;
    else
      pseudo += term;
  }
  return annotation + config.pseudo_label_weight * pseudo;
}

Eigen::MatrixXd gain_gradient_closed_form(
    const Eigen::MatrixXd& gain, const Eigen::VectorXd& innovation,
    const Eigen::VectorXd& state_residual) {
  return 2.0 * (gain * innovation - state_residual) * innovation.transpose();
}

std::vector<std::vector<AnnotationBox>> annotated_boxes(
    const Scenario& scenario) {
  std::vector<std::vector<AnnotationBox>> out(scenario.frames.size());
  for (size_t f = 0; f < scenario.frames.size(); ++f) {
    const ScenarioFrame& frame = scenario.frames[f];
    for (size_t i = 0; i < frame.ground_truth.size(); ++i)
      if (frame.annotated[i]) out[f].push_back(frame.ground_truth[i]);
  }
  return out;
}

SequenceLoss sequence_loss_tape(
    nn::Tape& tape, const TrackResult& student,
    const std::vector<std::vector<TapeStepRecord>>& records,
    const std::vector<std::vector<AnnotationBox>>& annotations,
    const TrackResult& teacher, const MotionModel& model, TrainMode mode,
    const LossConfig& config, double annotation_gate) {
  SequenceLoss loss;

  // Teacher posterior per (frame, detection); association gives a detection
  // to at most one track per frame, so the key is unique.
  std::map<std::pair<int, int>, Eigen::VectorXd> teacher_obs;
  for (const Trajectory& track : teacher.tracks) {
    for (const TrackOutputBox& entry : track.history) {
      if (entry.detection_index < 0) continue;
      teacher_obs[{entry.frame_index, entry.detection_index}] =
          observation_from_box(entry.box);
    }
  }

  // Active-track emissions grouped by frame, with their tape posteriors.
  struct Anchor {
    int track_index;
    const TrackOutputBox* entry;
    nn::Tape::Id posterior;
  };
  std::map<int, std::vector<Anchor>> by_frame;
  for (size_t i = 0; i < student.tracks.size(); ++i) {
    std::unordered_map<int, int> record_of;  // frame -> record index
    for (size_t r = 0; r < records[i].size(); ++r)
      record_of[records[i][r].frame_index] = static_cast<int>(r);
    for (const TrackOutputBox& entry : student.tracks[i].history) {
      auto it = record_of.find(entry.frame_index);
      if (it == record_of.end()) {
        // Birth-frame emission: the posterior is the raw detection, with no
        // learnable path behind it.
        ++loss.uncovered;
        continue;
      }
      by_frame[entry.frame_index].push_back(
          {static_cast<int>(i), &entry, records[i][it->second].posterior});
    }
  }

  nn::Tape::Id annotation_node = -1;
  nn::Tape::Id pseudo_node = -1;
  for (const auto& [frame, anchors] : by_frame) {
    std::vector<TrackView> views;
    views.reserve(anchors.size());
    for (const Anchor& a : anchors) {
      views.push_back({student.tracks[a.track_index].id,
                       student.tracks[a.track_index].class_id, a.entry->box});
    }
    static const std::vector<AnnotationBox> kNoAnnotations;
    const std::vector<AnnotationBox>& frame_annotations =
        frame >= 0 && frame < static_cast<int>(annotations.size())
            ? annotations[frame]
            : kNoAnnotations;
    const std::vector<int> matched =
        associate_annotations(views, frame_annotations, annotation_gate);

    for (size_t k = 0; k < anchors.size(); ++k) {
      const Anchor& anchor = anchors[k];
      Eigen::VectorXd target;
      SupervisionSource source = SupervisionSource::kAnnotation;
      if (matched[k] >= 0) {
        target = observation_from_box(frame_annotations[matched[k]].box);
      } else if (mode == TrainMode::kSemi) {
        auto it = teacher_obs.find({frame, anchor.entry->detection_index});
        if (anchor.entry->detection_index >= 0 && it != teacher_obs.end()) {
          target = it->second;
          source = SupervisionSource::kPseudoLabel;
        }
      }
      if (target.size() == 0) {
        ++loss.uncovered;
        continue;
      }

      const nn::Tape::Id estimate = tape.observe(anchor.posterior, model);
      const nn::Tape::Id residual = tape.wrap_angles(
          tape.sub(estimate, tape.input(target)), model.obs_angle_indices());
      const nn::Tape::Id term =
          config.huber ? tape.huber(residual, config.huber_delta)
                       : tape.sum_sq(residual);
      if (source == SupervisionSource::kAnnotation) {
        annotation_node =
            annotation_node < 0 ? term : tape.add(annotation_node, term);
        ++loss.annotation_count;
      } else {
        pseudo_node = pseudo_node < 0 ? term : tape.add(pseudo_node, term);
        ++loss.pseudo_count;
      }
      loss.records.push_back({student.tracks[anchor.track_index].id, frame,
                              target, source});
    }
  }

  if (annotation_node >= 0) loss.annotation_term = tape.value(annotation_node)(0);
  if (pseudo_node >= 0) {
    loss.pseudo_term =
        config.pseudo_label_weight * tape.value(pseudo_node)(0);
    pseudo_node = tape.scale(pseudo_node, config.pseudo_label_weight);
  }

  if (annotation_node >= 0 && pseudo_node >= 0)
    loss.node = tape.add(annotation_node, pseudo_node);
  else if (annotation_node >= 0)
    loss.node = annotation_node;
  else if (pseudo_node >= 0)
    loss.node = pseudo_node;
  if (loss.node >= 0) loss.value = tape.value(loss.node)(0);
  return loss;
}

double validation_amota(const GainNetwork& net,
                        const std::vector<Scenario>& scenarios,
                        const TrackerConfig& tracker, const EvalConfig& eval) {
  if (scenarios.empty()) return 0.0;
  double total = 0.0;
  for (const Scenario& scenario : scenarios) {
    std::vector<std::vector<DetectionBox>> frames;
    std::vector<double> timestamps;
    for (const ScenarioFrame& frame : scenario.frames) {
      frames.push_back(frame.detections);
      timestamps.push_back(frame.timestamp);
    }
    const TrackResult result =
        track_sequence(frames, timestamps, MotionMode::kGkf, tracker, &net);
    total += evaluate(eval_boxes_from_tracks(result),
                      eval_boxes_from_scenario(scenario), eval)
                 .amota;
  }
  return total / static_cast<double>(scenarios.size());
}

void validate(const TrainerConfig& config) {
  if (config.epochs < 0)
    throw std::invalid_argument("invalid trainer config field: epochs");
  if (!(config.learning_rate > 0.0))
    throw std::invalid_argument("invalid trainer config field: learning_rate");
  if (config.min_learning_rate < 0.0 ||
      config.min_learning_rate > config.learning_rate)
    throw std::invalid_argument(
        "invalid trainer config field: min_learning_rate");
  if (config.weight_decay < 0.0)
    throw std::invalid_argument("invalid trainer config field: weight_decay");
  if (config.clip_norm < 0.0)
    throw std::invalid_argument("invalid trainer config field: clip_norm");
  if (!(config.loss.huber_delta > 0.0))
    throw std::invalid_argument("invalid trainer config field: huber_delta");
  if (config.loss.pseudo_label_weight < 0.0)
    throw std::invalid_argument(
        "invalid trainer config field: pseudo_label_weight");
  if (!(config.annotation_gate > 0.0))
    throw std::invalid_argument(
        "invalid trainer config field: annotation_gate");
  if (config.validation_interval < 0)
    throw std::invalid_argument(
        "invalid trainer config field: validation_interval");
  if (config.max_restores < 0)
    throw std::invalid_argument("invalid trainer config field: max_restores");
  validate(config.tracker);
  validate(config.eval);
}

TrainResult train(GainNetwork& net, const std::vector<Scenario>& sequences,
                  const TrainerConfig& config,
                  const std::vector<Scenario>* validation) {
  if (sequences.empty())
    throw std::invalid_argument("train: at least one sequence required");
  validate(config);

  const MotionModel model(config.tracker.motion, config.tracker.bicycle_beta);
  if (net.state_dim() != model.state_dim() || net.obs_dim() != model.obs_dim())
    throw std::invalid_argument(
        "train: network dimensions do not match the motion model");

  net.init_params(config.seed);

  // Per-sequence inputs and the teacher are fixed for the whole run; the
  // teacher never sees the network, so it is computed once up front.
  struct SequenceData {
    std::vector<std::vector<DetectionBox>> frames;
    std::vector<double> timestamps;
    std::vector<std::vector<AnnotationBox>> annotations;
    TrackResult teacher;
  };
  std::vector<SequenceData> data;
  data.reserve(sequences.size());
  for (const Scenario& scenario : sequences) {
    SequenceData sd;
    for (const ScenarioFrame& frame : scenario.frames) {
      sd.frames.push_back(frame.detections);
      sd.timestamps.push_back(frame.timestamp);
    }
    sd.annotations = annotated_boxes(scenario);
    sd.teacher = track_sequence(sd.frames, sd.timestamps, MotionMode::kEkf,
                                config.tracker);
    data.push_back(std::move(sd));
  }

  const std::vector<Scenario>& val_set =
      validation != nullptr && !validation->empty() ? *validation : sequences;

  TrainResult result;
  nn::AdamW optimizer(net.params(), {config.weight_decay});
  nn::GradStore grads(net.params());

  nn::ParamStore good_params = net.params();
  std::vector<Eigen::MatrixXd> good_m = optimizer.first_moments();
  std::vector<Eigen::MatrixXd> good_v = optimizer.second_moments();
  long good_t = optimizer.steps_taken();

  const long total_steps =
      static_cast<long>(config.epochs) * static_cast<long>(data.size());
  double lr_multiplier = 1.0;

  for (long step = 0; step < total_steps; ++step) {
    const SequenceData& sd = data[step % data.size()];

    nn::Tape tape(net.params());
    std::vector<std::vector<TapeStepRecord>> records;
    const TrackResult student = track_sequence_tape(
        sd.frames, sd.timestamps, config.tracker, net, tape, &records);
    const SequenceLoss loss = sequence_loss_tape(
        tape, student, records, sd.annotations, sd.teacher, model, config.mode,
        config.loss, config.annotation_gate);

    TrainLogEntry entry;
    entry.step = static_cast<int>(step) + 1;
    entry.lr = lr_multiplier * nn::cosine_lr(step, total_steps,
                                             config.learning_rate,
                                             config.min_learning_rate);
    entry.loss = loss.value;
    entry.annotation_term = loss.annotation_term;
    entry.pseudo_term = loss.pseudo_term;
    entry.uncovered = loss.uncovered;
    const int supervised_frames =
        loss.annotation_count + loss.pseudo_count + loss.uncovered;
    entry.coverage = supervised_frames > 0
                         ? static_cast<double>(loss.annotation_count) /
                               static_cast<double>(supervised_frames)
                         : 0.0;

    if (loss.node >= 0 && !std::isfinite(loss.value)) {
      net.params() = good_params;
      optimizer.first_moments() = good_m;
      optimizer.second_moments() = good_v;
      optimizer.set_steps_taken(good_t);
      lr_multiplier *= 0.5;
      entry.restored = true;
      result.log.push_back(entry);
      if (++result.restores >= config.max_restores) {
        result.aborted = true;
        break;
      }
      continue;
    }

    if (loss.node >= 0) {
      grads.zero();
      tape.backward(loss.node, grads, config.clip_norm);
      entry.stepped = optimizer.step(net.params(), grads, entry.lr);
    }
    if (entry.stepped) {
      good_params = net.params();
      good_m = optimizer.first_moments();
      good_v = optimizer.second_moments();
      good_t = optimizer.steps_taken();
    }

    if (config.validation_interval > 0 &&
        (step + 1) % config.validation_interval == 0) {
      entry.validated = true;
      entry.val_amota =
          validation_amota(net, val_set, config.tracker, config.eval);
    }
    result.log.push_back(entry);
  }
  return result;
}

}  // namespace mot
