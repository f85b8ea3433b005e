#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mot/motion.hpp"
#include "mot/rng.hpp"
#include "mot/types.hpp"

namespace mot {

// Synthetic scenario generator: exact motion-model ground truth plus
// configurably imperfect detections (noise, drops, false positives) and a
// partial annotation mask for semi-supervised training.

struct NoiseSpec {
  enum class Mode { kGaussian, kStudentT, kMixture };
  Mode mode = Mode::kGaussian;

  // Per-component noise scales (meters / radians).
  double position_scale = 0.3;
  double size_scale = 0.05;
  double heading_scale = 0.05;

  double student_t_dof = 3.0;       // mode kStudentT; must exceed 2
  double outlier_probability = 0.1; // mode kMixture
  double outlier_scale = 10.0;      // scale multiplier for outlier draws

  double drop_probability = 0.0;       // per object-frame
  double false_positive_rate = 0.0;    // expected count per frame (Poisson)
  double score_jitter = 0.1;           // multiplicative score jitter span
};

NoiseSpec::Mode noise_mode_from_string(const std::string& name);
std::string to_string(NoiseSpec::Mode mode);

// One simulated actor; the state layout follows its motion kind.
struct ObjectSpec {
  MotionKind kind = MotionKind::kCV;
  Eigen::VectorXd initial_state;
  int class_id = 0;
};

struct ScenarioConfig {
  std::vector<ObjectSpec> objects;
  int frame_count = 40;
  double dt = 0.5;
  double start_time = 0.0;
  NoiseSpec noise;
  double annotation_coverage = 1.0;  // fraction of object-frames labeled
  double bicycle_beta = 0.5;
};

struct ScenarioFrame {
  int frame_index = 0;
  double timestamp = 0.0;
  std::vector<AnnotationBox> ground_truth;
  std::vector<std::uint8_t> annotated;  // aligned with ground_truth
  std::vector<DetectionBox> detections;
};

struct Scenario {
  std::uint64_t seed = 0;
  ScenarioConfig config;  // generator echo, enough to replay ground truth
  std::vector<ScenarioFrame> frames;
};

// Throw std::invalid_argument naming the offending field.
void validate(const NoiseSpec& spec);
void validate(const ScenarioConfig& config);

// Noisy rendering of one ground-truth box. The score falls with the size of
// the realized noise draw (clamped to [0.05, 1]) so that score filtering and
// the confidence lifecycle see a meaningful signal.
DetectionBox perturb_detection(const Box3D& gt, const Eigen::Vector2d& velocity,
                               int class_id, int frame_index, double timestamp,
                               const NoiseSpec& spec, Rng& rng);

// Deterministic in (config, seed). Per frame the draw order is: for each
// object in index order, one annotation-mask draw, one drop draw, then the
// perturbation draws if kept; then the false-positive count and each false
// positive's draws.
Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed);

// Built-in layouts: "crossing" (two CV paths through a shared point),
// "convoy" (three CA objects in near-parallel lanes), "roundabout" (four
// CTRA objects on a ring). Unknown names throw.
std::vector<ObjectSpec> preset_objects(const std::string& name);

}  // namespace mot
