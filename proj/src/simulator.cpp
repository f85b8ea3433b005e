#include "mot/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mot {

namespace {

constexpr double kMinSize = 0.05;
constexpr double kMinScore = 0.05;

void require(bool ok, const char* field) {
  if (!ok) {
    throw std::invalid_argument(std::string("invalid scenario config field: ") +
                                field);
  }
}

// One scalar noise draw at the given scale. The mixture inflation factor is
// decided once per detection, not per component.
double draw_noise(NoiseSpec::Mode mode, double scale, double dof,
                  double inflation, Rng& rng) {
  switch (mode) {
    case NoiseSpec::Mode::kGaussian:
      return rng.normal(0.0, scale);
    case NoiseSpec::Mode::kStudentT:
      return scale * rng.student_t(dof);
    case NoiseSpec::Mode::kMixture:
      return rng.normal(0.0, scale * inflation);
  }
  return 0.0;
}

}  // namespace

NoiseSpec::Mode noise_mode_from_string(const std::string& name) {
  if (name == "gaussian") return NoiseSpec::Mode::kGaussian;
  if (name == "student_t") return NoiseSpec::Mode::kStudentT;
  if (name == "mixture") return NoiseSpec::Mode::kMixture;
  throw std::invalid_argument("unknown noise mode: " + name);
}

std::string to_string(NoiseSpec::Mode mode) {
  switch (mode) {
    case NoiseSpec::Mode::kGaussian: return "gaussian";
    case NoiseSpec::Mode::kStudentT: return "student_t";
    case NoiseSpec::Mode::kMixture: return "mixture";
  }
  return "gaussian";
}

void validate(const NoiseSpec& spec) {
  require(spec.position_scale >= 0.0, "noise.position_scale");
  require(spec.size_scale >= 0.0, "noise.size_scale");
  require(spec.heading_scale >= 0.0, "noise.heading_scale");
  require(spec.student_t_dof > 2.0, "noise.student_t_dof");
  require(spec.outlier_probability >= 0.0 && spec.outlier_probability <= 1.0,
          "noise.outlier_probability");
  require(spec.outlier_scale > 0.0, "noise.outlier_scale");
  require(spec.drop_probability >= 0.0 && spec.drop_probability <= 1.0,
          "noise.drop_probability");
  require(spec.false_positive_rate >= 0.0, "noise.false_positive_rate");
  require(spec.score_jitter >= 0.0, "noise.score_jitter");
}

void validate(const ScenarioConfig& config) {
  require(config.frame_count >= 1, "frame_count");
  require(config.dt > 0.0, "dt");
  require(config.annotation_coverage >= 0.0 && config.annotation_coverage <= 1.0,
          "annotation_coverage");
  require(config.bicycle_beta >= 0.0 && config.bicycle_beta <= 1.0,
          "bicycle_beta");
  validate(config.noise);
  for (size_t i = 0; i < config.objects.size(); ++i) {
    const MotionModel model(config.objects[i].kind, config.bicycle_beta);
    require(config.objects[i].initial_state.size() == model.state_dim(),
            "objects.initial_state");
    require(config.objects[i].class_id >= 0, "objects.class_id");
  }
}

DetectionBox perturb_detection(const Box3D& gt, const Eigen::Vector2d& velocity,
                               int class_id, int frame_index, double timestamp,
                               const NoiseSpec& spec, Rng& rng) {
  double inflation = 1.0;
  if (spec.mode == NoiseSpec::Mode::kMixture) {
    inflation = rng.bernoulli(spec.outlier_probability) ? spec.outlier_scale
                                                         : 1.0;
  }

  Eigen::Matrix<double, 7, 1> scales;
  scales << spec.position_scale, spec.position_scale, spec.position_scale,
      spec.size_scale, spec.size_scale, spec.size_scale, spec.heading_scale;
  Eigen::Matrix<double, 7, 1> draws;
  for (int i = 0; i < 7; ++i) {
    draws(i) =
        draw_noise(spec.mode, scales(i), spec.student_t_dof, inflation, rng);
  }

  DetectionBox det;
  det.box = Box3D(gt.center + draws.head<3>(),
                  (gt.size + draws.segment<3>(3)).cwiseMax(kMinSize),
                  gt.yaw + draws(6));
  det.velocity = velocity;
  det.class_id = class_id;
  det.frame_index = frame_index;
  det.timestamp = timestamp;

  // Score falls with the realized noise magnitude relative to a 3-sigma-style
  // envelope; an exact detection scores the model maximum of 1.
  const double scale_norm = scales.norm();
  double score = scale_norm > 0.0
                     ? std::clamp(1.0 - draws.norm() / (3.0 * scale_norm),
                                  kMinScore, 1.0)
                     : 1.0;
  score = std::min(1.0, score * rng.uniform(1.0, 1.0 + spec.score_jitter));
  det.score = std::max(kMinScore, score);
  return det;
}

Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  validate(config);
  Scenario scenario;
  scenario.seed = seed;
  scenario.config = config;
  Rng rng(seed);

  // Exact ground-truth state rollout per object.
  std::vector<MotionModel> models;
  std::vector<Eigen::VectorXd> states;
  models.reserve(config.objects.size());
  for (const ObjectSpec& obj : config.objects) {
    models.emplace_back(obj.kind, config.bicycle_beta);
    states.push_back(obj.initial_state);
  }

  scenario.frames.resize(config.frame_count);
  for (int f = 0; f < config.frame_count; ++f) {
    ScenarioFrame& frame = scenario.frames[f];
    frame.frame_index = f;
    frame.timestamp = config.start_time + f * config.dt;

    for (size_t k = 0; k < config.objects.size(); ++k) {
      if (f > 0) states[k] = models[k].predict_state(states[k], config.dt);
      AnnotationBox gt;
      gt.box = models[k].state_box(states[k]);
      gt.velocity = models[k].state_velocity(states[k]);
      gt.instance_id = static_cast<int>(k);
      gt.class_id = config.objects[k].class_id;
      gt.frame_index = f;
      frame.ground_truth.push_back(gt);

      frame.annotated.push_back(
          rng.bernoulli(config.annotation_coverage) ? 1 : 0);
      const bool dropped = rng.bernoulli(config.noise.drop_probability);
      if (!dropped) {
        frame.detections.push_back(perturb_detection(
            gt.box, gt.velocity, gt.class_id, f, frame.timestamp, config.noise,
            rng));
      }
    }

    // False positives: uniform clutter around the current scene extent.
    double lo_x = -20.0, hi_x = 20.0, lo_y = -20.0, hi_y = 20.0;
    if (!frame.ground_truth.empty()) {
      lo_x = hi_x = frame.ground_truth[0].box.center.x();
      lo_y = hi_y = frame.ground_truth[0].box.center.y();
      for (const AnnotationBox& gt : frame.ground_truth) {
        lo_x = std::min(lo_x, gt.box.center.x());
        hi_x = std::max(hi_x, gt.box.center.x());
        lo_y = std::min(lo_y, gt.box.center.y());
        hi_y = std::max(hi_y, gt.box.center.y());
      }
      lo_x -= 10.0; hi_x += 10.0;
      lo_y -= 10.0; hi_y += 10.0;
    }
    const int n_fp = rng.poisson(config.noise.false_positive_rate);
    for (int i = 0; i < n_fp; ++i) {
      DetectionBox fp;
      fp.box = Box3D(
          Eigen::Vector3d(rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y),
                          rng.uniform(0.5, 1.0)),
          Eigen::Vector3d(rng.uniform(1.5, 2.2), rng.uniform(3.5, 5.0),
                          rng.uniform(1.2, 1.8)),
          rng.uniform(-kPi, kPi));
      fp.velocity = Eigen::Vector2d::Zero();
      fp.score = rng.uniform(0.3, 0.9);
      fp.class_id =
          frame.ground_truth.empty()
              ? 0
              : frame
                    .ground_truth[rng.uniform_int(
                        0, static_cast<int>(frame.ground_truth.size()) - 1)]
                    .class_id;
      fp.frame_index = f;
      fp.timestamp = frame.timestamp;
      frame.detections.push_back(fp);
    }
  }
  return scenario;
}

std::vector<ObjectSpec> preset_objects(const std::string& name) {
  std::vector<ObjectSpec> objects;
  if (name == "crossing") {
    // Two constant-velocity cars whose paths meet at the origin.
    const MotionModel cv(MotionKind::kCV);
    Box3D a(Eigen::Vector3d(-20.0, 0.0, 0.8), Eigen::Vector3d(1.9, 4.5, 1.6),
            0.0);
    Box3D b(Eigen::Vector3d(0.0, -20.0, 0.8), Eigen::Vector3d(1.9, 4.5, 1.6),
            0.5 * kPi);
    objects.push_back({MotionKind::kCV,
                       cv.init_state(a, Eigen::Vector2d(4.0, 0.0)), 0});
    objects.push_back({MotionKind::kCV,
                       cv.init_state(b, Eigen::Vector2d(0.0, 4.0)), 0});
  } else if (name == "convoy") {
    // Three near-parallel lanes with mild accelerations.
    const MotionModel ca(MotionKind::kCA);
    const double lane[3] = {0.0, 3.5, 7.0};
    const double back[3] = {0.0, -8.0, -16.0};
    const double accel[3] = {0.2, 0.0, -0.2};
    for (int i = 0; i < 3; ++i) {
      Box3D box(Eigen::Vector3d(back[i], lane[i], 0.8),
                Eigen::Vector3d(1.9, 4.5, 1.6), 0.0);
      Eigen::VectorXd x = ca.init_state(box, Eigen::Vector2d(8.0, 0.0));
      x(9) = accel[i];  // ax
      objects.push_back({MotionKind::kCA, x, 0});
    }
  } else if (name == "roundabout") {
    // Four cars on a ring, constant turn rate.
    const double radius = 12.0;
    const double omega = 0.15;
    for (int i = 0; i < 4; ++i) {
      const double phi = 0.5 * kPi * i;
      Eigen::VectorXd x(10);  // CTRA layout
      x << radius * std::cos(phi), radius * std::sin(phi), 0.8, 1.9, 4.5, 1.6,
          omega * radius, 0.0, wrap_angle(phi + 0.5 * kPi), omega;
      objects.push_back({MotionKind::kCTRA, x, 0});
    }
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return objects;
}

}  // namespace mot
