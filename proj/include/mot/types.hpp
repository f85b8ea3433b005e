#pragma once

#include <Eigen/Dense>

#include "mot/geometry.hpp"

namespace mot {

// One detector output. Detections carry no identity; ids exist only on
// trajectories and ground-truth annotations.
struct DetectionBox {
  Box3D box;
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();  // ground-plane, m/s
  double score = 1.0;
  int class_id = 0;
  int frame_index = 0;
  double timestamp = 0.0;
};

// One labeled ground-truth box. (instance_id, frame_index) is unique.
struct AnnotationBox {
  Box3D box;
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
  int instance_id = 0;
  int class_id = 0;
  int frame_index = 0;
};

}  // namespace mot
