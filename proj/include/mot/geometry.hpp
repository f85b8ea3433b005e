#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mot/angles.hpp"

namespace mot {

/// Rotated 3D bounding box. size = (w, l, h): w lateral, l along the heading
/// direction, h vertical. yaw is the heading about the vertical axis and is
/// stored wrapped to [-pi, pi).
struct Box3D {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d size = Eigen::Vector3d::Ones();  // (w, l, h), all > 0
  double yaw = 0.0;

  Box3D() = default;
  Box3D(const Eigen::Vector3d& c, const Eigen::Vector3d& s, double heading)
      : center(c), size(s), yaw(wrap_angle(heading)) {}

  double width() const { return size.x(); }
  double length() const { return size.y(); }
  double height() const { return size.z(); }
  double volume() const { return size.prod(); }
  double bottom() const { return center.z() - 0.5 * size.z(); }
  double top() const { return center.z() + 0.5 * size.z(); }

  bool valid() const {
    return size.minCoeff() > 0.0 && center.allFinite() && std::isfinite(yaw);
  }
};

/// Simple convex polygon in the ground plane, vertices counter-clockwise.
struct BevPolygon {
  std::vector<Eigen::Vector2d> vertices;

  /// Signed area by the shoelace formula (positive for CCW order).
  double area() const;
};

/// Ground-plane footprint of a box: the 4-vertex rectangle rotated by yaw,
/// CCW order. Length runs along the heading axis.
BevPolygon bev_footprint(const Box3D& box);

/// Intersection of two convex polygons (Sutherland-Hodgman clip). Result may
/// be empty when the polygons are disjoint or touch in a measure-zero set.
BevPolygon convex_intersection(const BevPolygon& subject, const BevPolygon& clip);

/// CCW convex hull of a point set (monotone chain).
BevPolygon convex_hull(std::vector<Eigen::Vector2d> points);

/// Ground-plane intersection area of two box footprints.
double bev_intersection_area(const Box3D& a, const Box3D& b);

/// Plain intersection-over-union of the footprints.
double iou_bev(const Box3D& a, const Box3D& b);

/// Intersection-over-union of the volumes (BEV overlap times vertical overlap).
double iou_3d(const Box3D& a, const Box3D& b);

/// Generalized IoU over volumes: IoU + union/hull - 1, in [-1, 1]. The hull is
/// the convex hull of both footprints times the combined vertical span.
double giou3d(const Box3D& a, const Box3D& b);

/// Same construction restricted to footprint areas.
double giou_bev(const Box3D& a, const Box3D& b);

/// Greedy non-maximum suppression by descending score using BEV IoU. A box is
/// dropped when its BEV IoU with an already retained box exceeds
/// overlap_threshold. Score ties break by input order (lower index wins).
/// Returns retained indices in descending-score order.
std::vector<int> nms(const std::vector<std::pair<Box3D, double>>& boxes,
                     double overlap_threshold);

}  // namespace mot
