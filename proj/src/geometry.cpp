#include "mot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mot {

double BevPolygon::area() const {
  const auto& v = vertices;
  if (v.size() < 3) return 0.0;
  double twice = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * twice;
}

BevPolygon bev_footprint(const Box3D& box) {
  const double hl = 0.5 * box.length();  // along heading
  const double hw = 0.5 * box.width();   // lateral
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const Eigen::Vector2d o(box.center.x(), box.center.y());
  auto corner = [&](double x, double y) {
    return Eigen::Vector2d(o.x() + c * x - s * y, o.y() + s * x + c * y);
  };
  BevPolygon poly;
  poly.vertices = {corner(hl, hw), corner(-hl, hw), corner(-hl, -hw), corner(hl, -hw)};
  return poly;
}

namespace {

// Signed distance of p left of the directed edge a->b (positive inside a CCW
// polygon).
double edge_side(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                 const Eigen::Vector2d& p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

Eigen::Vector2d line_intersect(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                               const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
  const Eigen::Vector2d r = b - a;
  const Eigen::Vector2d s = q - p;
  const double denom = r.x() * s.y() - r.y() * s.x();
  const double t = ((p - a).x() * s.y() - (p - a).y() * s.x()) / denom;
  return a + t * r;
}

}  // namespace

BevPolygon convex_intersection(const BevPolygon& subject, const BevPolygon& clip) {
  std::vector<Eigen::Vector2d> output = subject.vertices;
  const auto& cv = clip.vertices;
  for (size_t i = 0; i < cv.size() && !output.empty(); ++i) {
    const Eigen::Vector2d& a = cv[i];
    const Eigen::Vector2d& b = cv[(i + 1) % cv.size()];
    std::vector<Eigen::Vector2d> input;
    input.swap(output);
    for (size_t j = 0; j < input.size(); ++j) {
      const Eigen::Vector2d& cur = input[j];
      const Eigen::Vector2d& prev = input[(j + input.size() - 1) % input.size()];
      const bool cur_in = edge_side(a, b, cur) >= 0.0;
      const bool prev_in = edge_side(a, b, prev) >= 0.0;
      if (cur_in) {
        if (!prev_in) output.push_back(line_intersect(a, b, prev, cur));
        output.push_back(cur);
      } else if (prev_in) {
        output.push_back(line_intersect(a, b, prev, cur));
      }
    }
  }
  BevPolygon result;
  result.vertices = std::move(output);
  return result;
}

BevPolygon convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const auto& a, const auto& b) {
                          return a.x() == b.x() && a.y() == b.y();
                        }),
            pts.end());
  const int n = static_cast<int>(pts.size());
  if (n < 3) {
    BevPolygon degenerate;
    degenerate.vertices = pts;
    return degenerate;
  }
  std::vector<Eigen::Vector2d> hull(2 * n);
  int k = 0;
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a,
                  const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (int i = n - 2, lower = k + 1; i >= 0; --i) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  BevPolygon result;
  result.vertices = std::move(hull);
  return result;
}

double bev_intersection_area(const Box3D& a, const Box3D& b) {
  const BevPolygon inter = convex_intersection(bev_footprint(a), bev_footprint(b));
  return std::max(0.0, inter.area());
}

double iou_bev(const Box3D& a, const Box3D& b) {
  const double inter = bev_intersection_area(a, b);
  const double area_a = a.width() * a.length();
  const double area_b = b.width() * b.length();
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

double vertical_overlap(const Box3D& a, const Box3D& b) {
  return std::max(0.0, std::min(a.top(), b.top()) - std::max(a.bottom(), b.bottom()));
}

double footprint_hull_area(const Box3D& a, const Box3D& b) {
  std::vector<Eigen::Vector2d> pts;
  for (const auto& v : bev_footprint(a).vertices) pts.push_back(v);
  for (const auto& v : bev_footprint(b).vertices) pts.push_back(v);
  return convex_hull(std::move(pts)).area();
}

}  // namespace

double iou_3d(const Box3D& a, const Box3D& b) {
  const double inter = bev_intersection_area(a, b) * vertical_overlap(a, b);
  const double uni = a.volume() + b.volume() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double giou3d(const Box3D& a, const Box3D& b) {
  const double inter = bev_intersection_area(a, b) * vertical_overlap(a, b);
  const double uni = a.volume() + b.volume() - inter;
  const double span = std::max(a.top(), b.top()) - std::min(a.bottom(), b.bottom());
  const double hull = footprint_hull_area(a, b) * span;
  return inter / uni + uni / hull - 1.0;
}

double giou_bev(const Box3D& a, const Box3D& b) {
  const double inter = bev_intersection_area(a, b);
  const double area_a = a.width() * a.length();
  const double area_b = b.width() * b.length();
  const double uni = area_a + area_b - inter;
  const double hull = footprint_hull_area(a, b);
  return inter / uni + uni / hull - 1.0;
}

std::vector<int> nms(const std::vector<std::pair<Box3D, double>>& boxes,
                     double overlap_threshold) {
  std::vector<int> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return boxes[i].second > boxes[j].second;
  });
  std::vector<int> kept;
  for (int idx : order) {
    bool suppressed = false;
    for (int k : kept) {
      if (iou_bev(boxes[idx].first, boxes[k].first) > overlap_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(idx);
  }
  return kept;
}

}  // namespace mot
