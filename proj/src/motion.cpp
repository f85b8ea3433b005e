#include "mot/motion.hpp"

#include <cmath>
#include <stdexcept>

#include "mot/angles.hpp"

namespace mot {

MotionKind motion_kind_from_string(const std::string& name) {
  if (name == "cv") return MotionKind::kCV;
  if (name == "ca") return MotionKind::kCA;
  if (name == "ctra") return MotionKind::kCTRA;
  if (name == "bicycle") return MotionKind::kBicycle;
  throw std::invalid_argument("unknown motion model: " + name);
}

std::string to_string(MotionKind kind) {
  switch (kind) {
    case MotionKind::kCV: return "cv";
    case MotionKind::kCA: return "ca";
    case MotionKind::kCTRA: return "ctra";
    case MotionKind::kBicycle: return "bicycle";
  }
  return "cv";
}

namespace {

// sin(x/2)/(x/2); series below |x| = 1e-3 (truncation there is ~1e-16).
double sinc_half(double x) {
  if (std::abs(x) < 1e-3) {
    const double x2 = x * x;
    return 1.0 - x2 / 24.0 + x2 * x2 / 1920.0;
  }
  return std::sin(0.5 * x) / (0.5 * x);
}

// Derivative of sinc_half: (x cos(x/2) - 2 sin(x/2)) / x^2.
double sinc_half_d(double x) {
  if (std::abs(x) < 1e-3) {
    const double x2 = x * x;
    return -x / 12.0 + x * x2 / 480.0;
  }
  return (x * std::cos(0.5 * x) - 2.0 * std::sin(0.5 * x)) / (x * x);
}

// Second derivative of sinc_half.
double sinc_half_dd(double x) {
  if (std::abs(x) < 5e-2) {
    const double x2 = x * x;
    return -1.0 / 12.0 + x2 / 160.0 - x2 * x2 / 10752.0;
  }
  const double s = std::sin(0.5 * x), c = std::cos(0.5 * x);
  return -s / (2.0 * x) - 2.0 * c / (x * x) + 4.0 * s / (x * x * x);
}

// Displacement of a constant-turn-rate-and-acceleration arc over dt, with
// partials with respect to (v, a, theta, omega). Written with half-angle
// products so small turn rates cost no precision:
//   dx = v dt cos(tm) C + a dt^2 (sin(tm) G + cos(tm) C / 2)
//   dy = v dt sin(tm) C + a dt^2 (-cos(tm) G + sin(tm) C / 2)
// where tm = theta + w dt / 2, C = sinc_half(w dt), G = C'(w dt).
struct ArcDelta {
  double dx = 0, dy = 0;
  double dx_v = 0, dx_a = 0, dx_t = 0, dx_w = 0;
  double dy_v = 0, dy_a = 0, dy_t = 0, dy_w = 0;
};

ArcDelta ctra_arc(double v, double a, double th, double w, double dt) {
  const double dth = w * dt;
  const double cm = std::cos(th + 0.5 * dth);
  const double sm = std::sin(th + 0.5 * dth);
  const double C = sinc_half(dth);
  const double G = sinc_half_d(dth);
  const double Gd = sinc_half_dd(dth);
  const double vt = v * dt;
  const double at2 = a * dt * dt;

  ArcDelta d;
  d.dx = vt * cm * C + at2 * (sm * G + 0.5 * cm * C);
  d.dy = vt * sm * C + at2 * (-cm * G + 0.5 * sm * C);
  d.dx_v = dt * cm * C;
  d.dy_v = dt * sm * C;
  d.dx_a = dt * dt * (sm * G + 0.5 * cm * C);
  d.dy_a = dt * dt * (-cm * G + 0.5 * sm * C);
  d.dx_t = -d.dy;
  d.dy_t = d.dx;
  // d(cm)/dw = -sm dt/2, d(sm)/dw = cm dt/2, dC/dw = G dt, dG/dw = Gd dt.
  d.dx_w = vt * (-sm * 0.5 * dt * C + cm * G * dt) +
           at2 * (cm * 0.5 * dt * G + sm * Gd * dt +
                  0.5 * (-sm * 0.5 * dt * C + cm * G * dt));
  d.dy_w = vt * (cm * 0.5 * dt * C + sm * G * dt) +
           at2 * (sm * 0.5 * dt * G - cm * Gd * dt +
                  0.5 * (cm * 0.5 * dt * C + sm * G * dt));
  return d;
}

}  // namespace

MotionModel::MotionModel(MotionKind kind, double bicycle_beta)
    : kind_(kind), beta_(bicycle_beta) {}

int MotionModel::state_dim() const {
  switch (kind_) {
    case MotionKind::kCV: return 9;
    case MotionKind::kCA: return 11;
    case MotionKind::kCTRA:
    case MotionKind::kBicycle: return 10;
  }
  return 0;
}

std::vector<int> MotionModel::state_angle_indices() const {
  switch (kind_) {
    case MotionKind::kCV:
    case MotionKind::kCA: return {6};
    case MotionKind::kCTRA:
    case MotionKind::kBicycle: return {8};
  }
  return {};
}

Eigen::VectorXd MotionModel::predict_state(const Eigen::VectorXd& x, double dt) const {
  Eigen::VectorXd xn = x;
  switch (kind_) {
    case MotionKind::kCV:
      xn(0) += x(7) * dt;
      xn(1) += x(8) * dt;
      xn(6) = wrap_angle(xn(6));
      break;
    case MotionKind::kCA:
      xn(0) += x(7) * dt + 0.5 * x(9) * dt * dt;
      xn(1) += x(8) * dt + 0.5 * x(10) * dt * dt;
      xn(7) += x(9) * dt;
      xn(8) += x(10) * dt;
      xn(6) = wrap_angle(xn(6));
      break;
    case MotionKind::kCTRA:
    case MotionKind::kBicycle: {
      const ArcDelta d = ctra_arc(x(6), x(7), x(8), x(9), dt);
      xn(0) += d.dx;
      xn(1) += d.dy;
      xn(6) += x(7) * dt;
      xn(8) = wrap_angle(x(8) + x(9) * dt);
      break;
    }
  }
  return xn;
}

Eigen::VectorXd MotionModel::observe(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(kObsDim);
  switch (kind_) {
    case MotionKind::kCV:
    case MotionKind::kCA:
      y = x.head(kObsDim);
      break;
    case MotionKind::kCTRA:
      y << x(0), x(1), x(2), x(3), x(4), x(5), x(8);
      break;
    case MotionKind::kBicycle: {
      const double off = 0.5 * beta_ * x(4);
      const double th = x(8);
      y << x(0) + off * std::cos(th), x(1) + off * std::sin(th), x(2), x(3),
          x(4), x(5), th;
      break;
    }
  }
  return y;
}

Eigen::MatrixXd MotionModel::jacobian_f(const Eigen::VectorXd& x, double dt) const {
  const int m = state_dim();
  Eigen::MatrixXd F = Eigen::MatrixXd::Identity(m, m);
  switch (kind_) {
    case MotionKind::kCV:
      F(0, 7) = dt;
      F(1, 8) = dt;
      break;
    case MotionKind::kCA:
      F(0, 7) = dt;
      F(0, 9) = 0.5 * dt * dt;
      F(1, 8) = dt;
      F(1, 10) = 0.5 * dt * dt;
      F(7, 9) = dt;
      F(8, 10) = dt;
      break;
    case MotionKind::kCTRA:
    case MotionKind::kBicycle: {
      const ArcDelta d = ctra_arc(x(6), x(7), x(8), x(9), dt);
      F(0, 6) = d.dx_v;
      F(0, 7) = d.dx_a;
      F(0, 8) = d.dx_t;
      F(0, 9) = d.dx_w;
      F(1, 6) = d.dy_v;
      F(1, 7) = d.dy_a;
      F(1, 8) = d.dy_t;
      F(1, 9) = d.dy_w;
      F(6, 7) = dt;
      F(8, 9) = dt;
      break;
    }
  }
  return F;
}

Eigen::MatrixXd MotionModel::jacobian_h(const Eigen::VectorXd& x) const {
  const int m = state_dim();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(kObsDim, m);
  switch (kind_) {
    case MotionKind::kCV:
    case MotionKind::kCA:
      H.block(0, 0, kObsDim, kObsDim).setIdentity();
      break;
    case MotionKind::kCTRA:
      for (int i = 0; i < 6; ++i) H(i, i) = 1.0;
      H(6, 8) = 1.0;
      break;
    case MotionKind::kBicycle: {
      for (int i = 0; i < 6; ++i) H(i, i) = 1.0;
      H(6, 8) = 1.0;
      const double off = 0.5 * beta_ * x(4);
      const double th = x(8);
      H(0, 4) = 0.5 * beta_ * std::cos(th);
      H(0, 8) = -off * std::sin(th);
      H(1, 4) = 0.5 * beta_ * std::sin(th);
      H(1, 8) = off * std::cos(th);
      break;
    }
  }
  return H;
}

Eigen::VectorXd MotionModel::init_state(const Box3D& box,
                                        const Eigen::Vector2d& velocity) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(state_dim());
  x.head(3) = box.center;
  x.segment(3, 3) = box.size;
  switch (kind_) {
    case MotionKind::kCV:
    case MotionKind::kCA:
      x(6) = box.yaw;
      x(7) = velocity.x();
      x(8) = velocity.y();
      break;
    case MotionKind::kCTRA:
    case MotionKind::kBicycle: {
      const double c = std::cos(box.yaw), s = std::sin(box.yaw);
      x(6) = velocity.x() * c + velocity.y() * s;  // speed along heading
      x(8) = box.yaw;
      if (kind_ == MotionKind::kBicycle) {
        const double off = 0.5 * beta_ * box.length();
        x(0) -= off * c;
        x(1) -= off * s;
      }
      break;
    }
  }
  return x;
}

Box3D MotionModel::state_box(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd y = observe(x);
  // Filtered sizes can brush zero under aggressive updates; keep the box valid.
  const Eigen::Vector3d size = y.segment(3, 3).cwiseMax(1e-3);
  return Box3D(y.head(3), size, y(6));
}

Eigen::Vector2d MotionModel::state_velocity(const Eigen::VectorXd& x) const {
  switch (kind_) {
    case MotionKind::kCV:
    case MotionKind::kCA:
      return {x(7), x(8)};
    case MotionKind::kCTRA:
    case MotionKind::kBicycle:
      return {x(6) * std::cos(x(8)), x(6) * std::sin(x(8))};
  }
  return Eigen::Vector2d::Zero();
}

Eigen::VectorXd MotionModel::default_process_noise() const {
  Eigen::VectorXd q(state_dim());
  switch (kind_) {
    case MotionKind::kCV:
      q << 0.1, 0.1, 0.1, 0.01, 0.01, 0.01, 0.01, 1.0, 1.0;
      break;
    case MotionKind::kCA:
      q << 0.1, 0.1, 0.1, 0.01, 0.01, 0.01, 0.01, 1.0, 1.0, 0.5, 0.5;
      break;
    case MotionKind::kCTRA:
    case MotionKind::kBicycle:
      q << 0.1, 0.1, 0.1, 0.01, 0.01, 0.01, 1.0, 0.5, 0.01, 0.1;
      break;
  }
  return q;
}

Eigen::VectorXd MotionModel::default_measurement_noise() const {
  Eigen::VectorXd r(kObsDim);
  r << 0.5, 0.5, 0.5, 0.05, 0.05, 0.05, 0.05;
  return r;
}

Eigen::VectorXd observation_from_box(const Box3D& box) {
  Eigen::VectorXd y(MotionModel::kObsDim);
  y << box.center.x(), box.center.y(), box.center.z(), box.size.x(),
      box.size.y(), box.size.z(), box.yaw;
  return y;
}

Box3D box_from_observation(const Eigen::VectorXd& y) {
  return Box3D(y.head(3), y.segment(3, 3), y(6));
}

}  // namespace mot
