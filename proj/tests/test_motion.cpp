#include <doctest.h>

#include <cmath>

#include "mot/angles.hpp"
#include "mot/motion.hpp"
#include "mot/rng.hpp"

using namespace mot;

namespace {

// Random state kept away from the heading wrap boundary so central
// differences stay valid.
Eigen::VectorXd random_state(const MotionModel& model, Rng& rng) {
  Eigen::VectorXd x(model.state_dim());
  const double px = rng.uniform(-10, 10), py = rng.uniform(-10, 10);
  const double pz = rng.uniform(-2, 2);
  const double w = rng.uniform(0.5, 3), l = rng.uniform(0.5, 4),
               h = rng.uniform(0.5, 2);
  const double th = rng.uniform(-2, 2);
  switch (model.kind()) {
    case MotionKind::kCV:
      x << px, py, pz, w, l, h, th, rng.uniform(-5, 5), rng.uniform(-5, 5);
      break;
    case MotionKind::kCA:
      x << px, py, pz, w, l, h, th, rng.uniform(-5, 5), rng.uniform(-5, 5),
          rng.uniform(-2, 2), rng.uniform(-2, 2);
      break;
    case MotionKind::kCTRA:
    case MotionKind::kBicycle:
      x << px, py, pz, w, l, h, rng.uniform(-5, 5), rng.uniform(-2, 2), th,
          rng.uniform(-0.5, 0.5);
      break;
  }
  return x;
}

Eigen::MatrixXd fd_jacobian_f(const MotionModel& model, const Eigen::VectorXd& x,
                              double dt) {
  const int m = model.state_dim();
  const double step = 1e-6;
  Eigen::MatrixXd J(m, m);
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += step;
    xm(j) -= step;
    J.col(j) =
        (model.predict_state(xp, dt) - model.predict_state(xm, dt)) / (2 * step);
  }
  return J;
}

Eigen::MatrixXd fd_jacobian_h(const MotionModel& model, const Eigen::VectorXd& x) {
  const int m = model.state_dim();
  const double step = 1e-6;
  Eigen::MatrixXd J(model.obs_dim(), m);
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += step;
    xm(j) -= step;
    J.col(j) = (model.observe(xp) - model.observe(xm)) / (2 * step);
  }
  return J;
}

const MotionKind kAllKinds[] = {MotionKind::kCV, MotionKind::kCA,
                                MotionKind::kCTRA, MotionKind::kBicycle};

}  // namespace

TEST_CASE("constant velocity moves along the velocity vector") {
  const MotionModel model(MotionKind::kCV);
  Eigen::VectorXd x(9);
  x << 0, 0, 0, 2, 4, 1.5, 0, 1, 0;
  const Eigen::VectorXd xn = model.predict_state(x, 1.0);
  CHECK(xn(0) == doctest::Approx(1.0));
  CHECK(xn(1) == doctest::Approx(0.0));
  CHECK((xn.tail(7) - x.tail(7)).norm() == doctest::Approx(0.0));
}

TEST_CASE("zero motion components give a fixed point") {
  for (MotionKind kind : kAllKinds) {
    const MotionModel model(kind);
    const Box3D box(Eigen::Vector3d(3, -1, 0.5), Eigen::Vector3d(2, 4, 1.5), 0.4);
    const Eigen::VectorXd x = model.init_state(box);
    const Eigen::VectorXd xn = model.predict_state(x, 1.0);
    CHECK((xn - x).norm() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("constant-turn arc closed form") {
  const MotionModel model(MotionKind::kCTRA);
  Eigen::VectorXd x(10);
  x << 0, 0, 0, 2, 4, 1.5, 1.0, 0.0, 0.0, kPi / 2;
  const Eigen::VectorXd xn = model.predict_state(x, 1.0);
  CHECK(xn(0) == doctest::Approx(2.0 / kPi).epsilon(1e-12));
  CHECK(xn(1) == doctest::Approx(2.0 / kPi).epsilon(1e-12));
  CHECK(xn(8) == doctest::Approx(kPi / 2).epsilon(1e-12));
}

TEST_CASE("arc prediction matches Euler integration") {
  // Oracle: integrate dx = v cos(theta), dy = v sin(theta), dv = a,
  // dtheta = omega explicitly at a fine step.
  Rng rng(42);
  const MotionModel model(MotionKind::kCTRA);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x = random_state(model, rng);
    const double horizon = 1.0;
    const Eigen::VectorXd closed = model.predict_state(x, horizon);

    const double step = 1e-4;
    double px = x(0), py = x(1), v = x(6), th = x(8);
    const double a = x(7), w = x(9);
    const int n = static_cast<int>(horizon / step);
    for (int i = 0; i < n; ++i) {
      px += v * std::cos(th) * step;
      py += v * std::sin(th) * step;
      v += a * step;
      th += w * step;
    }
    CHECK(std::abs(closed(0) - px) < 1e-3);
    CHECK(std::abs(closed(1) - py) < 1e-3);
    CHECK(std::abs(closed(6) - v) < 1e-3);
    CHECK(std::abs(wrap_angle(closed(8) - th)) < 1e-3);
  }
}

TEST_CASE("observation projects box components") {
  const MotionModel model(MotionKind::kCV);
  Eigen::VectorXd x(9);
  x << 1, 2, 3, 2, 3, 1.5, 0.3, 4, -1;
  const Eigen::VectorXd y = model.observe(x);
  Eigen::VectorXd want(7);
  want << 1, 2, 3, 2, 3, 1.5, 0.3;
  CHECK((y - want).norm() == doctest::Approx(0.0));

  // Motion components do not leak into the observation.
  const MotionModel ctra(MotionKind::kCTRA);
  Eigen::VectorXd xc(10);
  xc << 1, 2, 3, 2, 3, 1.5, 9.0, 2.0, 0.3, 0.5;
  const Eigen::VectorXd yc = ctra.observe(xc);
  CHECK((yc - want).norm() == doctest::Approx(0.0));
}

TEST_CASE("tiny-horizon prediction leaves the observation unchanged") {
  Rng rng(7);
  for (MotionKind kind : kAllKinds) {
    const MotionModel model(kind);
    const Eigen::VectorXd x = random_state(model, rng);
    const Eigen::VectorXd y0 = model.observe(x);
    const Eigen::VectorXd y1 = model.observe(model.predict_state(x, 1e-12));
    CHECK((y1 - y0).norm() < 1e-9);
  }
}

TEST_CASE("transition jacobian matches central differences") {
  Rng rng(2024);
  for (MotionKind kind : kAllKinds) {
    const MotionModel model(kind);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::VectorXd x = random_state(model, rng);
      const double dt = rng.uniform(0.1, 1.0);
      const Eigen::MatrixXd A = model.jacobian_f(x, dt);
      const Eigen::MatrixXd N = fd_jacobian_f(model, x, dt);
      const double err = (A - N).cwiseAbs().maxCoeff();
      CHECK(err < 1e-5);
      // Relative check against the largest entry.
      CHECK(err / std::max(1.0, A.cwiseAbs().maxCoeff()) < 1e-4);
    }
  }
}

TEST_CASE("observation jacobian matches central differences") {
  Rng rng(2025);
  for (MotionKind kind : kAllKinds) {
    const MotionModel model(kind);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::VectorXd x = random_state(model, rng);
      const Eigen::MatrixXd A = model.jacobian_h(x);
      const Eigen::MatrixXd N = fd_jacobian_h(model, x);
      CHECK((A - N).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("selection jacobians have one unit entry per row") {
  for (MotionKind kind : {MotionKind::kCV, MotionKind::kCA, MotionKind::kCTRA}) {
    const MotionModel model(kind);
    const Eigen::MatrixXd H =
        model.jacobian_h(Eigen::VectorXd::Zero(model.state_dim()));
    for (int i = 0; i < H.rows(); ++i) {
      CHECK(H.row(i).sum() == doctest::Approx(1.0));
      CHECK(H.row(i).cwiseAbs().maxCoeff() == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("jacobian_f approaches identity as dt shrinks") {
  Rng rng(9);
  for (MotionKind kind : kAllKinds) {
    const MotionModel model(kind);
    const Eigen::VectorXd x = random_state(model, rng);
    const Eigen::MatrixXd F = model.jacobian_f(x, 1e-12);
    const int m = model.state_dim();
    CHECK((F - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("linear models compose over time") {
  Rng rng(11);
  for (MotionKind kind : {MotionKind::kCV, MotionKind::kCA}) {
    const MotionModel model(kind);
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::VectorXd x = random_state(model, rng);
      const double dt1 = rng.uniform(0.1, 1.0), dt2 = rng.uniform(0.1, 1.0);
      const Eigen::VectorXd two_step =
          model.predict_state(model.predict_state(x, dt1), dt2);
      const Eigen::VectorXd one_step = model.predict_state(x, dt1 + dt2);
      CHECK((two_step - one_step).norm() < 1e-9);
    }
  }
}

TEST_CASE("zero turn rate reduces to constant acceleration") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const MotionModel ctra(MotionKind::kCTRA);
    Eigen::VectorXd xc = random_state(ctra, rng);
    xc(9) = 0.0;
    const double v = xc(6), a = xc(7), th = xc(8);

    const MotionModel ca(MotionKind::kCA);
    Eigen::VectorXd xa(11);
    xa << xc(0), xc(1), xc(2), xc(3), xc(4), xc(5), th, v * std::cos(th),
        v * std::sin(th), a * std::cos(th), a * std::sin(th);

    const double dt = rng.uniform(0.1, 1.0);
    const Eigen::VectorXd pc = ctra.predict_state(xc, dt);
    const Eigen::VectorXd pa = ca.predict_state(xa, dt);
    CHECK(std::abs(pc(0) - pa(0)) < 1e-9);
    CHECK(std::abs(pc(1) - pa(1)) < 1e-9);
    CHECK(std::abs(pc(2) - pa(2)) < 1e-9);
    CHECK(std::abs(pc(8) - pa(6)) < 1e-9);  // heading unchanged in both
  }
}

TEST_CASE("arc displacement is smooth through tiny turn rates") {
  const MotionModel model(MotionKind::kCTRA);
  Eigen::VectorXd x(10);
  x << 0, 0, 0, 2, 4, 1.5, 5.0, 1.0, 0.7, 0.0;
  // Probe across the series/closed-form switch points of the arc helpers.
  for (double seam : {1e-3, 5e-2}) {
    Eigen::VectorXd lo = x, hi = x;
    lo(9) = seam * 0.999;
    hi(9) = seam * 1.001;
    const Eigen::VectorXd plo = model.predict_state(lo, 1.0);
    const Eigen::VectorXd phi = model.predict_state(hi, 1.0);
    // The probes differ by dw = 0.002 * seam; the genuine smooth change is
    // bounded by (v dt^2/2 + a dt^3/3 + dt) * dw ~ 4 * dw. Anything much
    // larger is a branch jump.
    CHECK((plo - phi).norm() < 0.02 * seam);
    const Eigen::MatrixXd Flo = model.jacobian_f(lo, 1.0);
    const Eigen::MatrixXd Fhi = model.jacobian_f(hi, 1.0);
    CHECK((Flo - Fhi).cwiseAbs().maxCoeff() < 0.02 * seam);
  }
  // Exactly zero turn rate stays finite and matches a straight roll-out.
  const Eigen::VectorXd p0 = model.predict_state(x, 1.0);
  const double dist = 5.0 * 1.0 + 0.5 * 1.0;  // v dt + a dt^2 / 2
  CHECK(p0(0) == doctest::Approx(std::cos(0.7) * dist));
  CHECK(p0(1) == doctest::Approx(std::sin(0.7) * dist));
}

TEST_CASE("predicted heading stays wrapped") {
  Rng rng(17);
  for (MotionKind kind : kAllKinds) {
    const MotionModel model(kind);
    const int theta_idx = model.state_angle_indices()[0];
    for (int trial = 0; trial < 200; ++trial) {
      Eigen::VectorXd x = random_state(model, rng);
      x(theta_idx) = rng.uniform(-20, 20);
      const Eigen::VectorXd xn = model.predict_state(x, rng.uniform(0.1, 2.0));
      CHECK(xn(theta_idx) >= -kPi);
      CHECK(xn(theta_idx) < kPi);
    }
  }
}

TEST_CASE("state init and box recovery round-trip") {
  Rng rng(19);
  for (MotionKind kind : kAllKinds) {
    const MotionModel model(kind);
    for (int trial = 0; trial < 50; ++trial) {
      const Box3D box(
          Eigen::Vector3d(rng.uniform(-10, 10), rng.uniform(-10, 10),
                          rng.uniform(-2, 2)),
          Eigen::Vector3d(rng.uniform(0.5, 3), rng.uniform(0.5, 4),
                          rng.uniform(0.5, 2)),
          rng.uniform(-kPi, kPi));
      const Eigen::Vector2d vel(rng.uniform(-5, 5), rng.uniform(-5, 5));
      const Eigen::VectorXd x = model.init_state(box, vel);
      const Box3D back = model.state_box(x);
      CHECK((back.center - box.center).norm() < 1e-9);
      CHECK((back.size - box.size).norm() < 1e-9);
      CHECK(std::abs(angle_diff(back.yaw, box.yaw)) < 1e-9);
      CHECK((model.observe(x) - observation_from_box(box)).norm() < 1e-9);
    }
  }
}

TEST_CASE("velocity hint seeds linear models exactly") {
  const MotionModel model(MotionKind::kCV);
  const Box3D box(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(2, 4, 1.5), 0.0);
  const Eigen::VectorXd x = model.init_state(box, Eigen::Vector2d(3, -1));
  CHECK(model.state_velocity(x).x() == doctest::Approx(3.0));
  CHECK(model.state_velocity(x).y() == doctest::Approx(-1.0));
}
