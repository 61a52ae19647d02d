#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace hysens;
using namespace hysens::test;

namespace {

// Scalar q'' = a q' with rho = (a, v0), q(0) = 0, v(0) = v0.
std::shared_ptr<FnModel> linear_drag() {
  return std::make_shared<FnModel>(
      1, 2, [](double, const Vector&, const Vector&) { return Matrix(Matrix::Identity(1, 1)); },
      [](double, const Vector&, const Vector& v, const Vector& rho) { return Vector(rho[0] * v); },
      [](const Vector& rho) {
        InitialState s = fixed_initial(Vector::Zero(1), Vector::Constant(1, rho[1]), 2);
        s.dv0_drho(0, 1) = 1.0;
        return s;
      });
}

Vector terminal_v(double, const Vector&, const Vector& v, const Vector&) { return v; }

IntegratorConfig tight() {
  IntegratorConfig c;
  c.rtol = 1e-11;
  c.atol = 1e-13;
  return c;
}

// Test-side finite differences of psi over whole simulations.
Matrix fd_gradient(const HybridSystem& sys, const CostFunctional& cost, const Vector& rho,
                   double t0, double tF, const IntegratorConfig& cfg, double h = 1e-6) {
  SimulationOptions opt;
  opt.integrator = cfg;
  const auto psi = [&](const Vector& r) {
    return cost_value(simulate(sys, cost, r, t0, tF, opt), sys, cost);
  };
  return central_jacobian(psi, rho, h);
}

}  // namespace

TEST(Direct, FreeFallInitialVelocity) {
  const double tF = 1.7;
  auto model = std::make_shared<FnModel>(
      1, 1, [](double, const Vector&, const Vector&) { return Matrix(Matrix::Identity(1, 1)); },
      [](double, const Vector&, const Vector&, const Vector&) { return Vector::Constant(1, -9.81); },
      [](const Vector& rho) {
        InitialState s = fixed_initial(Vector::Zero(1), rho, 1);
        s.dv0_drho(0, 0) = 1.0;
        return s;
      });
  const FnCost cost(1, [](const CostPoint&) { return Vector(Vector::Zero(1)); },
                    [](double, const Vector& q, const Vector&, const Vector&) { return q; });
  const DirectResult r =
      propagate_direct(single_mode(model), cost, Vector::Constant(1, 2.0), 0.0, tF, IntegratorConfig{});
  EXPECT_NEAR(r.gradient(0, 0), tF, 1e-10);
  EXPECT_NEAR(r.X_tF.Q(0, 0), tF, 1e-10);
  EXPECT_NEAR(r.X_tF.V(0, 0), 1.0, 1e-12);
}

TEST(Direct, LinearDragClosedForm) {
  const double a = -0.7, v0 = 1.3, tF = 2.0;
  const FnCost cost(1, [](const CostPoint&) { return Vector(Vector::Zero(1)); }, terminal_v);
  const DirectResult r = propagate_direct(single_mode(linear_drag()), cost,
                                          Eigen::Vector2d(a, v0), 0.0, tF, tight());
  EXPECT_NEAR(r.gradient(0, 0), tF * std::exp(a * tF) * v0, 1e-9);
  EXPECT_NEAR(r.gradient(0, 1), std::exp(a * tF), 1e-9);
  // Q = d q / d rho with q = v0 (e^{at} - 1) / a.
  const double dq_da = v0 * (tF * std::exp(a * tF) / a - (std::exp(a * tF) - 1.0) / (a * a));
  EXPECT_NEAR(r.X_tF.Q(0, 0), dq_da, 1e-9);
}

TEST(Direct, ZeroDensityGivesZeroQuadratureSensitivity) {
  const FnCost cost(1, [](const CostPoint&) { return Vector(Vector::Zero(1)); }, terminal_v);
  const DirectResult r = propagate_direct(single_mode(linear_drag()), cost,
                                          Eigen::Vector2d(0.3, 1.0), 0.0, 1.0, IntegratorConfig{});
  EXPECT_EQ(r.X_tF.Z, Matrix(Matrix::Zero(1, 2)));
}

TEST(Direct, IntegralCostMatchesFiniteDifferences) {
  const FnCost cost(
      2,
      [](const CostPoint& pt) {
        return Vector(Eigen::Vector2d(pt.q[0] * pt.q[0], pt.v[0] * pt.vdot[0] + pt.rho[0]));
      },
      [](double, const Vector& q, const Vector& v, const Vector&) {
        return Vector(Eigen::Vector2d(0.0, q[0] * v[0]));
      });
  const Eigen::Vector2d rho(-0.4, 0.9);
  const DirectResult r = propagate_direct(single_mode(linear_drag()), cost, rho, 0.0, 1.5, tight());
  const Matrix fd = fd_gradient(single_mode(linear_drag()), cost, rho, 0.0, 1.5, tight());
  EXPECT_LE(max_rel_err(r.gradient.topRows(1), fd.topRows(1)), 1e-6);
  EXPECT_LE((r.gradient - fd).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Direct, CostSizeMismatchIsRejected) {
  const FnCost cost(2, [](const CostPoint& pt) { return Vector(Eigen::Vector2d(pt.q[0], 0.0)); },
                    terminal_v);
  EXPECT_THROW((void)propagate_direct(single_mode(linear_drag()), cost, Eigen::Vector2d(0.1, 1.0),
                                      0.0, 1.0, IntegratorConfig{}),
               ValidationError);
}

TEST(Direct, DuplicatedParameterGivesIdenticalColumns) {
  auto model = std::make_shared<FnModel>(
      1, 2, [](double, const Vector&, const Vector&) { return Matrix(Matrix::Identity(1, 1)); },
      [](double, const Vector& q, const Vector&, const Vector& rho) {
        return Vector(-(rho[0] + rho[1]) * q);
      },
      [](const Vector&) { return fixed_initial(Vector::Ones(1), Vector::Zero(1), 2); });
  const FnCost cost(1, [](const CostPoint& pt) { return Vector(pt.q.array().square()); });
  const DirectResult r =
      propagate_direct(single_mode(model), cost, Eigen::Vector2d(2.0, 2.0), 0.0, 3.0, IntegratorConfig{});
  EXPECT_EQ(r.gradient(0, 0), r.gradient(0, 1));
  EXPECT_EQ(r.X_tF.Q.col(0), r.X_tF.Q.col(1));
}

TEST(Direct, BouncingMassClosedForm) {
  const GalleryProblem pb = register_gallery().make("bouncing-mass");
  // y(tF) after one bounce, as an explicit function of (h0, e, g).
  const auto y_tf = [&](const Vector& r) {
    const double h0 = r[0], e = r[1], g = r[2];
    const double te = std::sqrt(2.0 * h0 / g), vp = e * std::sqrt(2.0 * g * h0);
    const double s = pb.tF - te;
    return Vector(Vector::Constant(1, vp * s - 0.5 * g * s * s));
  };
  const Matrix oracle = central_jacobian(y_tf, pb.rho.rho, 1e-5);
  const DirectResult r = propagate_direct(pb.system, pb.cost("terminal-y"), pb.rho.rho, pb.t0,
                                          pb.tF, IntegratorConfig{});
  ASSERT_EQ(r.trajectory.events.size(), 1u);
  EXPECT_NEAR(r.psi[0], y_tf(pb.rho.rho)[0], 1e-8);
  EXPECT_LE((r.gradient - oracle).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Direct, BouncingMassIntegralCostsMatchFiniteDifferences) {
  const GalleryProblem pb = register_gallery().make("bouncing-mass");
  for (const char* c : {"int-y", "int-vsq"}) {
    const DirectResult r =
        propagate_direct(pb.system, pb.cost(c), pb.rho.rho, pb.t0, pb.tF, tight());
    const Matrix fd = fd_gradient(pb.system, pb.cost(c), pb.rho.rho, pb.t0, pb.tF, tight());
    EXPECT_LE(max_rel_err(r.gradient, fd), 1e-5) << c;
  }
}

TEST(Direct, QuadratureJumpAtFiveBarBounce) {
  const GalleryProblem pb = register_gallery().make("five-bar");
  const DirectResult r = propagate_direct(pb.system, pb.cost("int-ay2"), pb.rho.rho, pb.t0, pb.tF,
                                          IntegratorConfig{});
  ASSERT_FALSE(r.trajectory.events.empty());
  const EventRecord& e = r.trajectory.events.front();
  const Index n = e.context.n, p = e.context.p;
  const Matrix dZ = e.X_plus.bottomRows(1) - e.X_minus.bottomRows(1);
  const Matrix expected = -(e.context.g_plus - e.context.g_minus) * e.dteve_drho;
  EXPECT_LE((dZ - expected).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, expected.norm()));
  // Event time sensitivity from the recorded row functional.
  const Matrix Qm = e.X_minus.topRows(n);
  EXPECT_LE((e.dteve_dQminus * Qm - e.dteve_drho).norm(), 1e-14 * std::max(1.0, e.dteve_drho.norm()));
  EXPECT_EQ(e.X_plus.middleRows(2 * n, p), Matrix(Matrix::Identity(p, p)));
}

TEST(Direct, EventFreePendulumMatchesFiniteDifferences) {
  for (const char* form : {"index1", "penalty"}) {
    const GalleryProblem pb =
        register_gallery().make("pendulum", {{"start", "taut"}, {"formulation", form}});
    for (const char* c : {"int-y", "terminal-x", "int-vx2"}) {
      const DirectResult r = propagate_direct(pb.system, pb.cost(c), pb.rho.rho, 0.0, 1.0, tight());
      ASSERT_TRUE(r.trajectory.events.empty());
      // The stiff penalty makes the step sequence parameter dependent, so its
      // oracle needs a tighter tolerance and a wider difference step.
      const bool stiff = std::string(form) == "penalty";
      IntegratorConfig fcfg = tight();
      if (stiff) {
        fcfg.rtol = 1e-12;
        fcfg.atol = 1e-14;
      }
      const Matrix fd =
          fd_gradient(pb.system, pb.cost(c), pb.rho.rho, 0.0, 1.0, fcfg, stiff ? 1e-4 : 1e-5);
      EXPECT_LE(max_rel_err(r.gradient, fd), 1e-5) << form << " " << c << "\n" << r.gradient << "\n" << fd;
    }
  }
}

TEST(Direct, SensitivitySeriesLayout) {
  const GalleryProblem pb = register_gallery().make("bouncing-mass");
  const DirectResult r =
      propagate_direct(pb.system, pb.cost(pb.default_cost), pb.rho.rho, pb.t0, pb.tF, IntegratorConfig{});
  const SensitivitySeries s = sensitivity_series(r.trajectory);
  const std::size_t cols = 1 + 1 * 3 + 1 * 3 + 1 * 3;
  ASSERT_EQ(s.header.size(), cols);
  EXPECT_EQ(s.header.front(), "t");
  ASSERT_FALSE(s.rows.empty());
  for (const auto& row : s.rows) ASSERT_EQ(row.size(), cols);
  EXPECT_EQ(s.rows.back()[0], pb.tF);
}
