#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace hysens;
using namespace hysens::test;

namespace {

// Planar points with constant diagonal mass and gravity rho[0]; optional
// viscous damping rho[2] makes the force velocity dependent.
std::shared_ptr<FnModel> planar_points(Index points, Index p, double mass = 1.0) {
  const Index n = 2 * points;
  return std::make_shared<FnModel>(
      n, p,
      [n, mass](double, const Vector&, const Vector&) { return Matrix(mass * Matrix::Identity(n, n)); },
      [n, mass, p](double, const Vector&, const Vector& v, const Vector& rho) {
        Vector F = Vector::Zero(n);
        for (Index i = 1; i < n; i += 2) F[i] = -mass * rho[0];
        if (p > 2) F -= rho[2] * v;
        return F;
      },
      [n, p](const Vector&) { return fixed_initial(Vector::Zero(n), Vector::Zero(n), p); });
}

// Single pendulum of length L anchored at the origin.
std::shared_ptr<DistanceConstraints> rod(double L) {
  DistanceConstraints::Bar b;
  b.a = 0;
  b.b = -1;
  b.length = L;
  return std::make_shared<DistanceConstraints>(std::vector<DistanceConstraints::Bar>{b});
}

// Double pendulum; the second length is rho[1].
std::shared_ptr<DistanceConstraints> double_rod() {
  DistanceConstraints::Bar b0, b1;
  b0.a = 0;
  b0.b = -1;
  b0.length = 1.0;
  b1.a = 1;
  b1.b = 0;
  b1.rho_index = 1;
  return std::make_shared<DistanceConstraints>(std::vector<DistanceConstraints::Bar>{b0, b1});
}

}  // namespace

TEST(Penalty, ZeroAlphaIsUnconstrained) {
  const auto model = planar_points(1, 1);
  PenaltyConfig pc;
  pc.alpha_scale = 0.0;
  const Vector q(Eigen::Vector2d(0.3, -0.9)), v(Eigen::Vector2d(1.0, 0.2));
  const Vector rho = Vector::Constant(1, 9.81);
  const Vector a = penalty_rhs(*model, *rod(1.0), 0.0, q, v, rho, pc);
  EXPECT_LE((a - eom_rhs(*model, 0.0, q, v, rho)).norm(), 1e-15);
}

TEST(Penalty, StaticPendulumMultiplier) {
  const auto model = planar_points(1, 1);
  const auto cons = rod(1.0);
  PenaltyConfig pc;
  const double g = 9.81;
  const Vector q(Eigen::Vector2d(0.0, -1.0)), v = Vector::Zero(2), rho = Vector::Constant(1, g);
  // Consistent state at rest: the constraint residual and its rate vanish.
  EXPECT_EQ(cons->phi(0.0, q, rho)[0], 0.0);
  const Vector a = penalty_rhs(*model, *cons, 0.0, q, v, rho, pc);
  EXPECT_LE(a.norm(), 1e-5);
  const Vector mu = penalty_multipliers(*cons, 0.0, q, v, a, rho, pc);
  // Tension m g on Phi = |q|^2 - L^2 with Phi_q = 2 q^T gives mu = m g / (2 L).
  EXPECT_NEAR(mu[0], g / 2.0, 1e-4);
  const DaeSolution dae = dae_solve(*model, cons.get(), 0.0, q, v, rho);
  EXPECT_NEAR(mu[0], dae.mu[0], 1e-4);
}

TEST(Penalty, JacobiansMatchFiniteDifferences) {
  const auto model = planar_points(2, 3);
  const auto cons = double_rod();
  PenaltyConfig pc;
  pc.alpha_scale = 1e3;
  const Vector q = (Vector(4) << 0.5, -0.8, 1.1, -1.5).finished();
  const Vector v = (Vector(4) << 0.3, 0.2, -0.4, 0.1).finished();
  const Vector rho = (Vector(3) << 9.81, 0.7, 0.05).finished();
  const AccelerationJacobians J = penalty_jacobians(*model, *cons, 0.0, q, v, rho, pc);
  const auto fq = central_jacobian([&](const Vector& x) { return penalty_rhs(*model, *cons, 0.0, x, v, rho, pc); }, q);
  const auto fv = central_jacobian([&](const Vector& x) { return penalty_rhs(*model, *cons, 0.0, q, x, rho, pc); }, v);
  const auto fr = central_jacobian([&](const Vector& x) { return penalty_rhs(*model, *cons, 0.0, q, v, x, pc); }, rho);
  EXPECT_LE((J.f_q - fq).norm(), 1e-5 * std::max(1.0, fq.norm()));
  EXPECT_LE((J.f_v - fv).norm(), 1e-5 * std::max(1.0, fv.norm()));
  EXPECT_LE((J.f_rho - fr).norm(), 1e-5 * std::max(1.0, fr.norm()));
  EXPECT_EQ(J.mu_q.size(), 0);
}

TEST(Penalty, InvalidConfig) {
  PenaltyConfig pc;
  pc.omega = 0.0;
  EXPECT_THROW(pc.validate(1), ValidationError);
  pc = PenaltyConfig{};
  pc.alpha = -Matrix::Identity(1, 1);
  EXPECT_THROW(pc.validate(1), ValidationError);
}

TEST(Penalty, PendulumTracksIndexOneSolution) {
  const GalleryProblem a = register_gallery().make("pendulum", {{"start", "taut"}, {"formulation", "index1"}});
  const GalleryProblem b = register_gallery().make("pendulum", {{"start", "taut"}, {"formulation", "penalty"}});
  SimulationOptions opt;
  opt.integrator.rtol = 1e-10;
  opt.integrator.atol = 1e-12;
  const HybridTrajectory ta = simulate(a.system, a.cost(a.default_cost), a.rho.rho, 0.0, 2.0, opt);
  const HybridTrajectory tb = simulate(b.system, b.cost(b.default_cost), b.rho.rho, 0.0, 2.0, opt);
  ASSERT_TRUE(ta.events.empty());
  ASSERT_TRUE(tb.events.empty());
  for (int k = 0; k <= 20; ++k) {
    const double t = 0.1 * k;
    const Vector ya = ta.state_at(t).head(4), yb = tb.state_at(t).head(4);
    EXPECT_LE((ya - yb).cwiseAbs().maxCoeff(), 1e-6) << "t=" << t;
  }
}

TEST(Dae, PendulumAccelerationClosedForm) {
  const double g = 9.81, L = 1.3, m = 2.0;
  const auto model = planar_points(1, 1, m);
  const auto cons = rod(L);
  for (double th : {0.0, 0.4, -1.1, 2.0}) {
    for (double thd : {0.0, 0.7, -1.5}) {
      const Vector q(Eigen::Vector2d(L * std::sin(th), -L * std::cos(th)));
      const Eigen::Vector2d e_t(std::cos(th), std::sin(th)), e_n(-std::sin(th), std::cos(th));
      const Vector v = thd * L * e_t;
      const double thdd = -g / L * std::sin(th);
      const Vector expected = L * (thdd * e_t + thd * thd * e_n);
      const DaeSolution s = dae_solve(*model, cons.get(), 0.0, q, v, Vector::Constant(1, g));
      EXPECT_LE((s.vdot - expected).norm(), 1e-8) << th << " " << thd;
      const double tension = m * (g * std::cos(th) + L * thd * thd);
      EXPECT_NEAR(s.mu[0], tension / (2.0 * L), 1e-8);
    }
  }
}

TEST(Dae, JacobiansMatchFiniteDifferences) {
  const auto model = planar_points(2, 3);
  const auto cons = double_rod();
  const Vector q = (Vector(4) << 0.5, -0.8, 1.1, -1.5).finished();
  const Vector v = (Vector(4) << 0.3, 0.2, -0.4, 0.1).finished();
  const Vector rho = (Vector(3) << 9.81, 0.7, 0.05).finished();
  const DaeSolution s = dae_solve(*model, cons.get(), 0.0, q, v, rho);
  const AccelerationJacobians J = dae_jacobians(*model, cons.get(), 0.0, q, v, s.vdot, s.mu, rho);
  const auto both = [&](const Vector& qq, const Vector& vv, const Vector& rr) {
    const DaeSolution x = dae_solve(*model, cons.get(), 0.0, qq, vv, rr);
    Vector out(x.vdot.size() + x.mu.size());
    out << x.vdot, x.mu;
    return out;
  };
  const Matrix dq = central_jacobian([&](const Vector& x) { return both(x, v, rho); }, q);
  const Matrix dv = central_jacobian([&](const Vector& x) { return both(q, x, rho); }, v);
  const Matrix dr = central_jacobian([&](const Vector& x) { return both(q, v, x); }, rho);
  const auto check = [](const Matrix& analytic, const Matrix& fd) {
    EXPECT_LE((analytic - fd).norm(), 1e-5 * std::max(1.0, fd.norm()));
  };
  check(J.f_q, dq.topRows(4));
  check(J.f_v, dv.topRows(4));
  check(J.f_rho, dr.topRows(4));
  check(J.mu_q, dq.bottomRows(2));
  check(J.mu_v, dv.bottomRows(2));
  check(J.mu_rho, dr.bottomRows(2));
}

TEST(Dae, SingularKktIsReported) {
  const auto model = planar_points(1, 1);
  DistanceConstraints::Bar b;
  b.a = 0;
  b.b = -1;
  // The same constraint twice leaves the KKT matrix rank deficient.
  const DistanceConstraints cons({b, b});
  const Vector q(Eigen::Vector2d(0.0, -1.0));
  try {
    (void)dae_solve(*model, &cons, 0.25, q, Vector::Zero(2), Vector::Constant(1, 9.81));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("singular"), std::string::npos);
    EXPECT_NE(msg.find("t=0.25"), std::string::npos);
  }
}

TEST(Impulse, ConsistentVelocityIsUnchanged) {
  const auto model = planar_points(2, 3);
  const auto cons = double_rod();
  const Vector q = (Vector(4) << 0.6, -0.8, 1.3, -0.8).finished();  // second rod horizontal
  const Vector rho = (Vector(3) << 9.81, 0.7, 0.0).finished();
  ASSERT_LE(cons->phi(0.0, q, rho).norm(), 1e-12);
  // Rotate the whole chain rigidly about the anchor.
  const Vector v = (Vector(4) << 0.8, 0.6, 0.8, 1.3).finished();
  ASSERT_LE(cons->velocity_residual(0.0, q, v, rho).norm(), 1e-12);
  const ImpulseSolution s = impulse_solve(*model, *cons, 0.0, q, v, rho);
  EXPECT_LE((s.v_plus - v).norm(), 1e-12);
  EXPECT_LE(s.delta_mu.norm(), 1e-12);
}

TEST(Impulse, KineticEnergyDoesNotIncrease) {
  std::mt19937_64 rng(5);
  const auto model = planar_points(2, 3);
  const auto cons = double_rod();
  const Vector q = (Vector(4) << 0.6, -0.8, 1.3, -0.8).finished();
  const Vector rho = (Vector(3) << 9.81, 0.7, 0.0).finished();
  for (int trial = 0; trial < 50; ++trial) {
    const Vector v = random_matrix(rng, 4, 1);
    const ImpulseSolution s = impulse_solve(*model, *cons, 0.0, q, v, rho);
    EXPECT_LE(s.v_plus.squaredNorm(), v.squaredNorm() + 1e-14);
    EXPECT_LE(cons->velocity_residual(0.0, q, s.v_plus, rho).norm(), 1e-12);
  }
}

TEST(Impulse, JacobiansMatchFiniteDifferences) {
  const auto model = planar_points(2, 3);
  const auto cons = double_rod();
  const Vector q = (Vector(4) << 0.6, -0.8, 1.3, -0.8).finished();
  const Vector v = (Vector(4) << 0.2, -0.5, 0.9, 0.3).finished();
  const Vector rho = (Vector(3) << 9.81, 0.7, 0.0).finished();
  const ImpulseJacobians J = impulse_jacobians(*model, *cons, 0.0, q, v, rho);
  const auto both = [&](const Vector& qq, const Vector& vv, const Vector& rr) {
    const ImpulseSolution s = impulse_solve(*model, *cons, 0.0, qq, vv, rr);
    Vector out(6);
    out << s.v_plus, s.delta_mu;
    return out;
  };
  const Matrix dq = central_jacobian([&](const Vector& x) { return both(x, v, rho); }, q);
  const Matrix dv = central_jacobian([&](const Vector& x) { return both(q, x, rho); }, v);
  const Matrix dr = central_jacobian([&](const Vector& x) { return both(q, v, x); }, rho);
  EXPECT_LE((J.v_q - dq.topRows(4)).norm(), 1e-6 * std::max(1.0, dq.norm()));
  EXPECT_LE((J.v_v - dv.topRows(4)).norm(), 1e-6);
  EXPECT_LE((J.v_rho - dr.topRows(4)).norm(), 1e-6 * std::max(1.0, dr.norm()));
  EXPECT_LE((J.mu_q - dq.bottomRows(2)).norm(), 1e-6 * std::max(1.0, dq.norm()));
  EXPECT_LE((J.mu_v - dv.bottomRows(2)).norm(), 1e-6);
  EXPECT_LE((J.mu_rho - dr.bottomRows(2)).norm(), 1e-6 * std::max(1.0, dr.norm()));
}

TEST(Residuals, RecordsInfinityNorms) {
  const auto cons = rod(1.0);
  ConstraintResiduals r;
  r.record(*cons, 0.0, Eigen::Vector2d(0.0, -1.1), Eigen::Vector2d(1.0, 0.5), Vector::Zero(1));
  r.record(*cons, 1.0, Eigen::Vector2d(0.0, -1.0), Eigen::Vector2d(1.0, 0.0), Vector::Zero(1));
  EXPECT_NEAR(r.max_pos(), 0.21, 1e-14);
  EXPECT_NEAR(r.max_vel(), 1.1, 1e-14);
}
