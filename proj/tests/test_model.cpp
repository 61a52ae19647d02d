#include <gtest/gtest.h>

#include "support.hpp"

using namespace hysens;
using namespace hysens::test;

namespace {

std::shared_ptr<FnModel> free_fall_2d() {
  // rho = g
  return std::make_shared<FnModel>(
      2, 1, [](double, const Vector&, const Vector&) { return Matrix(Matrix::Identity(2, 2)); },
      [](double, const Vector&, const Vector&, const Vector& rho) {
        return Vector(Eigen::Vector2d(0.0, -rho[0]));
      },
      [](const Vector&) { return fixed_initial(Vector::Zero(2), Vector::Zero(2), 1); });
}

// Configuration-dependent mass matrix with velocity and parameter coupling.
std::shared_ptr<FnModel> nonlinear_model() {
  return std::make_shared<FnModel>(
      2, 2,
      [](double, const Vector& q, const Vector&) {
        Matrix M(2, 2);
        M << 2 + q[0] * q[0], q[0] * q[1], q[0] * q[1], 3 + q[1] * q[1];
        return M;
      },
      [](double t, const Vector& q, const Vector& v, const Vector& rho) {
        return Vector(Eigen::Vector2d(-rho[0] * q[0] + std::sin(v[1]) + t,
                                      -rho[1] * q[1] * v[0] + q[0] * q[0]));
      },
      [](const Vector&) { return fixed_initial(Vector::Zero(2), Vector::Zero(2), 2); });
}

}  // namespace

TEST(Model, FreeFallAcceleration) {
  const Vector a = eom_rhs(*free_fall_2d(), 0.0, Vector::Zero(2), Vector::Zero(2),
                           Vector::Constant(1, 9.81));
  EXPECT_DOUBLE_EQ(a[0], 0.0);
  EXPECT_DOUBLE_EQ(a[1], -9.81);
}

TEST(Model, ScalarOscillator) {
  // M = [m], F = -k q with m = 2, k = 8, q = 1 -> vdot = -4.
  FnModel osc(
      1, 1, [](double, const Vector&, const Vector&) { return Matrix::Constant(1, 1, 2.0); },
      [](double, const Vector& q, const Vector&, const Vector&) { return Vector(-8.0 * q); },
      [](const Vector&) { return fixed_initial(Vector::Zero(1), Vector::Zero(1), 1); });
  EXPECT_DOUBLE_EQ(eom_rhs(osc, 0.0, Vector::Ones(1), Vector::Zero(1), Vector::Zero(1))[0], -4.0);
  const AccelerationJacobians J =
      eom_jacobians(osc, 0.0, Vector::Ones(1), Vector::Zero(1), Vector::Zero(1));
  EXPECT_NEAR(J.f_q(0, 0), -4.0, 1e-8);  // -M^-1 k
  EXPECT_NEAR(J.f_v(0, 0), 0.0, 1e-12);
}

TEST(Model, SingularMassReportsTimeAndCondition) {
  FnModel bad(
      2, 1, [](double, const Vector&, const Vector&) { return Matrix(Matrix::Zero(2, 2)); },
      [](double, const Vector&, const Vector&, const Vector&) { return Vector(Vector::Zero(2)); },
      [](const Vector&) { return fixed_initial(Vector::Zero(2), Vector::Zero(2), 1); });
  try {
    (void)eom_rhs(bad, 1.25, Vector::Zero(2), Vector::Zero(2), Vector::Zero(1));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("1.25"), std::string::npos) << msg;
    EXPECT_NE(msg.find("condition"), std::string::npos) << msg;
  }
  FnModel ill(
      2, 1,
      [](double, const Vector&, const Vector&) {
        Matrix M = Matrix::Identity(2, 2);
        M(1, 1) = 1e-14;
        return M;
      },
      [](double, const Vector&, const Vector&, const Vector&) { return Vector(Vector::Zero(2)); },
      [](const Vector&) { return fixed_initial(Vector::Zero(2), Vector::Zero(2), 1); });
  EXPECT_THROW((void)eom_rhs(ill, 0.0, Vector::Zero(2), Vector::Zero(2), Vector::Zero(1)),
               NumericalError);
}

TEST(Model, FreeFallParameterJacobian) {
  const AccelerationJacobians J = eom_jacobians(*free_fall_2d(), 0.0, Vector::Zero(2),
                                                Vector::Zero(2), Vector::Constant(1, 9.81));
  EXPECT_NEAR(J.f_rho(0, 0), 0.0, 1e-10);
  EXPECT_NEAR(J.f_rho(1, 0), -1.0, 1e-8);
}

TEST(Model, JacobiansMatchFiniteDifferencesWithConfigurationDependentMass) {
  const auto model = nonlinear_model();
  const double t = 0.3;
  const Vector q = Eigen::Vector2d(0.7, -0.4), v = Eigen::Vector2d(0.2, 1.1),
               rho = Eigen::Vector2d(5.0, 2.0);
  const AccelerationJacobians J = eom_jacobians(*model, t, q, v, rho);
  const Matrix Fq = central_jacobian([&](const Vector& x) { return eom_rhs(*model, t, x, v, rho); }, q);
  const Matrix Fv = central_jacobian([&](const Vector& x) { return eom_rhs(*model, t, q, x, rho); }, v);
  const Matrix Fr = central_jacobian([&](const Vector& x) { return eom_rhs(*model, t, q, v, x); }, rho);
  EXPECT_LT((J.f_q - Fq).norm() / Fq.norm(), 1e-6);
  EXPECT_LT((J.f_v - Fv).norm() / Fv.norm(), 1e-6);
  EXPECT_LT((J.f_rho - Fr).norm() / Fr.norm(), 1e-6);

  // M f_zeta + M_zeta vdot = F_zeta
  const Vector a = eom_rhs(*model, t, q, v, rho);
  const Matrix M = model->mass(t, q, rho);
  const Matrix lhs = M * J.f_q + model->mass_q_times(t, q, rho, a);
  EXPECT_LT((lhs - model->force_q(t, q, v, rho)).norm(), 1e-6);
}

TEST(Model, LinearForceJacobians) {
  // M constant, F = -k q -> f_q = -M^-1 k I, f_v = 0.
  const double k = 3.0;
  FnModel lin(
      2, 1,
      [](double, const Vector&, const Vector&) { return Matrix(2.0 * Matrix::Identity(2, 2)); },
      [k](double, const Vector& q, const Vector&, const Vector&) { return Vector(-k * q); },
      [](const Vector&) { return fixed_initial(Vector::Zero(2), Vector::Zero(2), 1); });
  const AccelerationJacobians J =
      eom_jacobians(lin, 0.0, Eigen::Vector2d(1, 2), Eigen::Vector2d(0, 1), Vector::Zero(1));
  EXPECT_LT((J.f_q + k / 2.0 * Matrix::Identity(2, 2)).norm(), 1e-8);
  EXPECT_LT(J.f_v.norm(), 1e-10);
}

TEST(Model, CostGradientSelectorRowForIntegratedVelocity) {
  const GalleryProblem pb = register_gallery().make("five-bar");
  const Mode& mode = pb.system.modes[0];
  const InitialState s0 = five_bar_initial_conditions(pb, pb.rho.rho);
  const Vector v = Vector::LinSpaced(6, -0.3, 0.4);
  const CostGradients g =
      cost_density_gradients(mode, pb.cost("int-vy2"), 0.0, s0.q0, v, pb.rho.rho);
  EXPECT_DOUBLE_EQ(g.value[0], v[3]);
  RowVector sel = RowVector::Zero(6);
  sel[3] = 1.0;
  EXPECT_EQ(g.v, Matrix(sel));
  EXPECT_EQ(g.q, Matrix(Matrix::Zero(1, 6)));
}

TEST(Model, CostGradientPureChainRuleForAcceleration) {
  const GalleryProblem pb = register_gallery().make("five-bar");
  const Mode& mode = pb.system.modes[0];
  const InitialState s0 = five_bar_initial_conditions(pb, pb.rho.rho);
  const Vector v = Vector::LinSpaced(6, -0.3, 0.4);
  const ModeEval ev = mode.evaluate(0.0, s0.q0, v, pb.rho.rho);
  const CostGradients g =
      cost_density_gradients(mode, pb.cost("int-ay2"), 0.0, s0.q0, v, pb.rho.rho);
  EXPECT_DOUBLE_EQ(g.value[0], ev.vdot[3]);
  EXPECT_LT((g.q - ev.jac.f_q.row(3)).norm(), 1e-12 * (1 + ev.jac.f_q.norm()));
  EXPECT_LT((g.v - ev.jac.f_v.row(3)).norm(), 1e-12 * (1 + ev.jac.f_v.norm()));
}

TEST(Model, SquaredCostGradientsMatchFiniteDifferences) {
  // g = vdot_y^2 + v_y^2 composed through the dynamics, on a model without
  // penalty stiffness so that the FD oracle resolves it to 1e-6.
  const auto model = nonlinear_model();
  const auto sys = single_mode(model);
  const ComponentCost cost({{ComponentCost::Var::Acceleration, 1, 2, 1.0},
                            {ComponentCost::Var::Velocity, 1, 2, 1.0}},
                           {});
  const double t = 0.1;
  const Vector q = Eigen::Vector2d(0.7, -0.4), v = Eigen::Vector2d(0.2, 1.1),
               rho = Eigen::Vector2d(5.0, 2.0);
  const auto value = [&](const Vector& qq, const Vector& vv, const Vector& rr) {
    return cost_density(sys.modes[0], cost, t, qq, vv, rr);
  };
  const CostGradients g = cost_density_gradients(sys.modes[0], cost, t, q, v, rho);
  const Matrix gq = central_jacobian([&](const Vector& x) { return value(x, v, rho); }, q);
  const Matrix gv = central_jacobian([&](const Vector& x) { return value(q, x, rho); }, v);
  const Matrix gr = central_jacobian([&](const Vector& x) { return value(q, v, x); }, rho);
  EXPECT_LT(max_rel_err(g.q, gq), 1e-6);
  EXPECT_LT(max_rel_err(g.v, gv), 1e-6);
  EXPECT_LT(max_rel_err(g.rho, gr), 1e-6);
}

TEST(Model, TerminalGradients) {
  const auto sys = single_mode(nonlinear_model());
  const Vector q = Eigen::Vector2d(0.7, -0.4), v = Eigen::Vector2d(0.2, 1.1),
               rho = Eigen::Vector2d(5.0, 2.0);
  // w = y(tF)
  const ComponentCost wy({}, {{ComponentCost::Var::Position, 1, 1, 1.0}});
  CostGradients g = terminal_cost_gradients(sys.modes[0], wy, 1.0, q, v, rho);
  EXPECT_EQ(g.q, Matrix(RowVector(Eigen::RowVector2d(0, 1))));
  EXPECT_EQ(g.v.norm(), 0.0);
  EXPECT_EQ(g.rho.norm(), 0.0);
  // w = 0
  const ComponentCost zero({{ComponentCost::Var::Velocity, 0, 1, 1.0}}, {});
  g = terminal_cost_gradients(sys.modes[0], zero, 1.0, q, v, rho);
  EXPECT_EQ(g.value[0], 0.0);
  EXPECT_EQ(g.q.norm() + g.v.norm() + g.rho.norm(), 0.0);
  // w = |v|^2 -> 2 v^T
  const FnCost vsq(1, [](const CostPoint&) { return Vector(Vector::Zero(1)); },
                   [](double, const Vector&, const Vector& vv, const Vector&) {
                     return Vector(Vector::Constant(1, vv.squaredNorm()));
                   });
  g = terminal_cost_gradients(sys.modes[0], vsq, 1.0, q, v, rho);
  EXPECT_LT((g.v - 2.0 * v.transpose()).norm(), 1e-8);
}

TEST(Model, ComponentCostAnalyticPartialsMatchFallback) {
  // The generic finite-difference partials are the oracle for the analytic ones.
  class Fallback final : public CostFunctional {
   public:
    explicit Fallback(const ComponentCost& c) : c_(c) {}
    Index nc() const override { return c_.nc(); }
    Index nu() const override { return c_.nu(); }
    Vector g(const CostPoint& pt, const Vector& u) const override { return c_.g(pt, u); }
    Vector u(const CostPoint& pt) const override { return c_.u(pt); }
    Vector w(double t, const Vector& q, const Vector& v, const Vector& rho,
             const Vector& u) const override {
      return c_.w(t, q, v, rho, u);
    }

   private:
    const ComponentCost& c_;
  };
  using V = ComponentCost::Var;
  const ComponentCost cost({{V::Acceleration, 1, 2, 1.5}, {V::Velocity, 0, 2, -0.5},
                            {V::Position, 1, 1, 2.0}, {V::Acceleration, 0, 1, 0.3}},
                           {{V::Position, 0, 2, 1.0}, {V::Velocity, 1, 1, 4.0}});
  const Fallback fb(cost);
  CostPoint pt{0.2, Eigen::Vector2d(0.3, -0.8), Eigen::Vector2d(1.2, 0.4),
               Eigen::Vector2d(-2.0, 0.7), Eigen::Vector2d(1.0, 2.0), Vector(0)};
  const Vector u = cost.u(pt);
  const CostPartials a = cost.g_partials(pt, u), b = fb.g_partials(pt, u);
  EXPECT_LT((a.q - b.q).norm(), 1e-8);
  EXPECT_LT((a.v - b.v).norm(), 1e-8);
  EXPECT_LT((a.u - b.u).norm(), 1e-8);
  EXPECT_LT((a.vdot - b.vdot).norm(), 1e-8);
  const CostPartials au = cost.u_partials(pt), bu = fb.u_partials(pt);
  EXPECT_LT((au.vdot - bu.vdot).norm(), 1e-8);
  const CostPartials aw = cost.w_partials(1.0, pt.q, pt.v, pt.rho, u),
                     bw = fb.w_partials(1.0, pt.q, pt.v, pt.rho, u);
  EXPECT_LT((aw.q - bw.q).norm(), 1e-8);
  EXPECT_LT((aw.v - bw.v).norm(), 1e-8);
}
