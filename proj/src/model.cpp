#include "hysens/model.hpp"

#include <sstream>

#include "hysens/finite_difference.hpp"

namespace hysens {

// ---- MultibodyModel finite-difference defaults ----

Matrix MultibodyModel::mass_q_times(double t, const Vector& q, const Vector& rho,
                                    const Vector& a) const {
  return fd::jacobian([&](const Vector& x) -> Vector { return mass(t, x, rho) * a; }, q);
}

Matrix MultibodyModel::mass_rho_times(double t, const Vector& q, const Vector& rho,
                                      const Vector& a) const {
  return fd::jacobian([&](const Vector& x) -> Vector { return mass(t, q, x) * a; }, rho);
}

Matrix MultibodyModel::force_q(double t, const Vector& q, const Vector& v,
                               const Vector& rho) const {
  return fd::jacobian([&](const Vector& x) { return force(t, x, v, rho); }, q);
}

Matrix MultibodyModel::force_v(double t, const Vector& q, const Vector& v,
                               const Vector& rho) const {
  return fd::jacobian([&](const Vector& x) { return force(t, q, x, rho); }, v);
}

Matrix MultibodyModel::force_rho(double t, const Vector& q, const Vector& v,
                                 const Vector& rho) const {
  return fd::jacobian([&](const Vector& x) { return force(t, q, v, x); }, rho);
}

// ---- ConstraintSet finite-difference defaults ----

Matrix ConstraintSet::phi_q(double t, const Vector& q, const Vector& rho) const {
  return fd::jacobian([&](const Vector& x) { return phi(t, x, rho); }, q);
}

Vector ConstraintSet::phi_t(double t, const Vector& q, const Vector& rho) const {
  return fd::derivative([&](double s) { return phi(s, q, rho); }, t);
}

Matrix ConstraintSet::phi_rho(double t, const Vector& q, const Vector& rho) const {
  return fd::jacobian([&](const Vector& x) { return phi(t, q, x); }, rho);
}

Vector ConstraintSet::velocity_residual(double t, const Vector& q, const Vector& v,
                                        const Vector& rho) const {
  return phi_q(t, q, rho) * v + phi_t(t, q, rho);
}

Vector ConstraintSet::gamma(double t, const Vector& q, const Vector& v, const Vector& rho) const {
  // gamma = d/dt (Phi_q v + Phi_t) along (q' = v, v' = 0).
  return phi_q_times_q(t, q, rho, v) * v + 2.0 * phi_t_q(t, q, rho) * v +
         fd::derivative([&](double s) { return phi_t(s, q, rho); }, t);
}

Matrix ConstraintSet::phi_q_times_q(double t, const Vector& q, const Vector& rho,
                                    const Vector& a) const {
  return fd::jacobian([&](const Vector& x) -> Vector { return phi_q(t, x, rho) * a; }, q);
}

Matrix ConstraintSet::phi_q_times_rho(double t, const Vector& q, const Vector& rho,
                                      const Vector& a) const {
  return fd::jacobian([&](const Vector& x) -> Vector { return phi_q(t, q, x) * a; }, rho);
}

Matrix ConstraintSet::phi_qT_times_q(double t, const Vector& q, const Vector& rho,
                                     const Vector& w) const {
  return fd::jacobian([&](const Vector& x) -> Vector { return phi_q(t, x, rho).transpose() * w; },
                      q);
}

Matrix ConstraintSet::phi_qT_times_rho(double t, const Vector& q, const Vector& rho,
                                       const Vector& w) const {
  return fd::jacobian([&](const Vector& x) -> Vector { return phi_q(t, q, x).transpose() * w; },
                      rho);
}

Matrix ConstraintSet::phi_t_q(double t, const Vector& q, const Vector& rho) const {
  return fd::jacobian([&](const Vector& x) { return phi_t(t, x, rho); }, q);
}

Matrix ConstraintSet::phi_t_rho(double t, const Vector& q, const Vector& rho) const {
  return fd::jacobian([&](const Vector& x) { return phi_t(t, q, x); }, rho);
}

Matrix ConstraintSet::gamma_q(double t, const Vector& q, const Vector& v,
                              const Vector& rho) const {
  return fd::jacobian([&](const Vector& x) { return gamma(t, x, v, rho); }, q);
}

Matrix ConstraintSet::gamma_v(double t, const Vector& q, const Vector& v,
                              const Vector& rho) const {
  return fd::jacobian([&](const Vector& x) { return gamma(t, q, x, rho); }, v);
}

Matrix ConstraintSet::gamma_rho(double t, const Vector& q, const Vector& v,
                                const Vector& rho) const {
  return fd::jacobian([&](const Vector& x) { return gamma(t, q, v, x); }, rho);
}

// ---- CostFunctional finite-difference defaults ----

namespace {

template <class Fn>
CostPartials partials_of(Fn&& fn, const CostPoint& pt, const Vector& u) {
  CostPartials P;
  P.q = fd::jacobian([&](const Vector& x) { CostPoint c = pt; c.q = x; return fn(c, u); }, pt.q);
  P.v = fd::jacobian([&](const Vector& x) { CostPoint c = pt; c.v = x; return fn(c, u); }, pt.v);
  P.vdot = fd::jacobian(
      [&](const Vector& x) { CostPoint c = pt; c.vdot = x; return fn(c, u); }, pt.vdot);
  P.rho = fd::jacobian(
      [&](const Vector& x) { CostPoint c = pt; c.rho = x; return fn(c, u); }, pt.rho);
  P.mu = fd::jacobian([&](const Vector& x) { CostPoint c = pt; c.mu = x; return fn(c, u); },
                      pt.mu);
  P.u = fd::jacobian([&](const Vector& x) { return fn(pt, x); }, u);
  return P;
}

}  // namespace

CostPartials CostFunctional::g_partials(const CostPoint& pt, const Vector& uval) const {
  return partials_of([this](const CostPoint& c, const Vector& x) { return g(c, x); }, pt, uval);
}

CostPartials CostFunctional::u_partials(const CostPoint& pt) const {
  const Vector none(0);
  CostPartials P =
      partials_of([this](const CostPoint& c, const Vector&) { return u(c); }, pt, none);
  return P;
}

CostPartials CostFunctional::w_partials(double t, const Vector& q, const Vector& v,
                                        const Vector& rho, const Vector& uval) const {
  CostPartials P;
  P.q = fd::jacobian([&](const Vector& x) { return w(t, x, v, rho, uval); }, q);
  P.v = fd::jacobian([&](const Vector& x) { return w(t, q, x, rho, uval); }, v);
  P.rho = fd::jacobian([&](const Vector& x) { return w(t, q, v, x, uval); }, rho);
  P.u = fd::jacobian([&](const Vector& x) { return w(t, q, v, rho, x); }, uval);
  return P;
}

// ---- Equations of motion ----

SpdSolver::SpdSolver(const Matrix& a, double t, const char* what) : ldlt_(a) {
  const Vector d = ldlt_.vectorD().cwiseAbs();
  const double rc = d.size() > 0 && d.minCoeff() > 1e-14 * d.maxCoeff() ? ldlt_.rcond() : 0.0;
  if (ldlt_.info() != Eigen::Success || !(rc > 1.0 / kMaxConditionEstimate) ||
      !ldlt_.isPositive()) {
    std::ostringstream msg;
    msg << "singular " << what << " at t=" << t << " (condition estimate "
        << (rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity()) << ")";
    throw NumericalError(msg.str());
  }
}

Vector eom_rhs(const MultibodyModel& model, double t, const Vector& q, const Vector& v,
               const Vector& rho) {
  const SpdSolver M(model.mass(t, q, rho), t);
  return M.solve(model.force(t, q, v, rho));
}

AccelerationJacobians eom_jacobians(const MultibodyModel& model, double t, const Vector& q,
                                    const Vector& v, const Vector& rho) {
  const SpdSolver M(model.mass(t, q, rho), t);
  const Vector a = M.solve(model.force(t, q, v, rho));
  AccelerationJacobians J;
  J.f_q = M.solve(model.force_q(t, q, v, rho) - model.mass_q_times(t, q, rho, a));
  J.f_v = M.solve(model.force_v(t, q, v, rho));
  J.f_rho = M.solve(model.force_rho(t, q, v, rho) - model.mass_rho_times(t, q, rho, a));
  return J;
}

namespace {

// Adds B * (dependence on vdot and mu) to the direct partial A for one block.
Matrix chain(const Matrix& direct, const Matrix& d_vdot, const Matrix& f_zeta, const Matrix& d_mu,
             const Matrix& mu_zeta) {
  Matrix out = direct;
  if (d_vdot.size() > 0) out += d_vdot * f_zeta;
  if (d_mu.size() > 0 && mu_zeta.size() > 0) out += d_mu * mu_zeta;
  return out;
}

struct UTotal {
  Matrix q, v, rho;
};

UTotal total_u(const CostFunctional& cost, const CostPoint& pt, const AccelerationJacobians& jac) {
  const CostPartials U = cost.u_partials(pt);
  return {chain(U.q, U.vdot, jac.f_q, U.mu, jac.mu_q), chain(U.v, U.vdot, jac.f_v, U.mu, jac.mu_v),
          chain(U.rho, U.vdot, jac.f_rho, U.mu, jac.mu_rho)};
}

}  // namespace

CostGradients assemble_cost_gradients(const CostFunctional& cost, const CostPoint& pt,
                                      const AccelerationJacobians& jac) {
  const Vector uval = cost.u(pt);
  const CostPartials G = cost.g_partials(pt, uval);
  CostGradients out;
  out.value = cost.g(pt, uval);
  out.q = chain(G.q, G.vdot, jac.f_q, G.mu, jac.mu_q);
  out.v = chain(G.v, G.vdot, jac.f_v, G.mu, jac.mu_v);
  out.rho = chain(G.rho, G.vdot, jac.f_rho, G.mu, jac.mu_rho);
  if (uval.size() > 0 && G.u.size() > 0) {
    const UTotal U = total_u(cost, pt, jac);
    out.q += G.u * U.q;
    out.v += G.u * U.v;
    out.rho += G.u * U.rho;
  }
  return out;
}

CostGradients assemble_terminal_gradients(const CostFunctional& cost, const CostPoint& pt,
                                          const AccelerationJacobians& jac) {
  const Vector uval = cost.u(pt);
  const CostPartials W = cost.w_partials(pt.t, pt.q, pt.v, pt.rho, uval);
  CostGradients out;
  out.value = cost.w(pt.t, pt.q, pt.v, pt.rho, uval);
  out.q = W.q;
  out.v = W.v;
  out.rho = W.rho;
  if (uval.size() > 0 && W.u.size() > 0) {
    const UTotal U = total_u(cost, pt, jac);
    out.q += W.u * U.q;
    out.v += W.u * U.v;
    out.rho += W.u * U.rho;
  }
  return out;
}

}  // namespace hysens
