#include "hysens/constrained.hpp"

#include <algorithm>
#include <sstream>

#include "hysens/finite_difference.hpp"

namespace hysens {

Matrix PenaltyConfig::alpha_matrix(Index m) const {
  if (alpha.size() == 0) return alpha_scale * Matrix::Identity(m, m);
  return alpha;
}

void PenaltyConfig::validate(Index m) const {
  std::ostringstream msg;
  if (alpha.size() == 0) {
    if (!(alpha_scale >= 0.0)) msg << "alpha must be >= 0; ";
  } else {
    if (alpha.rows() != m || alpha.cols() != m) msg << "alpha must be " << m << "x" << m << "; ";
    else if (!alpha.isApprox(alpha.transpose()) || alpha.ldlt().info() != Eigen::Success ||
             !alpha.ldlt().isPositive())
      msg << "alpha must be symmetric positive definite; ";
  }
  if (!(xi >= 0.0)) msg << "xi must be >= 0; ";
  if (!(omega > 0.0)) msg << "omega must be > 0; ";
  if (!msg.str().empty()) throw ValidationError("invalid penalty config: " + msg.str());
}

namespace {

// Stabilized acceleration-level residual s = Phi_q a + gamma + 2 xi omega Phi_dot + omega^2 Phi.
Vector stabilized(const ConstraintSet& cons, double t, const Vector& q, const Vector& v,
                  const Vector& rho, const Matrix& G, const Vector& a, const PenaltyConfig& p) {
  const Vector phidot = G * v + cons.phi_t(t, q, rho);
  return G * a + cons.gamma(t, q, v, rho) + 2.0 * p.xi * p.omega * phidot +
         p.omega * p.omega * cons.phi(t, q, rho);
}

}  // namespace

Vector penalty_rhs(const MultibodyModel& model, const ConstraintSet& cons, double t,
                   const Vector& q, const Vector& v, const Vector& rho, const PenaltyConfig& pcfg) {
  const Matrix G = cons.phi_q(t, q, rho);
  const Matrix alpha = pcfg.alpha_matrix(cons.m());
  const Matrix Mbar = model.mass(t, q, rho) + G.transpose() * alpha * G;
  const Vector zero = Vector::Zero(q.size());
  const Vector Fbar =
      model.force(t, q, v, rho) - G.transpose() * alpha * stabilized(cons, t, q, v, rho, G, zero, pcfg);
  return SpdSolver(Mbar, t, "penalty mass matrix").solve(Fbar);
}

Vector penalty_multipliers(const ConstraintSet& cons, double t, const Vector& q, const Vector& v,
                           const Vector& vdot, const Vector& rho, const PenaltyConfig& pcfg) {
  const Matrix G = cons.phi_q(t, q, rho);
  return pcfg.alpha_matrix(cons.m()) * stabilized(cons, t, q, v, rho, G, vdot, pcfg);
}

AccelerationJacobians penalty_jacobians(const MultibodyModel& model, const ConstraintSet& cons,
                                        double t, const Vector& q, const Vector& v,
                                        const Vector& rho, const PenaltyConfig& pcfg) {
  // Residual R = M a - F + Phi_q^T alpha s(a) vanishes along the solution, so
  // f_zeta = -Mbar^-1 dR/dzeta with a held fixed.
  const Matrix G = cons.phi_q(t, q, rho);
  const Matrix alpha = pcfg.alpha_matrix(cons.m());
  const Matrix Mbar = model.mass(t, q, rho) + G.transpose() * alpha * G;
  const SpdSolver solver(Mbar, t, "penalty mass matrix");
  const Vector zero = Vector::Zero(q.size());
  const Vector a = solver.solve(model.force(t, q, v, rho) -
                                G.transpose() * alpha * stabilized(cons, t, q, v, rho, G, zero, pcfg));
  const Vector s = stabilized(cons, t, q, v, rho, G, a, pcfg);
  const Vector as = alpha * s;
  const double c1 = 2.0 * pcfg.xi * pcfg.omega, c0 = pcfg.omega * pcfg.omega;
  const Matrix GtA = G.transpose() * alpha;

  const Matrix s_q = cons.phi_q_times_q(t, q, rho, a) + cons.gamma_q(t, q, v, rho) +
                     c1 * (cons.phi_q_times_q(t, q, rho, v) + cons.phi_t_q(t, q, rho)) + c0 * G;
  const Matrix s_v = cons.gamma_v(t, q, v, rho) + c1 * G;
  const Matrix s_rho = cons.phi_q_times_rho(t, q, rho, a) + cons.gamma_rho(t, q, v, rho) +
                       c1 * (cons.phi_q_times_rho(t, q, rho, v) + cons.phi_t_rho(t, q, rho)) +
                       c0 * cons.phi_rho(t, q, rho);

  const Matrix R_q = model.mass_q_times(t, q, rho, a) - model.force_q(t, q, v, rho) +
                     cons.phi_qT_times_q(t, q, rho, as) + GtA * s_q;
  const Matrix R_v = -model.force_v(t, q, v, rho) + GtA * s_v;
  const Matrix R_rho = model.mass_rho_times(t, q, rho, a) - model.force_rho(t, q, v, rho) +
                       cons.phi_qT_times_rho(t, q, rho, as) + GtA * s_rho;

  AccelerationJacobians J;
  J.f_q = -solver.solve(R_q);
  J.f_v = -solver.solve(R_v);
  J.f_rho = -solver.solve(R_rho);
  return J;
}

KktSolver::KktSolver(const Matrix& M, const Matrix& G, double t, const char* what)
    : n_(M.rows()), m_(G.rows()) {
  Matrix K = Matrix::Zero(n_ + m_, n_ + m_);
  K.topLeftCorner(n_, n_) = M;
  K.topRightCorner(n_, m_) = G.transpose();
  K.bottomLeftCorner(m_, n_) = G;
  lu_.compute(K);
  // rcond alone misses exactly zero pivots, so check the U diagonal as well.
  const Vector piv = lu_.matrixLU().diagonal().cwiseAbs();
  const double rc = piv.minCoeff() > 1e-14 * piv.maxCoeff() ? lu_.rcond() : 0.0;
  if (!(rc > 1e-14)) {
    const Eigen::FullPivLU<Matrix> full(K);
    std::ostringstream msg;
    msg << "singular " << what << " at t=" << t << " (rank " << full.rank() << " of "
        << (n_ + m_) << ", condition estimate " << (rc > 0 ? 1.0 / rc : INFINITY) << ")";
    throw NumericalError(msg.str());
  }
}

DaeSolution dae_solve(const MultibodyModel& model, const ConstraintSet* cons, double t,
                      const Vector& q, const Vector& v, const Vector& rho) {
  if (cons == nullptr || cons->m() == 0) {
    return {eom_rhs(model, t, q, v, rho), Vector(0)};
  }
  const Index n = q.size(), m = cons->m();
  const KktSolver kkt(model.mass(t, q, rho), cons->phi_q(t, q, rho), t);
  Vector rhs(n + m);
  rhs << model.force(t, q, v, rho), -cons->gamma(t, q, v, rho);
  const Vector sol = kkt.solve(rhs);
  return {sol.head(n), sol.tail(m)};
}

AccelerationJacobians dae_jacobians(const MultibodyModel& model, const ConstraintSet* cons,
                                    double t, const Vector& q, const Vector& v, const Vector& vdot,
                                    const Vector& mu, const Vector& rho) {
  if (cons == nullptr || cons->m() == 0) return eom_jacobians(model, t, q, v, rho);
  const Index n = q.size(), m = cons->m(), p = rho.size();
  const KktSolver kkt(model.mass(t, q, rho), cons->phi_q(t, q, rho), t);

  Matrix rhs(n + m, n + n + p);
  rhs.block(0, 0, n, n) = model.force_q(t, q, v, rho) - model.mass_q_times(t, q, rho, vdot) -
                          cons->phi_qT_times_q(t, q, rho, mu);
  rhs.block(n, 0, m, n) = -cons->gamma_q(t, q, v, rho) - cons->phi_q_times_q(t, q, rho, vdot);
  rhs.block(0, n, n, n) = model.force_v(t, q, v, rho);
  rhs.block(n, n, m, n) = -cons->gamma_v(t, q, v, rho);
  rhs.block(0, 2 * n, n, p) = model.force_rho(t, q, v, rho) -
                              model.mass_rho_times(t, q, rho, vdot) -
                              cons->phi_qT_times_rho(t, q, rho, mu);
  rhs.block(n, 2 * n, m, p) =
      -cons->gamma_rho(t, q, v, rho) - cons->phi_q_times_rho(t, q, rho, vdot);
  const Matrix sol = kkt.solve(rhs);

  AccelerationJacobians J;
  J.f_q = sol.block(0, 0, n, n);
  J.f_v = sol.block(0, n, n, n);
  J.f_rho = sol.block(0, 2 * n, n, p);
  J.mu_q = sol.block(n, 0, m, n);
  J.mu_v = sol.block(n, n, m, n);
  J.mu_rho = sol.block(n, 2 * n, m, p);
  return J;
}

ImpulseSolution impulse_solve(const MultibodyModel& model, const ConstraintSet& cons, double t,
                              const Vector& q, const Vector& v_minus, const Vector& rho) {
  const Index n = q.size(), m = cons.m();
  const Matrix M = model.mass(t, q, rho);
  const KktSolver kkt(M, cons.phi_q(t, q, rho), t, "impulse KKT matrix");
  Vector rhs(n + m);
  rhs << M * v_minus, -cons.phi_t(t, q, rho);
  const Vector sol = kkt.solve(rhs);
  return {sol.head(n), sol.tail(m)};
}

ImpulseJacobians impulse_jacobians(const MultibodyModel& model, const ConstraintSet& cons,
                                   double t, const Vector& q, const Vector& v_minus,
                                   const Vector& rho) {
  const Index n = q.size(), m = cons.m(), p = rho.size();
  const Matrix M = model.mass(t, q, rho);
  const KktSolver kkt(M, cons.phi_q(t, q, rho), t, "impulse KKT matrix");
  Vector rhs0(n + m);
  rhs0 << M * v_minus, -cons.phi_t(t, q, rho);
  const Vector sol0 = kkt.solve(rhs0);
  const Vector vp = sol0.head(n), dmu = sol0.tail(m);
  const Vector dv = vp - v_minus;

  // Residual: M (v+ - v-) + Phi_q^T dmu = 0, Phi_q v+ + Phi_t = 0.
  Matrix rhs(n + m, n + n + p);
  rhs.block(0, 0, n, n) =
      -(model.mass_q_times(t, q, rho, dv) + cons.phi_qT_times_q(t, q, rho, dmu));
  rhs.block(n, 0, m, n) = -(cons.phi_q_times_q(t, q, rho, vp) + cons.phi_t_q(t, q, rho));
  rhs.block(0, n, n, n) = M;
  rhs.block(n, n, m, n).setZero();
  rhs.block(0, 2 * n, n, p) =
      -(model.mass_rho_times(t, q, rho, dv) + cons.phi_qT_times_rho(t, q, rho, dmu));
  rhs.block(n, 2 * n, m, p) = -(cons.phi_q_times_rho(t, q, rho, vp) + cons.phi_t_rho(t, q, rho));
  const Matrix sol = kkt.solve(rhs);

  // Explicit time dependence is rare; central differences suffice.
  const Vector d_t = fd::derivative(
      [&](double s) -> Vector {
        const ImpulseSolution r = impulse_solve(model, cons, s, q, v_minus, rho);
        Vector out(n + m);
        out << r.v_plus, r.delta_mu;
        return out;
      },
      t);

  ImpulseJacobians J;
  J.v_q = sol.block(0, 0, n, n);
  J.v_v = sol.block(0, n, n, n);
  J.v_rho = sol.block(0, 2 * n, n, p);
  J.mu_q = sol.block(n, 0, m, n);
  J.mu_v = sol.block(n, n, m, n);
  J.mu_rho = sol.block(n, 2 * n, m, p);
  J.v_t = d_t.head(n);
  J.mu_t = d_t.tail(m);
  return J;
}

void ConstraintResiduals::record(const ConstraintSet& cons, double time, const Vector& q,
                                 const Vector& v, const Vector& rho) {
  t.push_back(time);
  pos.push_back(cons.phi(time, q, rho).lpNorm<Eigen::Infinity>());
  vel.push_back(cons.velocity_residual(time, q, v, rho).lpNorm<Eigen::Infinity>());
}

double ConstraintResiduals::max_pos() const {
  return pos.empty() ? 0.0 : *std::max_element(pos.begin(), pos.end());
}

double ConstraintResiduals::max_vel() const {
  return vel.empty() ? 0.0 : *std::max_element(vel.begin(), vel.end());
}

}  // namespace hysens
