#include "hysens/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hysens/finite_difference.hpp"

namespace hysens {

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::VelocityJump: return "velocity-jump";
    case EventKind::RhsSwitch: return "rhs-switch";
    case EventKind::ConstrainedElastic: return "constrained-elastic";
    case EventKind::ConstrainedInelastic: return "constrained-inelastic";
  }
  return "unknown";
}

Vector JumpFunction::h_t(double t, const Vector& q, const Vector& v, const Vector& rho) const {
  return fd::derivative([&](double s) { return h(s, q, v, rho); }, t);
}

Matrix JumpFunction::h_q(double t, const Vector& q, const Vector& v, const Vector& rho) const {
  return fd::jacobian([&](const Vector& x) { return h(t, x, v, rho); }, q);
}

Matrix JumpFunction::h_v(double t, const Vector& q, const Vector& v, const Vector& rho) const {
  return fd::jacobian([&](const Vector& x) { return h(t, q, x, rho); }, v);
}

Matrix JumpFunction::h_rho(double t, const Vector& q, const Vector& v, const Vector& rho) const {
  return fd::jacobian([&](const Vector& x) { return h(t, q, v, x); }, rho);
}

RowVector EventSpec::gradient(const Vector& q) const {
  if (dr_dq) return dr_dq(q);
  return fd::jacobian([&](const Vector& x) { return Vector::Constant(1, r(x)); }, q).row(0);
}

RowVector event_time_row(const RowVector& dr_dq, const Vector& v_minus) {
  const double rdot = dr_dq.dot(v_minus);
  const double scale = dr_dq.norm() * v_minus.norm();
  if (!(std::abs(rdot) >= 1e-8 * scale) || scale == 0.0) {
    std::ostringstream msg;
    msg << "tangential crossing: |dr/dq . v-| = " << std::abs(rdot) << " below threshold "
        << 1e-8 * scale << " (grazing is not supported)";
    throw GrazingError(msg.str());
  }
  return -dr_dq / rdot;
}

RowVector event_time_sensitivity(const RowVector& dr_dq, const Matrix& Q_minus,
                                 const Vector& v_minus) {
  if (Q_minus.rows() != dr_dq.size() || v_minus.size() != dr_dq.size()) {
    throw ValidationError("event_time_sensitivity: dr/dq, Q- and v- sizes disagree");
  }
  return event_time_row(dr_dq, v_minus) * Q_minus;
}

namespace {

struct Partition {
  Matrix P_dof, P_dep;  // f x n, m x n selection matrices
};

Partition make_partition(const std::vector<Index>& dof, Index n) {
  std::vector<bool> is_dof(n, false);
  for (Index i : dof) {
    if (i < 0 || i >= n || is_dof[i]) throw ValidationError("dof indices must be unique and in range");
    is_dof[i] = true;
  }
  Partition P;
  P.P_dof = Matrix::Zero(static_cast<Index>(dof.size()), n);
  P.P_dep = Matrix::Zero(n - static_cast<Index>(dof.size()), n);
  for (std::size_t k = 0; k < dof.size(); ++k) P.P_dof(static_cast<Index>(k), dof[k]) = 1.0;
  Index r = 0;
  for (Index i = 0; i < n; ++i)
    if (!is_dof[i]) P.P_dep(r++, i) = 1.0;
  return P;
}

// LU of Phi_dep with a conditioning check.
Eigen::PartialPivLU<Matrix> factor_dep(const Matrix& phi_dep) {
  if (phi_dep.rows() != phi_dep.cols()) {
    std::ostringstream msg;
    msg << "dependent-coordinate block is " << phi_dep.rows() << "x" << phi_dep.cols()
        << "; the number of dependent coordinates must equal the number of constraints";
    throw ValidationError(msg.str());
  }
  Eigen::PartialPivLU<Matrix> lu(phi_dep);
  const Vector piv = lu.matrixLU().diagonal().cwiseAbs();
  const double rc = piv.minCoeff() > 1e-14 * piv.maxCoeff() ? lu.rcond() : 0.0;
  if (!(rc > 1e-13)) {
    std::ostringstream msg;
    msg << "singular dependent-coordinate constraint Jacobian (condition estimate "
        << (rc > 0 ? 1.0 / rc : INFINITY) << ")";
    throw NumericalError(msg.str());
  }
  return lu;
}

void check_context(const JumpContext& c) {
  const Index n = c.n, p = c.p, nc = c.nc;
  bool ok = c.v_minus.size() == n && c.v_plus.size() == n && c.a_minus.size() == n &&
            c.a_plus.size() == n && c.g_minus.size() == nc && c.g_plus.size() == nc &&
            c.tq.size() == n;
  const Index k = c.kind == EventKind::ConstrainedElastic ? static_cast<Index>(c.dof.size()) : n;
  ok = ok && c.h_t.size() == k && c.h_q.rows() == k && c.h_q.cols() == n && c.h_v.rows() == k &&
       c.h_v.cols() == k && c.h_rho.rows() == k && c.h_rho.cols() == p;
  if (c.kind == EventKind::ConstrainedElastic || c.kind == EventKind::ConstrainedInelastic) {
    ok = ok && c.phi_q.cols() == n && c.phi_rho.rows() == c.phi_q.rows() && c.phi_rho.cols() == p;
  }
  if (c.kind == EventKind::ConstrainedElastic) {
    ok = ok && c.J_q.rows() == c.phi_q.rows() && c.J_q.cols() == n &&
         c.J_rho.rows() == c.phi_q.rows() && c.J_rho.cols() == p;
  }
  if (!ok) throw ValidationError("jump context blocks have inconsistent sizes");
}

}  // namespace

JumpMatrix build_jump_matrix(const JumpContext& c) {
  check_context(c);
  const Index n = c.n, p = c.p, nc = c.nc, N = 2 * n + p + nc;
  const Index iQ = 0, iV = n, iG = 2 * n, iZ = 2 * n + p;
  JumpMatrix J;
  J.kind = c.kind;
  J.n = n;
  J.p = p;
  J.nc = nc;
  const Matrix I = Matrix::Identity(n, n);
  const Vector dv = c.v_plus - c.v_minus;
  J.ZQ = -(c.g_plus - c.g_minus) * c.tq;

  switch (c.kind) {
    case EventKind::VelocityJump:
    case EventKind::RhsSwitch: {
      J.QQ = I - dv * c.tq;
      J.QG = Matrix::Zero(n, p);
      J.VQ = c.h_q + (c.h_q * c.v_minus - c.a_plus + c.h_v * c.a_minus + c.h_t) * c.tq;
      J.VV = c.h_v;
      J.VG = c.h_rho;
      break;
    }
    case EventKind::ConstrainedElastic: {
      const Partition P = make_partition(c.dof, n);
      const auto lu = factor_dep(c.phi_q * P.P_dep.transpose());
      const Matrix phi_dof = c.phi_q * P.P_dof.transpose();
      J.R_plus = -lu.solve(phi_dof);
      J.D = -lu.solve(c.phi_rho);
      J.Rbar_plus = -lu.solve(c.J_q);
      J.C = -lu.solve(c.J_rho);
      const Matrix A = P.P_dof * (I - dv * c.tq);
      J.QQ = P.P_dof.transpose() * A + P.P_dep.transpose() * (J.R_plus * A);
      J.QG = P.P_dep.transpose() * J.D;
      const Matrix B = c.h_q + (c.h_q * c.v_minus - P.P_dof * c.a_plus +
                                c.h_v * (P.P_dof * c.a_minus) + c.h_t) *
                                   c.tq;
      const Matrix HvP = c.h_v * P.P_dof;
      J.K = J.C + J.R_plus * c.h_rho + J.Rbar_plus * J.QG;
      J.VQ = P.P_dof.transpose() * B + P.P_dep.transpose() * (J.R_plus * B + J.Rbar_plus * J.QQ);
      J.VV = P.P_dof.transpose() * HvP + P.P_dep.transpose() * (J.R_plus * HvP);
      J.VG = P.P_dof.transpose() * c.h_rho + P.P_dep.transpose() * J.K;
      break;
    }
    case EventKind::ConstrainedInelastic: {
      const Partition P = make_partition(c.dof, n);
      const auto lu = factor_dep(c.phi_q * P.P_dep.transpose());
      J.R_plus = -lu.solve(c.phi_q * P.P_dof.transpose());
      J.D = -lu.solve(c.phi_rho);
      const Matrix A = P.P_dof * (I - dv * c.tq);
      J.QQ = P.P_dof.transpose() * A + P.P_dep.transpose() * (J.R_plus * A);
      J.QG = P.P_dep.transpose() * J.D;
      J.VQ = c.h_q + (c.h_q * c.v_minus - c.a_plus + c.h_v * c.a_minus + c.h_t) * c.tq;
      J.VV = c.h_v;
      J.VG = c.h_rho;
      if (c.mu_q.size() > 0) {
        const Index m = c.mu_q.rows();
        J.dmu_rows = Matrix::Zero(m, N);
        J.dmu_rows.middleCols(iQ, n) =
            c.mu_q + (c.mu_q * c.v_minus + c.mu_v * c.a_minus + c.mu_t) * c.tq;
        J.dmu_rows.middleCols(iV, n) = c.mu_v;
        J.dmu_rows.middleCols(iG, p) = c.mu_rho;
      }
      break;
    }
  }

  J.S = Matrix::Identity(N, N);
  J.S.block(iQ, iQ, n, n) = J.QQ;
  J.S.block(iQ, iG, n, p) = J.QG;
  J.S.block(iV, iQ, n, n) = J.VQ;
  J.S.block(iV, iV, n, n) = J.VV;
  J.S.block(iV, iG, n, p) = J.VG;
  J.S.block(iZ, iQ, nc, n) = J.ZQ;
  return J;
}

Matrix apply_jump_direct(const JumpMatrix& S, const Matrix& X_minus) {
  if (X_minus.rows() != S.size()) throw ValidationError("sensitivity size does not match jump matrix");
  return S.S * X_minus;
}

SensitivityState apply_jump_direct(const JumpMatrix& S, const SensitivityState& X_minus) {
  const Dimensions d{S.n, S.p, S.nc, 0};
  SensitivityState out = SensitivityState::from_stacked(S.S * X_minus.stacked(), d);
  if (S.dmu_rows.size() > 0) out.Lambda = S.dmu_rows * X_minus.stacked();
  return out;
}

Matrix apply_jump_adjoint(const JumpMatrix& S, const Matrix& lam_plus) {
  if (lam_plus.rows() != S.size()) throw ValidationError("adjoint size does not match jump matrix");
  return S.S.transpose() * lam_plus;
}

AdjointState apply_jump_adjoint(const JumpMatrix& S, const AdjointState& lam_plus) {
  const Dimensions d{S.n, S.p, S.nc, lam_plus.lamLambda.rows()};
  return AdjointState::from_stacked(S.S.transpose() * lam_plus.stacked(), d);
}

Matrix componentwise_jump(const JumpContext& c, const Matrix& X) {
  check_context(c);
  const Index n = c.n, p = c.p, nc = c.nc;
  const Matrix Qm = X.topRows(n), Vm = X.middleRows(n, n), Gm = X.middleRows(2 * n, p),
               Zm = X.bottomRows(nc);
  const RowVector dt = c.tq * Qm;  // event-time sensitivity
  const Vector dv = c.v_plus - c.v_minus;
  Matrix Qp, Vp;
  const Matrix Zp = Zm - (c.g_plus - c.g_minus) * dt;

  const auto generic_V = [&]() -> Matrix {
    return c.h_q * Qm + c.h_v * Vm + c.h_rho * Gm +
           (c.h_q * c.v_minus - c.a_plus + c.h_v * c.a_minus + c.h_t) * dt;
  };

  if (c.kind == EventKind::VelocityJump || c.kind == EventKind::RhsSwitch) {
    Qp = Qm - dv * dt;
    Vp = generic_V();
  } else {
    std::vector<bool> is_dof(n, false);
    for (Index i : c.dof) is_dof[i] = true;
    std::vector<Index> dep;
    for (Index i = 0; i < n; ++i)
      if (!is_dof[i]) dep.push_back(i);
    const Index f = static_cast<Index>(c.dof.size()), m = static_cast<Index>(dep.size());
    Matrix phi_dep(c.phi_q.rows(), m), phi_dof(c.phi_q.rows(), f);
    for (Index k = 0; k < m; ++k) phi_dep.col(k) = c.phi_q.col(dep[k]);
    for (Index k = 0; k < f; ++k) phi_dof.col(k) = c.phi_q.col(c.dof[k]);
    const auto lu = factor_dep(phi_dep);

    // Positions: dof rows shift with the event time, dep rows follow the
    // differentiated position constraint Phi_q Q + Phi_rho = 0.
    const Matrix Qfull = Qm - dv * dt;
    Matrix Qdof(f, p);
    for (Index k = 0; k < f; ++k) Qdof.row(k) = Qfull.row(c.dof[k]);
    const Matrix Qdep = lu.solve(-(phi_dof * Qdof) - c.phi_rho * Gm);
    Qp = Matrix::Zero(n, p);
    for (Index k = 0; k < f; ++k) Qp.row(c.dof[k]) = Qdof.row(k);
    for (Index k = 0; k < m; ++k) Qp.row(dep[k]) = Qdep.row(k);

    if (c.kind == EventKind::ConstrainedInelastic) {
      Vp = generic_V();
    } else {
      Matrix Vm_dof(f, p);
      Vector am_dof(f), ap_dof(f);
      for (Index k = 0; k < f; ++k) {
        Vm_dof.row(k) = Vm.row(c.dof[k]);
        am_dof[k] = c.a_minus[c.dof[k]];
        ap_dof[k] = c.a_plus[c.dof[k]];
      }
      const Matrix Vdof = c.h_q * Qm + c.h_v * Vm_dof + c.h_rho * Gm +
                          (c.h_q * c.v_minus - ap_dof + c.h_v * am_dof + c.h_t) * dt;
      // Differentiated velocity constraint Phi_q V + J_q Q + J_rho = 0 after the event.
      const Matrix Vdep = lu.solve(-(phi_dof * Vdof) - c.J_q * Qp - c.J_rho * Gm);
      Vp = Matrix::Zero(n, p);
      for (Index k = 0; k < f; ++k) Vp.row(c.dof[k]) = Vdof.row(k);
      for (Index k = 0; k < m; ++k) Vp.row(dep[k]) = Vdep.row(k);
    }
  }

  Matrix out(X.rows(), X.cols());
  out << Qp, Vp, Gm, Zp;
  return out;
}

Index HybridSystem::max_m() const {
  Index m = 0;
  for (const Mode& md : modes) m = std::max(m, md.m());
  return m;
}

void HybridSystem::validate() const {
  if (modes.empty()) throw ValidationError("hybrid system has no modes");
  if (initial_mode >= modes.size()) throw ValidationError("initial mode out of range");
  for (const Mode& md : modes) {
    md.validate();
    if (md.model->n() != n() || md.model->p() != p()) {
      throw ValidationError("all modes must share n and p");
    }
  }
  for (const EventSpec& e : events) {
    if (!e.r) throw ValidationError("event '" + e.name + "' has no event function");
    if (e.from_mode >= modes.size() || e.to_mode >= modes.size()) {
      throw ValidationError("event '" + e.name + "' refers to a missing mode");
    }
    const bool needs_jump =
        e.kind == EventKind::VelocityJump || e.kind == EventKind::ConstrainedElastic;
    if (needs_jump && !e.jump) throw ValidationError("event '" + e.name + "' needs a jump function");
    const bool constrained =
        e.kind == EventKind::ConstrainedElastic || e.kind == EventKind::ConstrainedInelastic;
    if (constrained) {
      const Mode& mp = modes[e.to_mode];
      if (!mp.constraints) {
        throw ValidationError("event '" + e.name + "' needs constraints in its target mode");
      }
      if (static_cast<Index>(e.dof.size()) != n() - mp.m()) {
        throw ValidationError("event '" + e.name + "' dof count must equal n - m");
      }
    }
  }
}

StateJump apply_state_jump(const EventSpec& spec, const Mode& mode_minus, const Mode& mode_plus,
                           double t, const Vector& q, const Vector& v_minus, const Vector& rho) {
  StateJump out;
  switch (spec.kind) {
    case EventKind::VelocityJump:
      out.v_plus = spec.jump->h(t, q, v_minus, rho);
      break;
    case EventKind::RhsSwitch:
      out.v_plus = v_minus;
      break;
    case EventKind::ConstrainedElastic: {
      const Partition P = make_partition(spec.dof, q.size());
      const ConstraintSet& cons = *mode_plus.constraints;
      const Matrix G = cons.phi_q(t, q, rho);
      const auto lu = factor_dep(G * P.P_dep.transpose());
      const Vector vdof = spec.jump->h(t, q, P.P_dof * v_minus, rho);
      const Vector vdep = lu.solve(-(G * P.P_dof.transpose()) * vdof - cons.phi_t(t, q, rho));
      out.v_plus = P.P_dof.transpose() * vdof + P.P_dep.transpose() * vdep;
      break;
    }
    case EventKind::ConstrainedInelastic: {
      ImpulseSolution s =
          impulse_solve(*mode_plus.model, *mode_plus.constraints, t, q, v_minus, rho);
      out.v_plus = std::move(s.v_plus);
      out.delta_mu = std::move(s.delta_mu);
      break;
    }
  }
  return out;
}

JumpContext make_jump_context(const EventSpec& spec, const Mode& mode_minus, const Mode& mode_plus,
                              const CostFunctional& cost, double t, const Vector& q,
                              const Vector& v_minus, const Vector& v_plus, const Vector& rho) {
  JumpContext c;
  c.kind = spec.kind;
  c.n = q.size();
  c.p = rho.size();
  c.nc = cost.nc();
  c.v_minus = v_minus;
  c.v_plus = v_plus;
  c.tq = event_time_row(spec.gradient(q), v_minus);
  c.a_minus = mode_minus.acceleration(t, q, v_minus, rho).vdot;
  c.a_plus = mode_plus.acceleration(t, q, v_plus, rho).vdot;
  c.g_minus = cost_density(mode_minus, cost, t, q, v_minus, rho);
  c.g_plus = cost_density(mode_plus, cost, t, q, v_plus, rho);

  switch (spec.kind) {
    case EventKind::VelocityJump:
      c.h_t = spec.jump->h_t(t, q, v_minus, rho);
      c.h_q = spec.jump->h_q(t, q, v_minus, rho);
      c.h_v = spec.jump->h_v(t, q, v_minus, rho);
      c.h_rho = spec.jump->h_rho(t, q, v_minus, rho);
      break;
    case EventKind::RhsSwitch:
      c.h_t = Vector::Zero(c.n);
      c.h_q = Matrix::Zero(c.n, c.n);
      c.h_v = Matrix::Identity(c.n, c.n);
      c.h_rho = Matrix::Zero(c.n, c.p);
      break;
    case EventKind::ConstrainedElastic: {
      c.dof = spec.dof;
      const Partition P = make_partition(spec.dof, c.n);
      const Vector vdof = P.P_dof * v_minus;
      c.h_t = spec.jump->h_t(t, q, vdof, rho);
      c.h_q = spec.jump->h_q(t, q, vdof, rho);
      c.h_v = spec.jump->h_v(t, q, vdof, rho);
      c.h_rho = spec.jump->h_rho(t, q, vdof, rho);
      const ConstraintSet& cons = *mode_plus.constraints;
      c.phi_q = cons.phi_q(t, q, rho);
      c.phi_rho = cons.phi_rho(t, q, rho);
      c.J_q = cons.phi_q_times_q(t, q, rho, v_plus) + cons.phi_t_q(t, q, rho);
      c.J_rho = cons.phi_q_times_rho(t, q, rho, v_plus) + cons.phi_t_rho(t, q, rho);
      break;
    }
    case EventKind::ConstrainedInelastic: {
      c.dof = spec.dof;
      const ConstraintSet& cons = *mode_plus.constraints;
      const ImpulseJacobians ij = impulse_jacobians(*mode_plus.model, cons, t, q, v_minus, rho);
      c.h_t = ij.v_t;
      c.h_q = ij.v_q;
      c.h_v = ij.v_v;
      c.h_rho = ij.v_rho;
      c.mu_t = ij.mu_t;
      c.mu_q = ij.mu_q;
      c.mu_v = ij.mu_v;
      c.mu_rho = ij.mu_rho;
      c.phi_q = cons.phi_q(t, q, rho);
      c.phi_rho = cons.phi_rho(t, q, rho);
      break;
    }
  }
  return c;
}

}  // namespace hysens
