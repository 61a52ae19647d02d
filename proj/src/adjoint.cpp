#include "hysens/adjoint.hpp"

#include <sstream>

namespace hysens {

AdjointState adjoint_rhs(const ModeEval& ev, const CostGradients& g, const AdjointState& lam) {
  // lamZ = I, so the cost terms enter as plain transposes.
  AdjointState d;
  d.lamQ = -(ev.jac.f_q.transpose() * lam.lamV + g.q.transpose());
  d.lamV = -(lam.lamQ + ev.jac.f_v.transpose() * lam.lamV + g.v.transpose());
  d.lamGamma = -(ev.jac.f_rho.transpose() * lam.lamV + g.rho.transpose());
  d.lamZ = Matrix::Zero(lam.lamZ.rows(), lam.lamZ.cols());
  d.lamLambda = Matrix::Zero(lam.lamLambda.rows(), lam.lamLambda.cols());
  return d;
}

AdjointState adjoint_rhs(const Mode& mode, const CostFunctional& cost, double t, const Vector& q,
                         const Vector& v, const Vector& rho, const AdjointState& lam) {
  const ModeEval ev = mode.evaluate(t, q, v, rho);
  return adjoint_rhs(ev, cost_density_gradients(cost, t, q, v, rho, ev), lam);
}

AdjointState terminal_conditions(const CostGradients& w, Index m) {
  AdjointState lam;
  lam.lamQ = w.q.transpose();
  lam.lamV = w.v.transpose();
  lam.lamGamma = w.rho.transpose();
  lam.lamZ = Matrix::Identity(w.q.rows(), w.q.rows());
  lam.lamLambda = Matrix::Zero(m, w.q.rows());
  return lam;
}

AdjointState terminal_conditions(const HybridTrajectory& traj, const HybridSystem& sys,
                                 const CostFunctional& cost) {
  const StateView s = split_state(traj.final_state(), traj.dims);
  const Mode& mode = sys.modes[traj.final_mode()];
  return terminal_conditions(terminal_cost_gradients(mode, cost, traj.tF, s.q, s.v, traj.rho),
                             mode.m());
}

Matrix assemble_cost_sensitivity_adjoint(const AdjointState& lam, const Matrix& dq0,
                                         const Matrix& dv0) {
  return lam.lamQ.transpose() * dq0 + lam.lamV.transpose() * dv0 + lam.lamGamma.transpose();
}

Matrix canonical_adjoint(const Vector& y, const Dimensions& d) {
  const Index r = 2 * d.n + d.p;
  if (y.size() != r * d.nc) throw ValidationError("adjoint row has the wrong length");
  const Eigen::Map<const Matrix> L(y.data(), r, d.nc);
  Matrix lam(r + d.nc, d.nc);
  lam << L, Matrix::Identity(d.nc, d.nc);
  return lam;
}

namespace {

Vector pack_adjoint(const Matrix& lam, const Dimensions& d) {
  const Index r = 2 * d.n + d.p;
  const Matrix top = lam.topRows(r);
  return Eigen::Map<const Vector>(top.data(), r * d.nc);
}

}  // namespace

AdjointResult propagate_adjoint(const HybridTrajectory& traj, const HybridSystem& sys,
                                const CostFunctional& cost, const IntegratorConfig& cfg) {
  if (traj.segments.size() != traj.events.size() + 1) {
    throw ValidationError("trajectory is missing dense segments");
  }
  const Dimensions& d = traj.dims;
  const Index n = d.n, p = d.p, nc = d.nc, r = 2 * n + p;
  const Vector& rho = traj.rho;

  AdjointResult out;
  const AdjointState lamF = terminal_conditions(traj, sys, cost);
  Matrix lam = lamF.stacked();

  for (std::size_t k = traj.segments.size(); k-- > 0;) {
    const Segment& seg = traj.segments[k];
    const Mode& mode = sys.modes[seg.mode];
    const OdeRhs rhs = [&](double t, const Vector& y) -> Vector {
      const Vector s = interpolate(seg.dense, t);
      const Vector q = s.head(n), v = s.segment(n, n);
      const ModeEval ev = mode.evaluate(t, q, v, rho);
      const CostGradients g = cost_density_gradients(cost, t, q, v, rho, ev);
      const Eigen::Map<const Matrix> L(y.data(), r, nc);
      const Matrix lamV = L.middleRows(n, n);
      Vector dy(y.size());
      Eigen::Map<Matrix> D(dy.data(), r, nc);
      D.topRows(n) = -(ev.jac.f_q.transpose() * lamV + g.q.transpose());
      D.middleRows(n, n) = -(L.topRows(n) + ev.jac.f_v.transpose() * lamV + g.v.transpose());
      D.bottomRows(p) = -(ev.jac.f_rho.transpose() * lamV + g.rho.transpose());
      return dy;
    };
    AdjointSegment as;
    as.segment = k;
    as.lam_end = lam;
    SegmentResult res =
        integrate_segment(rhs, pack_adjoint(lam, d), seg.dense.t_end(), seg.dense.t_start(), cfg);
    lam = canonical_adjoint(res.y_end, d);
    as.lam_start = lam;
    as.dense = std::move(res.dense);
    out.segments.push_back(std::move(as));
    if (k > 0) lam = apply_jump_adjoint(traj.events[k - 1].jump, lam);
  }

  out.lam_t0 = AdjointState::from_stacked(lam, d);
  out.lam_t0.lamLambda = Matrix::Zero(sys.modes[traj.segments.front().mode].m(), nc);
  out.gradient = assemble_cost_sensitivity_adjoint(out.lam_t0, traj.initial.dq0_drho,
                                                   traj.initial.dv0_drho);
  return out;
}

AdjointSeries adjoint_series(const AdjointResult& res, const Dimensions& d) {
  AdjointSeries s;
  s.header.push_back("t");
  const auto add = [&](const char* name, Index rows) {
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < d.nc; ++j)
        s.header.push_back(std::string(name) + "_" + std::to_string(i + 1) + "_" +
                           std::to_string(j + 1));
  };
  add("lamQ", d.n);
  add("lamV", d.n);
  add("lamGamma", d.p);
  const Index r = 2 * d.n + d.p;
  for (const AdjointSegment& seg : res.segments) {
    for (double t : seg.dense.nodes()) {
      const Matrix lam = canonical_adjoint(interpolate(seg.dense, t), d);
      std::vector<double> row{t};
      for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < d.nc; ++j) row.push_back(lam(i, j));
      s.rows.push_back(std::move(row));
    }
  }
  return s;
}

MuAdjoint map_lambda_to_mu(const AdjointState& lam, const Mode& mode, double t, const Vector& q,
                           const Vector& rho) {
  const Index n = q.size(), m = mode.m(), nc = lam.lamV.cols();
  MuAdjoint mu;
  mu.muQ = lam.lamQ;
  mu.muGamma = lam.lamGamma;
  const Matrix M = mode.model->mass(t, q, rho);
  if (m == 0) {
    mu.muV = SpdSolver(M, t).solve(lam.lamV);
    mu.muLambda = Matrix(0, nc);
    return mu;
  }
  const KktSolver kkt(M, mode.constraints->phi_q(t, q, rho), t);
  Matrix rhs(n + m, nc);
  rhs << lam.lamV, (lam.lamLambda.size() ? lam.lamLambda : Matrix::Zero(m, nc));
  const Matrix sol = kkt.solve(rhs);
  mu.muV = sol.topRows(n);
  mu.muLambda = sol.bottomRows(m);
  return mu;
}

AdjointState map_mu_to_lambda(const MuAdjoint& mu, const Mode& mode, double t, const Vector& q,
                              const Vector& rho) {
  const Index m = mode.m(), nc = mu.muV.cols();
  const Matrix M = mode.model->mass(t, q, rho);
  AdjointState lam;
  lam.lamQ = mu.muQ;
  lam.lamGamma = mu.muGamma;
  lam.lamZ = Matrix::Identity(nc, nc);
  if (m == 0) {
    lam.lamV = M * mu.muV;
    lam.lamLambda = Matrix(0, nc);
    return lam;
  }
  const Matrix G = mode.constraints->phi_q(t, q, rho);
  lam.lamV = M * mu.muV + G.transpose() * mu.muLambda;
  lam.lamLambda = G * mu.muV;
  return lam;
}

}  // namespace hysens
