#include "hysens/direct.hpp"

namespace hysens {

SensitivityState tlm_rhs(const ModeEval& ev, const CostGradients& g, const SensitivityState& X) {
  SensitivityState dX;
  dX.Q = X.V;
  dX.V = ev.jac.f_q * X.Q + ev.jac.f_v * X.V + ev.jac.f_rho;
  dX.Gamma = Matrix::Zero(X.Q.cols(), X.Q.cols());
  dX.Z = g.q * X.Q + g.v * X.V + g.rho;
  return dX;
}

SensitivityState tlm_rhs(const Mode& mode, const CostFunctional& cost, double t, const Vector& q,
                         const Vector& v, const Vector& rho, const SensitivityState& X) {
  const ModeEval ev = mode.evaluate(t, q, v, rho);
  return tlm_rhs(ev, cost_density_gradients(cost, t, q, v, rho, ev), X);
}

Matrix assemble_cost_sensitivity_direct(const SensitivityState& X, const CostGradients& w) {
  return X.Z + w.q * X.Q + w.v * X.V + w.rho;
}

DirectResult propagate_direct(const HybridSystem& sys, const CostFunctional& cost,
                              const Vector& rho, double t0, double tF,
                              const IntegratorConfig& cfg) {
  SimulationOptions opt;
  opt.integrator = cfg;
  opt.sensitivities = true;
  DirectResult out;
  out.trajectory = simulate(sys, cost, rho, t0, tF, opt);
  const HybridTrajectory& tr = out.trajectory;
  const Dimensions& d = tr.dims;
  const Vector& yF = tr.final_state();
  const StateView s = split_state(yF, d);
  const Mode& mode = sys.modes[tr.final_mode()];

  out.X_tF = SensitivityState::from_stacked(canonical_sensitivity(yF, d), d);
  out.terminal = terminal_cost_gradients(mode, cost, tF, s.q, s.v, rho);
  out.psi = s.z + out.terminal.value;
  out.gradient = assemble_cost_sensitivity_direct(out.X_tF, out.terminal);
  if (mode.has_multipliers()) {
    const ModeEval ev = mode.evaluate(tF, s.q, s.v, rho);
    out.X_tF.Lambda = ev.jac.mu_q * out.X_tF.Q + ev.jac.mu_v * out.X_tF.V + ev.jac.mu_rho;
  }
  return out;
}

SensitivitySeries sensitivity_series(const HybridTrajectory& tr) {
  const Dimensions& d = tr.dims;
  SensitivitySeries s;
  s.header.push_back("t");
  const auto add = [&](const char* name, Index rows) {
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < d.p; ++j)
        s.header.push_back(std::string(name) + "_" + std::to_string(i + 1) + "_" +
                           std::to_string(j + 1));
  };
  add("Q", d.n);
  add("V", d.n);
  add("Z", d.nc);
  for (std::size_t k = 0; k < tr.segments.size(); ++k) {
    for (double t : tr.segments[k].dense.nodes()) {
      const Matrix X = tr.sensitivity_at(k, t);
      std::vector<double> row{t};
      const auto put = [&](Index r0, Index rows) {
        for (Index i = 0; i < rows; ++i)
          for (Index j = 0; j < d.p; ++j) row.push_back(X(r0 + i, j));
      };
      put(0, d.n);
      put(d.n, d.n);
      put(2 * d.n + d.p, d.nc);
      s.rows.push_back(std::move(row));
    }
  }
  return s;
}

}  // namespace hysens
