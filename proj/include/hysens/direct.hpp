#pragma once

#include "hysens/simulation.hpp"

namespace hysens {

/// Tangent linear model: Q' = V, V' = f_q Q + f_v V + f_rho, Gamma' = 0,
/// Z' = g~_q Q + g~_v V + g~_rho. Gamma in the result is zero.
[[nodiscard]] SensitivityState tlm_rhs(const Mode& mode, const CostFunctional& cost, double t,
                                       const Vector& q, const Vector& v, const Vector& rho,
                                       const SensitivityState& X);
/// Same, from an evaluation already at hand.
[[nodiscard]] SensitivityState tlm_rhs(const ModeEval& ev, const CostGradients& g,
                                       const SensitivityState& X);

/// dpsi/drho = Z + w~_q Q + w~_v V + w~_rho.
[[nodiscard]] Matrix assemble_cost_sensitivity_direct(const SensitivityState& X_tF,
                                                      const CostGradients& terminal);

struct DirectResult {
  HybridTrajectory trajectory;
  SensitivityState X_tF;  // Lambda filled for index-1 final modes
  CostGradients terminal;
  Vector psi;
  Matrix gradient;  // nc x p
};

[[nodiscard]] DirectResult propagate_direct(const HybridSystem& sys, const CostFunctional& cost,
                                            const Vector& rho, double t0, double tF,
                                            const IntegratorConfig& cfg);

/// Sensitivity time series at every accepted step: t, then Q, V, Z entries
/// (row-major within each block).
struct SensitivitySeries {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
[[nodiscard]] SensitivitySeries sensitivity_series(const HybridTrajectory& traj);

}  // namespace hysens
