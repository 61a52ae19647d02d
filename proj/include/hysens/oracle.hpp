#pragma once

#include <vector>

#include "hysens/simulation.hpp"

namespace hysens {

/// Central differences of psi over full hybrid simulations at rho +- h e_j with
/// h = h_rel * max(1, |rho_j|). Perturbed runs execute concurrently and are
/// joined in parameter order. Throws NumericalError when a perturbed run fires
/// a different event sequence than the nominal one.
[[nodiscard]] Matrix fd_cost_sensitivity(const HybridSystem& sys, const CostFunctional& cost,
                                         const Vector& rho, double t0, double tF,
                                         const IntegratorConfig& cfg, double h_rel = 1e-6);

struct FdTrajectorySample {
  double t = 0.0;
  Matrix Q, V, Z;         // n x p, n x p, nc x p
  bool reliable = true;   // false inside the window around an event
};

/// Pointwise central differences of the interpolated states at the given times.
/// Samples within 10 event_tol of any event (nominal or perturbed) are flagged
/// unreliable.
[[nodiscard]] std::vector<FdTrajectorySample> fd_trajectory_sensitivity(
    const HybridSystem& sys, const CostFunctional& cost, const Vector& rho, double t0, double tF,
    const IntegratorConfig& cfg, const std::vector<double>& sample_times, double h_rel = 1e-6);

}  // namespace hysens
