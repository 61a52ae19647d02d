#pragma once

#include <vector>

#include "hysens/simulation.hpp"

namespace hysens {

/// lamQ' = -(f_q^T lamV + g~_q^T), lamV' = -(lamQ + f_v^T lamV + g~_v^T),
/// lamGamma' = -(f_rho^T lamV + g~_rho^T), lamZ' = 0.
[[nodiscard]] AdjointState adjoint_rhs(const ModeEval& ev, const CostGradients& g,
                                       const AdjointState& lam);
[[nodiscard]] AdjointState adjoint_rhs(const Mode& mode, const CostFunctional& cost, double t,
                                       const Vector& q, const Vector& v, const Vector& rho,
                                       const AdjointState& lam);

/// lamQ = w~_q^T, lamV = w~_v^T, lamGamma = w~_rho^T, lamZ = I, lamLambda = 0.
[[nodiscard]] AdjointState terminal_conditions(const CostGradients& terminal, Index m = 0);
[[nodiscard]] AdjointState terminal_conditions(const HybridTrajectory& traj,
                                               const HybridSystem& sys,
                                               const CostFunctional& cost);

/// dpsi/drho = lamQ(t0)^T dq0/drho + lamV(t0)^T dv0/drho + lamGamma(t0)^T.
[[nodiscard]] Matrix assemble_cost_sensitivity_adjoint(const AdjointState& lam_t0,
                                                       const Matrix& dq0_drho,
                                                       const Matrix& dv0_drho);

/// Backward solution on one forward segment; dense rows are vec([lamQ; lamV; lamGamma]).
struct AdjointSegment {
  std::size_t segment = 0;
  DenseSegment dense;  // runs from the segment end back to its start
  Matrix lam_end;      // stacked canonical adjoint at the segment end (after the later event's jump)
  Matrix lam_start;    // at the segment start, before the earlier event's jump
};

struct AdjointResult {
  AdjointState lam_t0;
  Matrix gradient;  // nc x p
  std::vector<AdjointSegment> segments;  // backward order: last forward segment first
};

/// Integrates the adjoint backward over every forward segment, applying
/// lambda- = S^T lambda+ at each recorded event.
[[nodiscard]] AdjointResult propagate_adjoint(const HybridTrajectory& traj,
                                              const HybridSystem& sys, const CostFunctional& cost,
                                              const IntegratorConfig& cfg);

/// Stacked canonical adjoint [lamQ; lamV; lamGamma; I] from a backward dense row.
[[nodiscard]] Matrix canonical_adjoint(const Vector& y, const Dimensions& dims);

/// Adjoint time series at every backward node, in backward time order.
struct AdjointSeries {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
[[nodiscard]] AdjointSeries adjoint_series(const AdjointResult& res, const Dimensions& dims);

/// Multiplier-based adjoint representation used for index-1 DAEs in the
/// literature. muLambda pairs with the constraint rows.
struct MuAdjoint {
  Matrix muQ;       // n x nc
  Matrix muV;       // n x nc
  Matrix muLambda;  // m x nc
  Matrix muGamma;   // p x nc, equal to lamGamma
};

/// Solves [lamQ; lamV; lamLambda] = blkdiag(I, [[M, Phi_q^T], [Phi_q, 0]]) [muQ; muV; muLambda].
[[nodiscard]] MuAdjoint map_lambda_to_mu(const AdjointState& lam, const Mode& mode, double t,
                                         const Vector& q, const Vector& rho);
[[nodiscard]] AdjointState map_mu_to_lambda(const MuAdjoint& mu, const Mode& mode, double t,
                                            const Vector& q, const Vector& rho);

}  // namespace hysens
