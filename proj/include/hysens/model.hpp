#pragma once

#include <memory>

#include "hysens/core.hpp"

namespace hysens {

/// Initial conditions and their parameter Jacobians.
struct InitialState {
  Vector q0;
  Vector v0;
  Matrix dq0_drho;  // n x p
  Matrix dv0_drho;  // n x p
};

/// Unconstrained multibody description M(t,q,rho) vdot = F(t,q,v,rho).
///
/// Implementations override mass(), force() and initial_state(). Every partial
/// derivative has a central finite-difference default, so a model only needs to
/// override the ones it can supply analytically. Models are immutable and all
/// evaluations are pure.
class MultibodyModel {
 public:
  virtual ~MultibodyModel() = default;

  [[nodiscard]] virtual Index n() const = 0;
  [[nodiscard]] virtual Index p() const = 0;

  [[nodiscard]] virtual Matrix mass(double t, const Vector& q, const Vector& rho) const = 0;
  [[nodiscard]] virtual Vector force(double t, const Vector& q, const Vector& v,
                                     const Vector& rho) const = 0;
  [[nodiscard]] virtual InitialState initial_state(const Vector& rho) const = 0;

  /// d(M(t,q,rho) a)/dq with a held fixed (n x n).
  [[nodiscard]] virtual Matrix mass_q_times(double t, const Vector& q, const Vector& rho,
                                            const Vector& a) const;
  /// d(M(t,q,rho) a)/drho with a held fixed (n x p).
  [[nodiscard]] virtual Matrix mass_rho_times(double t, const Vector& q, const Vector& rho,
                                              const Vector& a) const;
  [[nodiscard]] virtual Matrix force_q(double t, const Vector& q, const Vector& v,
                                       const Vector& rho) const;
  [[nodiscard]] virtual Matrix force_v(double t, const Vector& q, const Vector& v,
                                       const Vector& rho) const;
  [[nodiscard]] virtual Matrix force_rho(double t, const Vector& q, const Vector& v,
                                         const Vector& rho) const;
};

/// Holonomic constraints Phi(t,q,rho) = 0 with the derivative actions used by the
/// penalty, index-1 and jump formulations.
///
/// gamma() is the acceleration bias Phi_qq(v,v) + 2 Phi_tq v + Phi_tt, so that
/// Phi_ddot = Phi_q vdot + gamma and the index-1 right side is C = -gamma.
/// Second derivatives are exposed as directional actions rather than tensors.
class ConstraintSet {
 public:
  virtual ~ConstraintSet() = default;

  [[nodiscard]] virtual Index m() const = 0;
  [[nodiscard]] virtual Vector phi(double t, const Vector& q, const Vector& rho) const = 0;

  [[nodiscard]] virtual Matrix phi_q(double t, const Vector& q, const Vector& rho) const;
  [[nodiscard]] virtual Vector phi_t(double t, const Vector& q, const Vector& rho) const;
  [[nodiscard]] virtual Matrix phi_rho(double t, const Vector& q, const Vector& rho) const;
  [[nodiscard]] virtual Vector gamma(double t, const Vector& q, const Vector& v,
                                     const Vector& rho) const;

  /// d(Phi_q a)/dq, a fixed (m x n).
  [[nodiscard]] virtual Matrix phi_q_times_q(double t, const Vector& q, const Vector& rho,
                                             const Vector& a) const;
  /// d(Phi_q a)/drho, a fixed (m x p).
  [[nodiscard]] virtual Matrix phi_q_times_rho(double t, const Vector& q, const Vector& rho,
                                               const Vector& a) const;
  /// d(Phi_q^T w)/dq, w fixed (n x n).
  [[nodiscard]] virtual Matrix phi_qT_times_q(double t, const Vector& q, const Vector& rho,
                                              const Vector& w) const;
  /// d(Phi_q^T w)/drho, w fixed (n x p).
  [[nodiscard]] virtual Matrix phi_qT_times_rho(double t, const Vector& q, const Vector& rho,
                                                const Vector& w) const;
  /// d(Phi_t)/dq (m x n).
  [[nodiscard]] virtual Matrix phi_t_q(double t, const Vector& q, const Vector& rho) const;
  /// d(Phi_t)/drho (m x p).
  [[nodiscard]] virtual Matrix phi_t_rho(double t, const Vector& q, const Vector& rho) const;
  [[nodiscard]] virtual Matrix gamma_q(double t, const Vector& q, const Vector& v,
                                       const Vector& rho) const;
  [[nodiscard]] virtual Matrix gamma_v(double t, const Vector& q, const Vector& v,
                                       const Vector& rho) const;
  [[nodiscard]] virtual Matrix gamma_rho(double t, const Vector& q, const Vector& v,
                                         const Vector& rho) const;

  /// Velocity-level residual Phi_q v + Phi_t.
  [[nodiscard]] Vector velocity_residual(double t, const Vector& q, const Vector& v,
                                         const Vector& rho) const;
};

/// Arguments of the cost density. mu is empty for unconstrained dynamics.
struct CostPoint {
  double t = 0.0;
  Vector q;
  Vector v;
  Vector vdot;
  Vector rho;
  Vector mu;
};

/// Partial derivatives of a cost-like function with respect to each argument
/// block. Blocks a function does not depend on have zero columns or are zero.
struct CostPartials {
  Matrix q, v, vdot, rho, u, mu;
};

/// Trajectory cost g(t,q,v,vdot,rho,u,mu), optional argument function
/// u(t,q,v,vdot,rho,mu), and terminal cost w(t,q,v,rho,u).
///
/// The terminal cost has no direct acceleration or multiplier argument; it may
/// still see them through u. All partials default to central differences.
class CostFunctional {
 public:
  virtual ~CostFunctional() = default;

  [[nodiscard]] virtual Index nc() const = 0;
  [[nodiscard]] virtual Index nu() const { return 0; }

  [[nodiscard]] virtual Vector g(const CostPoint& pt, const Vector& u) const = 0;
  [[nodiscard]] virtual Vector u(const CostPoint& pt) const { return Vector(0); }
  [[nodiscard]] virtual Vector w(double t, const Vector& q, const Vector& v, const Vector& rho,
                                 const Vector& u) const {
    return Vector::Zero(nc());
  }

  [[nodiscard]] virtual CostPartials g_partials(const CostPoint& pt, const Vector& u) const;
  [[nodiscard]] virtual CostPartials u_partials(const CostPoint& pt) const;
  /// Only q, v, rho and u blocks are meaningful.
  [[nodiscard]] virtual CostPartials w_partials(double t, const Vector& q, const Vector& v,
                                                const Vector& rho, const Vector& u) const;
};

/// Acceleration Jacobians of whichever formulation is active, plus the
/// multiplier Jacobians when multipliers exist.
struct AccelerationJacobians {
  Matrix f_q, f_v, f_rho;     // n x n, n x n, n x p
  Matrix mu_q, mu_v, mu_rho;  // m x n, m x n, m x p (empty when m = 0)
};

/// Value and total partials of a composed cost (g-tilde or w-tilde).
struct CostGradients {
  Vector value;         // nc
  Matrix q, v, rho;     // nc x n, nc x n, nc x p
};

/// vdot = M^-1 F through a symmetric factorization.
[[nodiscard]] Vector eom_rhs(const MultibodyModel& model, double t, const Vector& q,
                             const Vector& v, const Vector& rho);

/// f_zeta = M^-1 (F_zeta - M_zeta vdot) for zeta in {q, v, rho}.
[[nodiscard]] AccelerationJacobians eom_jacobians(const MultibodyModel& model, double t,
                                                  const Vector& q, const Vector& v,
                                                  const Vector& rho);

/// Chain rule for the trajectory cost:
/// g~_zeta = g_zeta + g_vdot f_zeta + g_mu mu_zeta + g_u (u_zeta + u_vdot f_zeta + u_mu mu_zeta).
[[nodiscard]] CostGradients assemble_cost_gradients(const CostFunctional& cost,
                                                    const CostPoint& pt,
                                                    const AccelerationJacobians& jac);

/// Chain rule for the terminal cost: w~_zeta = w_zeta + w_u (u_zeta + u_vdot f_zeta + u_mu mu_zeta).
[[nodiscard]] CostGradients assemble_terminal_gradients(const CostFunctional& cost,
                                                        const CostPoint& pt,
                                                        const AccelerationJacobians& jac);

/// Factorizes a symmetric positive definite matrix. Throws NumericalError naming
/// the time and the condition estimate when the estimate exceeds 1e12.
class SpdSolver {
 public:
  SpdSolver(const Matrix& a, double t, const char* what = "mass matrix");
  [[nodiscard]] Matrix solve(const Matrix& b) const { return ldlt_.solve(b); }
  [[nodiscard]] double condition_estimate() const { return 1.0 / ldlt_.rcond(); }

 private:
  Eigen::LDLT<Matrix> ldlt_;
};

inline constexpr double kMaxConditionEstimate = 1e12;

}  // namespace hysens
