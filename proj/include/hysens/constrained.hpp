#pragma once

#include <vector>

#include "hysens/model.hpp"

namespace hysens {

/// Stabilized penalty parameters. An empty alpha means alpha_scale * I.
struct PenaltyConfig {
  double alpha_scale = 1e7;
  Matrix alpha;
  double xi = 1.0;
  double omega = 10.0;

  [[nodiscard]] Matrix alpha_matrix(Index m) const;
  void validate(Index m) const;
};

/// vdot = Mbar^-1 Fbar with Mbar = M + Phi_q^T alpha Phi_q and
/// Fbar = F - Phi_q^T alpha (gamma + 2 xi omega Phi_dot + omega^2 Phi).
[[nodiscard]] Vector penalty_rhs(const MultibodyModel& model, const ConstraintSet& cons, double t,
                                 const Vector& q, const Vector& v, const Vector& rho,
                                 const PenaltyConfig& pcfg);

/// mu* = alpha (Phi_ddot + 2 xi omega Phi_dot + omega^2 Phi).
[[nodiscard]] Vector penalty_multipliers(const ConstraintSet& cons, double t, const Vector& q,
                                         const Vector& v, const Vector& vdot, const Vector& rho,
                                         const PenaltyConfig& pcfg);

/// Acceleration Jacobians of the penalty right-hand side. Multiplier blocks are
/// left empty: costs never see penalty multipliers.
[[nodiscard]] AccelerationJacobians penalty_jacobians(const MultibodyModel& model,
                                                      const ConstraintSet& cons, double t,
                                                      const Vector& q, const Vector& v,
                                                      const Vector& rho,
                                                      const PenaltyConfig& pcfg);

/// Dense LU of the saddle-point matrix [[M, G^T], [G, 0]].
class KktSolver {
 public:
  KktSolver(const Matrix& M, const Matrix& G, double t, const char* what = "KKT matrix");
  [[nodiscard]] Matrix solve(const Matrix& rhs) const { return lu_.solve(rhs); }
  [[nodiscard]] Index n() const { return n_; }
  [[nodiscard]] Index m() const { return m_; }

 private:
  Index n_, m_;
  Eigen::PartialPivLU<Matrix> lu_;
};

struct DaeSolution {
  Vector vdot;
  Vector mu;
};

/// Index-1 KKT solve: M vdot + Phi_q^T mu = F, Phi_q vdot = -gamma.
[[nodiscard]] DaeSolution dae_solve(const MultibodyModel& model, const ConstraintSet* cons,
                                    double t, const Vector& q, const Vector& v, const Vector& rho);

/// Jacobians of (vdot, mu) from one KKT factorization and three right-hand sides.
[[nodiscard]] AccelerationJacobians dae_jacobians(const MultibodyModel& model,
                                                  const ConstraintSet* cons, double t,
                                                  const Vector& q, const Vector& v,
                                                  const Vector& vdot, const Vector& mu,
                                                  const Vector& rho);

struct ImpulseSolution {
  Vector v_plus;
  Vector delta_mu;
};

/// Momentum-level solve [[M, G^T], [G, 0]] [v+; dmu] = [M v-; -Phi_t] with G = Phi_q.
[[nodiscard]] ImpulseSolution impulse_solve(const MultibodyModel& model, const ConstraintSet& cons,
                                            double t, const Vector& q, const Vector& v_minus,
                                            const Vector& rho);

/// Partial derivatives of (v+, dmu) with respect to t, q, v- and rho.
struct ImpulseJacobians {
  Vector v_t;
  Matrix v_q, v_v, v_rho;
  Vector mu_t;
  Matrix mu_q, mu_v, mu_rho;
};

[[nodiscard]] ImpulseJacobians impulse_jacobians(const MultibodyModel& model,
                                                 const ConstraintSet& cons, double t,
                                                 const Vector& q, const Vector& v_minus,
                                                 const Vector& rho);

/// Constraint drift sampled at accepted steps.
struct ConstraintResiduals {
  std::vector<double> t;
  std::vector<double> pos;  // ||Phi||_inf
  std::vector<double> vel;  // ||Phi_q v + Phi_t||_inf

  void record(const ConstraintSet& cons, double time, const Vector& q, const Vector& v,
              const Vector& rho);
  [[nodiscard]] double max_pos() const;
  [[nodiscard]] double max_vel() const;
};

}  // namespace hysens
