#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hysens/mode.hpp"

namespace hysens {

enum class EventKind { VelocityJump, RhsSwitch, ConstrainedElastic, ConstrainedInelastic };

[[nodiscard]] const char* to_string(EventKind k);

/// Velocity jump map h(t, q, v, rho). For ConstrainedElastic events v is the
/// dof part of the pre-event velocity and h returns the dof part of v+.
class JumpFunction {
 public:
  virtual ~JumpFunction() = default;
  [[nodiscard]] virtual Vector h(double t, const Vector& q, const Vector& v,
                                 const Vector& rho) const = 0;
  [[nodiscard]] virtual Vector h_t(double t, const Vector& q, const Vector& v,
                                   const Vector& rho) const;
  [[nodiscard]] virtual Matrix h_q(double t, const Vector& q, const Vector& v,
                                   const Vector& rho) const;
  [[nodiscard]] virtual Matrix h_v(double t, const Vector& q, const Vector& v,
                                   const Vector& rho) const;
  [[nodiscard]] virtual Matrix h_rho(double t, const Vector& q, const Vector& v,
                                     const Vector& rho) const;
};

/// Constant linear jump v+ = A v-, e.g. a velocity reflection.
class LinearJump final : public JumpFunction {
 public:
  explicit LinearJump(Matrix A) : A_(std::move(A)) {}
  [[nodiscard]] Vector h(double, const Vector&, const Vector& v, const Vector&) const override {
    return A_ * v;
  }
  [[nodiscard]] Vector h_t(double, const Vector&, const Vector& v, const Vector&) const override {
    return Vector::Zero(A_.rows());
  }
  [[nodiscard]] Matrix h_q(double, const Vector& q, const Vector&, const Vector&) const override {
    return Matrix::Zero(A_.rows(), q.size());
  }
  [[nodiscard]] Matrix h_v(double, const Vector&, const Vector&, const Vector&) const override {
    return A_;
  }
  [[nodiscard]] Matrix h_rho(double, const Vector&, const Vector&,
                             const Vector& rho) const override {
    return Matrix::Zero(A_.rows(), rho.size());
  }

 private:
  Matrix A_;
};

/// A switching surface r(q) = 0 and what happens when the trajectory crosses it.
struct EventSpec {
  std::string name;
  std::function<double(const Vector&)> r;
  std::function<RowVector(const Vector&)> dr_dq;  // optional; central differences otherwise
  int direction = 0;                              // +1 rising, -1 falling, 0 both
  EventKind kind = EventKind::VelocityJump;
  std::size_t from_mode = 0;
  std::size_t to_mode = 0;
  std::shared_ptr<const JumpFunction> jump;  // VelocityJump and ConstrainedElastic
  std::vector<Index> dof;                    // constrained kinds: independent coordinates

  [[nodiscard]] RowVector gradient(const Vector& q) const;
};

/// Everything the jump matrix depends on, as plain data. Built from models by
/// make_jump_context or filled directly (randomized property tests).
struct JumpContext {
  EventKind kind = EventKind::VelocityJump;
  Index n = 0, p = 0, nc = 0;
  Vector v_minus, v_plus, a_minus, a_plus;
  Vector g_minus, g_plus;  // one-sided cost densities
  RowVector tq;            // event-time row functional: dt/drho = tq Q-
  // Jump-map partials: n rows (or f rows for ConstrainedElastic).
  Vector h_t;
  Matrix h_q, h_v, h_rho;
  // Constrained kinds: partition and post-event constraint data.
  std::vector<Index> dof;
  Matrix phi_q, phi_rho;  // m x n, m x p
  Matrix J_q, J_rho;      // partials of Phi_q v + Phi_t at v+
  // Inelastic impulse multiplier partials (reported only).
  Vector mu_t;
  Matrix mu_q, mu_v, mu_rho;
};

/// The generalized sensitivity jump matrix in natural ordering [Q; V; Gamma; Z]
/// together with its named blocks.
struct JumpMatrix {
  EventKind kind = EventKind::VelocityJump;
  Index n = 0, p = 0, nc = 0;
  Matrix S;  // N x N, N = 2n + p + nc

  Matrix QQ, QG, VQ, VV, VG, ZQ;
  // Constrained blocks (empty otherwise).
  Matrix R_plus, Rbar_plus, D, C, K;
  // Impulse multiplier sensitivity: d(dmu)/drho = dmu_rows * X-.
  Matrix dmu_rows;

  [[nodiscard]] Index size() const { return S.rows(); }
};

/// dt/drho = -(c Q-)/(c v-). Throws GrazingError unless |c v-| >= 1e-8 |c| |v-|.
[[nodiscard]] RowVector event_time_sensitivity(const RowVector& dr_dq, const Matrix& Q_minus,
                                               const Vector& v_minus);
/// The row tq with dt/drho = tq Q-.
[[nodiscard]] RowVector event_time_row(const RowVector& dr_dq, const Vector& v_minus);

[[nodiscard]] JumpMatrix build_jump_matrix(const JumpContext& ctx);

/// X+ = S X- on the stacked (2n+p+nc) x p sensitivity.
[[nodiscard]] Matrix apply_jump_direct(const JumpMatrix& S, const Matrix& X_minus);
[[nodiscard]] SensitivityState apply_jump_direct(const JumpMatrix& S,
                                                 const SensitivityState& X_minus);
/// lambda- = S^T lambda+ on the stacked (2n+p+nc) x nc adjoint.
[[nodiscard]] Matrix apply_jump_adjoint(const JumpMatrix& S, const Matrix& lam_plus);
[[nodiscard]] AdjointState apply_jump_adjoint(const JumpMatrix& S, const AdjointState& lam_plus);

/// X+ from the block-by-block jump equations, without forming S.
[[nodiscard]] Matrix componentwise_jump(const JumpContext& ctx, const Matrix& X_minus);

/// A hybrid system: smooth modes plus the events that connect them.
struct HybridSystem {
  std::vector<Mode> modes;
  std::vector<EventSpec> events;
  std::size_t initial_mode = 0;

  [[nodiscard]] Index n() const { return modes.front().model->n(); }
  [[nodiscard]] Index p() const { return modes.front().model->p(); }
  [[nodiscard]] Index max_m() const;
  void validate() const;
};

struct StateJump {
  Vector v_plus;
  Vector delta_mu;  // ConstrainedInelastic only
};

/// Post-event velocity. Positions and quadratures are copied by the caller.
[[nodiscard]] StateJump apply_state_jump(const EventSpec& spec, const Mode& mode_minus,
                                         const Mode& mode_plus, double t, const Vector& q,
                                         const Vector& v_minus, const Vector& rho);

/// Fills a JumpContext from the models at a localized event.
[[nodiscard]] JumpContext make_jump_context(const EventSpec& spec, const Mode& mode_minus,
                                            const Mode& mode_plus, const CostFunctional& cost,
                                            double t, const Vector& q, const Vector& v_minus,
                                            const Vector& v_plus, const Vector& rho);

}  // namespace hysens
