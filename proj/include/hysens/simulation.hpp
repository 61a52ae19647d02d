#pragma once

#include <string>
#include <vector>

#include "hysens/hybrid.hpp"
#include "hysens/integrate.hpp"

namespace hysens {

struct SimulationOptions {
  IntegratorConfig integrator;
  bool sensitivities = false;  // carry [Q; V; Z] alongside the state
  std::size_t max_events = 10000;
};

/// One smooth piece of a hybrid trajectory. Dense rows are [q; v; z] followed,
/// when sensitivities are carried, by vec([Q; V; Z]) in column-major order.
struct Segment {
  std::size_t mode = 0;
  DenseSegment dense;
};

struct EventRecord {
  std::size_t event_index = 0;
  std::string name;
  EventKind kind = EventKind::VelocityJump;
  std::size_t mode_minus = 0, mode_plus = 0;
  double t_eve = 0.0;
  GeneralizedState minus, plus;  // vdot holds the one-sided accelerations
  Vector z;
  RowVector dteve_dQminus;  // dt/drho = dteve_dQminus * Q-
  RowVector dteve_drho;     // empty unless sensitivities were carried
  Vector delta_mu;          // impulse multipliers (inelastic events)
  JumpContext context;
  JumpMatrix jump;
  Matrix X_minus, X_plus;  // stacked canonical sensitivities, when carried
};

/// Piecewise-smooth forward solution with dense output and event records.
struct HybridTrajectory {
  Dimensions dims;
  Vector rho;
  double t0 = 0.0, tF = 0.0;
  bool has_sensitivities = false;
  InitialState initial;
  std::vector<Segment> segments;
  std::vector<EventRecord> events;

  /// Index of the first segment containing t (the pre-event side at event times).
  [[nodiscard]] std::size_t segment_at(double t) const;
  /// [q; v; z] at t.
  [[nodiscard]] Vector state_at(double t) const;
  [[nodiscard]] Vector state_at(std::size_t segment, double t) const;
  /// Stacked canonical sensitivity [Q; V; I; Z] at t inside a segment.
  [[nodiscard]] Matrix sensitivity_at(std::size_t segment, double t) const;
  [[nodiscard]] const Vector& final_state() const { return segments.back().dense.back(); }
  [[nodiscard]] std::size_t final_mode() const { return segments.back().mode; }
};

/// Splits a dense row vector into its parts.
struct StateView {
  Vector q, v, z;
};
[[nodiscard]] StateView split_state(const Vector& y, const Dimensions& dims);
/// Stacked canonical X from a dense row vector that carries sensitivities.
[[nodiscard]] Matrix canonical_sensitivity(const Vector& y, const Dimensions& dims);

/// Integrates the hybrid system on [t0, tF], localizing and applying every
/// event. With opt.sensitivities the tangent linear model rides along and jumps
/// with S at each event.
[[nodiscard]] HybridTrajectory simulate(const HybridSystem& sys, const CostFunctional& cost,
                                        const Vector& rho, double t0, double tF,
                                        const SimulationOptions& opt);

/// psi = z(tF) + w~(tF).
[[nodiscard]] Vector cost_value(const HybridTrajectory& traj, const HybridSystem& sys,
                                const CostFunctional& cost);

/// Constraint residuals at every accepted step of every constrained segment.
[[nodiscard]] ConstraintResiduals constraint_residuals(const HybridTrajectory& traj,
                                                       const HybridSystem& sys);

}  // namespace hysens
