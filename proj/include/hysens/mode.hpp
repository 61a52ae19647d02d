#pragma once

#include <memory>
#include <string>

#include "hysens/constrained.hpp"
#include "hysens/model.hpp"

namespace hysens {

enum class Formulation { Unconstrained, Penalty, Index1 };

[[nodiscard]] const char* to_string(Formulation f);

/// Acceleration, multipliers and their Jacobians at one point.
struct ModeEval {
  Vector vdot;
  Vector mu;  // empty unless the index-1 formulation is active
  AccelerationJacobians jac;
};

/// One smooth regime of a hybrid system: a model, an optional constraint set
/// and the formulation that turns them into accelerations.
struct Mode {
  std::string name;
  std::shared_ptr<const MultibodyModel> model;
  std::shared_ptr<const ConstraintSet> constraints;
  Formulation formulation = Formulation::Unconstrained;
  PenaltyConfig penalty;

  [[nodiscard]] Index m() const { return constraints ? constraints->m() : 0; }
  [[nodiscard]] bool has_multipliers() const {
    return formulation == Formulation::Index1 && m() > 0;
  }

  /// vdot (and mu for the index-1 formulation).
  [[nodiscard]] DaeSolution acceleration(double t, const Vector& q, const Vector& v,
                                         const Vector& rho) const;
  [[nodiscard]] ModeEval evaluate(double t, const Vector& q, const Vector& v,
                                  const Vector& rho) const;
  /// Throws ValidationError for inconsistent combinations.
  void validate() const;
};

/// g~ and its total partials at (t, q, v) in the given mode.
[[nodiscard]] CostGradients cost_density_gradients(const Mode& mode, const CostFunctional& cost,
                                                   double t, const Vector& q, const Vector& v,
                                                   const Vector& rho);
/// Same, reusing an evaluation already at hand.
[[nodiscard]] CostGradients cost_density_gradients(const CostFunctional& cost, double t,
                                                   const Vector& q, const Vector& v,
                                                   const Vector& rho, const ModeEval& ev);

/// Value of g~ only.
[[nodiscard]] Vector cost_density(const Mode& mode, const CostFunctional& cost, double t,
                                  const Vector& q, const Vector& v, const Vector& rho);

[[nodiscard]] CostGradients terminal_cost_gradients(const Mode& mode, const CostFunctional& cost,
                                                    double tF, const Vector& q, const Vector& v,
                                                    const Vector& rho);

}  // namespace hysens
