#include "hysens/mode.hpp"

namespace hysens {

const char* to_string(Formulation f) {
  switch (f) {
    case Formulation::Unconstrained: return "unconstrained";
    case Formulation::Penalty: return "penalty";
    case Formulation::Index1: return "index1";
  }
  return "unknown";
}

void Mode::validate() const {
  if (!model) throw ValidationError("mode '" + name + "' has no model");
  if (formulation != Formulation::Unconstrained && !constraints) {
    throw ValidationError("mode '" + name + "' uses a constrained formulation without constraints");
  }
  if (constraints && constraints->m() >= model->n()) {
    throw ValidationError("mode '" + name + "' has m >= n constraints");
  }
  if (formulation == Formulation::Penalty) penalty.validate(m());
}

DaeSolution Mode::acceleration(double t, const Vector& q, const Vector& v,
                               const Vector& rho) const {
  switch (formulation) {
    case Formulation::Penalty:
      return {penalty_rhs(*model, *constraints, t, q, v, rho, penalty), Vector(0)};
    case Formulation::Index1:
      return dae_solve(*model, constraints.get(), t, q, v, rho);
    case Formulation::Unconstrained:
      break;
  }
  return {eom_rhs(*model, t, q, v, rho), Vector(0)};
}

ModeEval Mode::evaluate(double t, const Vector& q, const Vector& v, const Vector& rho) const {
  ModeEval ev;
  switch (formulation) {
    case Formulation::Penalty:
      ev.vdot = penalty_rhs(*model, *constraints, t, q, v, rho, penalty);
      ev.jac = penalty_jacobians(*model, *constraints, t, q, v, rho, penalty);
      return ev;
    case Formulation::Index1: {
      DaeSolution s = dae_solve(*model, constraints.get(), t, q, v, rho);
      ev.jac = dae_jacobians(*model, constraints.get(), t, q, v, s.vdot, s.mu, rho);
      ev.vdot = std::move(s.vdot);
      ev.mu = std::move(s.mu);
      return ev;
    }
    case Formulation::Unconstrained:
      break;
  }
  ev.vdot = eom_rhs(*model, t, q, v, rho);
  ev.jac = eom_jacobians(*model, t, q, v, rho);
  return ev;
}

CostGradients cost_density_gradients(const CostFunctional& cost, double t, const Vector& q,
                                     const Vector& v, const Vector& rho, const ModeEval& ev) {
  return assemble_cost_gradients(cost, CostPoint{t, q, v, ev.vdot, rho, ev.mu}, ev.jac);
}

CostGradients cost_density_gradients(const Mode& mode, const CostFunctional& cost, double t,
                                     const Vector& q, const Vector& v, const Vector& rho) {
  return cost_density_gradients(cost, t, q, v, rho, mode.evaluate(t, q, v, rho));
}

Vector cost_density(const Mode& mode, const CostFunctional& cost, double t, const Vector& q,
                    const Vector& v, const Vector& rho) {
  const DaeSolution a = mode.acceleration(t, q, v, rho);
  const CostPoint pt{t, q, v, a.vdot, rho, a.mu};
  return cost.g(pt, cost.u(pt));
}

CostGradients terminal_cost_gradients(const Mode& mode, const CostFunctional& cost, double tF,
                                      const Vector& q, const Vector& v, const Vector& rho) {
  const ModeEval ev = mode.evaluate(tF, q, v, rho);
  return assemble_terminal_gradients(cost, CostPoint{tF, q, v, ev.vdot, rho, ev.mu}, ev.jac);
}

}  // namespace hysens
