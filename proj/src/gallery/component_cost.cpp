#include <algorithm>

#include "hysens/gallery.hpp"

namespace hysens {

ComponentCost::ComponentCost(std::vector<Term> density, std::vector<Term> terminal)
    : density_(std::move(density)), terminal_(std::move(terminal)) {
  for (const Term& t : density_) {
    if (t.power != 1 && t.power != 2) throw ValidationError("cost term power must be 1 or 2");
    if (t.var == Var::Acceleration &&
        std::find(accel_.begin(), accel_.end(), t.index) == accel_.end()) {
      accel_.push_back(t.index);
    }
  }
  for (const Term& t : terminal_) {
    if (t.power != 1 && t.power != 2) throw ValidationError("cost term power must be 1 or 2");
    if (t.var == Var::Acceleration) {
      throw ValidationError("terminal cost terms may not depend on accelerations");
    }
  }
}

namespace {

double term_value(const ComponentCost::Term& t, double x) {
  return t.coef * (t.power == 1 ? x : x * x);
}

double term_slope(const ComponentCost::Term& t, double x) {
  return t.coef * (t.power == 1 ? 1.0 : 2.0 * x);
}

}  // namespace

Vector ComponentCost::u(const CostPoint& pt) const {
  Vector out(nu());
  for (std::size_t k = 0; k < accel_.size(); ++k) out[static_cast<Index>(k)] = pt.vdot[accel_[k]];
  return out;
}

Vector ComponentCost::g(const CostPoint& pt, const Vector& uval) const {
  double s = 0.0;
  for (const Term& t : density_) {
    switch (t.var) {
      case Var::Position: s += term_value(t, pt.q[t.index]); break;
      case Var::Velocity: s += term_value(t, pt.v[t.index]); break;
      case Var::Acceleration: {
        const auto k = std::find(accel_.begin(), accel_.end(), t.index) - accel_.begin();
        s += term_value(t, uval[k]);
        break;
      }
    }
  }
  return Vector::Constant(1, s);
}

Vector ComponentCost::w(double, const Vector& q, const Vector& v, const Vector&,
                        const Vector&) const {
  double s = 0.0;
  for (const Term& t : terminal_) {
    s += term_value(t, t.var == Var::Position ? q[t.index] : v[t.index]);
  }
  return Vector::Constant(1, s);
}

CostPartials ComponentCost::g_partials(const CostPoint& pt, const Vector& uval) const {
  const Index n = pt.q.size();
  CostPartials P;
  P.q = Matrix::Zero(1, n);
  P.v = Matrix::Zero(1, n);
  P.vdot = Matrix::Zero(1, n);
  P.rho = Matrix::Zero(1, pt.rho.size());
  P.mu = Matrix::Zero(1, pt.mu.size());
  P.u = Matrix::Zero(1, nu());
  for (const Term& t : density_) {
    switch (t.var) {
      case Var::Position: P.q(0, t.index) += term_slope(t, pt.q[t.index]); break;
      case Var::Velocity: P.v(0, t.index) += term_slope(t, pt.v[t.index]); break;
      case Var::Acceleration: {
        const auto k = std::find(accel_.begin(), accel_.end(), t.index) - accel_.begin();
        P.u(0, k) += term_slope(t, uval[k]);
        break;
      }
    }
  }
  return P;
}

CostPartials ComponentCost::u_partials(const CostPoint& pt) const {
  const Index n = pt.q.size();
  CostPartials P;
  P.q = Matrix::Zero(nu(), n);
  P.v = Matrix::Zero(nu(), n);
  P.vdot = Matrix::Zero(nu(), n);
  P.rho = Matrix::Zero(nu(), pt.rho.size());
  P.mu = Matrix::Zero(nu(), pt.mu.size());
  P.u = Matrix::Zero(nu(), 0);
  for (std::size_t k = 0; k < accel_.size(); ++k) P.vdot(static_cast<Index>(k), accel_[k]) = 1.0;
  return P;
}

CostPartials ComponentCost::w_partials(double, const Vector& q, const Vector& v, const Vector& rho,
                                       const Vector&) const {
  CostPartials P;
  P.q = Matrix::Zero(1, q.size());
  P.v = Matrix::Zero(1, v.size());
  P.rho = Matrix::Zero(1, rho.size());
  P.u = Matrix::Zero(1, nu());
  for (const Term& t : terminal_) {
    if (t.var == Var::Position) P.q(0, t.index) += term_slope(t, q[t.index]);
    else P.v(0, t.index) += term_slope(t, v[t.index]);
  }
  return P;
}

}  // namespace hysens
