#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <random>

#include "hysens/adjoint.hpp"
#include "hysens/direct.hpp"
#include "hysens/gallery.hpp"
#include "hysens/oracle.hpp"

namespace hysens::test {

// Model from closures; every partial uses the finite-difference defaults.
class FnModel final : public MultibodyModel {
 public:
  using MassFn = std::function<Matrix(double, const Vector&, const Vector&)>;
  using ForceFn = std::function<Vector(double, const Vector&, const Vector&, const Vector&)>;
  using InitFn = std::function<InitialState(const Vector&)>;

  FnModel(Index n, Index p, MassFn m, ForceFn f, InitFn i)
      : n_(n), p_(p), mass_(std::move(m)), force_(std::move(f)), init_(std::move(i)) {}
  Index n() const override { return n_; }
  Index p() const override { return p_; }
  Matrix mass(double t, const Vector& q, const Vector& rho) const override {
    return mass_(t, q, rho);
  }
  Vector force(double t, const Vector& q, const Vector& v, const Vector& rho) const override {
    return force_(t, q, v, rho);
  }
  InitialState initial_state(const Vector& rho) const override { return init_(rho); }

 private:
  Index n_, p_;
  MassFn mass_;
  ForceFn force_;
  InitFn init_;
};

class FnConstraints final : public ConstraintSet {
 public:
  using PhiFn = std::function<Vector(double, const Vector&, const Vector&)>;
  FnConstraints(Index m, PhiFn phi) : m_(m), phi_(std::move(phi)) {}
  Index m() const override { return m_; }
  Vector phi(double t, const Vector& q, const Vector& rho) const override {
    return phi_(t, q, rho);
  }

 private:
  Index m_;
  PhiFn phi_;
};

// Cost from closures; partials use the finite-difference defaults.
class FnCost final : public CostFunctional {
 public:
  using GFn = std::function<Vector(const CostPoint&)>;
  using WFn = std::function<Vector(double, const Vector&, const Vector&, const Vector&)>;
  FnCost(Index nc, GFn g, WFn w = nullptr) : nc_(nc), g_(std::move(g)), w_(std::move(w)) {}
  Index nc() const override { return nc_; }
  Vector g(const CostPoint& pt, const Vector&) const override { return g_(pt); }
  Vector w(double t, const Vector& q, const Vector& v, const Vector& rho,
           const Vector&) const override {
    return w_ ? w_(t, q, v, rho) : Vector::Zero(nc_);
  }

 private:
  Index nc_;
  GFn g_;
  WFn w_;
};

inline InitialState fixed_initial(Vector q0, Vector v0, Index p) {
  InitialState s;
  s.dq0_drho = Matrix::Zero(q0.size(), p);
  s.dv0_drho = Matrix::Zero(v0.size(), p);
  s.q0 = std::move(q0);
  s.v0 = std::move(v0);
  return s;
}

inline HybridSystem single_mode(std::shared_ptr<const MultibodyModel> model) {
  HybridSystem sys;
  Mode m;
  m.name = "smooth";
  m.model = std::move(model);
  sys.modes = {m};
  return sys;
}

// Test-side central differences, kept separate from the library's fallback.
template <class Fn>
Matrix central_jacobian(Fn&& fn, const Vector& x, double h = 1e-6) {
  const Vector f0 = fn(x);
  Matrix J(f0.size(), x.size());
  for (Index j = 0; j < x.size(); ++j) {
    Vector xp = x, xm = x;
    const double step = h * std::max(1.0, std::abs(x[j]));
    xp[j] += step;
    xm[j] -= step;
    J.col(j) = (fn(xp) - fn(xm)) / (2.0 * step);
  }
  return J;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

inline double max_rel_err(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) worst = std::max(worst, rel_err(a(i, j), b(i, j)));
  return worst;
}

inline Matrix random_matrix(std::mt19937_64& rng, Index r, Index c) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

// Random but well-posed jump context of the given kind. Constrained kinds get
// m = n - f constraints whose dependent block is diagonally dominated.
inline JumpContext random_context(std::mt19937_64& rng, EventKind kind, Index n, Index p, Index nc,
                                  Index f) {
  JumpContext c;
  c.kind = kind;
  c.n = n;
  c.p = p;
  c.nc = nc;
  c.v_minus = random_matrix(rng, n, 1);
  c.v_plus = random_matrix(rng, n, 1);
  c.a_minus = random_matrix(rng, n, 1);
  c.a_plus = random_matrix(rng, n, 1);
  c.g_minus = random_matrix(rng, nc, 1);
  c.g_plus = random_matrix(rng, nc, 1);
  c.tq = random_matrix(rng, 1, n);
  const bool constrained =
      kind == EventKind::ConstrainedElastic || kind == EventKind::ConstrainedInelastic;
  const Index k = kind == EventKind::ConstrainedElastic ? f : n;
  c.h_t = random_matrix(rng, k, 1);
  c.h_q = random_matrix(rng, k, n);
  c.h_v = random_matrix(rng, k, k);
  c.h_rho = random_matrix(rng, k, p);
  if (kind == EventKind::RhsSwitch) {
    c.h_t.setZero();
    c.h_q.setZero();
    c.h_v.setIdentity();
    c.h_rho.setZero();
    c.v_plus = c.v_minus;
  }
  if (constrained) {
    const Index m = n - f;
    std::vector<Index> perm(n);
    for (Index i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    c.dof.assign(perm.begin(), perm.begin() + f);
    c.phi_q = random_matrix(rng, m, n);
    for (Index r = 0; r < m; ++r) c.phi_q(r, perm[f + r]) += 4.0;
    c.phi_rho = random_matrix(rng, m, p);
    c.J_q = random_matrix(rng, m, n);
    c.J_rho = random_matrix(rng, m, p);
    if (kind == EventKind::ConstrainedInelastic) {
      c.mu_t = random_matrix(rng, m, 1);
      c.mu_q = random_matrix(rng, m, n);
      c.mu_v = random_matrix(rng, m, n);
      c.mu_rho = random_matrix(rng, m, p);
    }
  }
  return c;
}

}  // namespace hysens::test
