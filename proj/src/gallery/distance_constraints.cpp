#include "hysens/gallery.hpp"

namespace hysens {

Eigen::Vector2d DistanceConstraints::point(const Vector& q, int idx,
                                           const Eigen::Vector2d& anchor) const {
  if (idx < 0) return anchor;
  return q.segment<2>(2 * idx);
}

double DistanceConstraints::length(const Bar& bar, const Vector& rho) const {
  return bar.rho_index >= 0 ? rho[bar.rho_index] : bar.length;
}

Vector DistanceConstraints::phi(double, const Vector& q, const Vector& rho) const {
  Vector out(m());
  for (Index i = 0; i < m(); ++i) {
    const Bar& b = bars_[i];
    const Eigen::Vector2d d = point(q, b.a, b.anchor_a) - point(q, b.b, b.anchor_b);
    const double L = length(b, rho);
    out[i] = d.squaredNorm() - L * L;
  }
  return out;
}

Matrix DistanceConstraints::phi_q(double, const Vector& q, const Vector& rho) const {
  Matrix G = Matrix::Zero(m(), q.size());
  for (Index i = 0; i < m(); ++i) {
    const Bar& b = bars_[i];
    const Eigen::Vector2d d = point(q, b.a, b.anchor_a) - point(q, b.b, b.anchor_b);
    if (b.a >= 0) G.block<1, 2>(i, 2 * b.a) += 2.0 * d.transpose();
    if (b.b >= 0) G.block<1, 2>(i, 2 * b.b) -= 2.0 * d.transpose();
  }
  return G;
}

Vector DistanceConstraints::phi_t(double, const Vector&, const Vector&) const {
  return Vector::Zero(m());
}

Matrix DistanceConstraints::phi_rho(double, const Vector&, const Vector& rho) const {
  Matrix out = Matrix::Zero(m(), rho.size());
  for (Index i = 0; i < m(); ++i) {
    const Bar& b = bars_[i];
    if (b.rho_index >= 0) out(i, b.rho_index) = -2.0 * rho[b.rho_index];
  }
  return out;
}

Vector DistanceConstraints::gamma(double, const Vector& q, const Vector& v, const Vector&) const {
  Vector out(m());
  const Eigen::Vector2d zero = Eigen::Vector2d::Zero();
  for (Index i = 0; i < m(); ++i) {
    const Bar& b = bars_[i];
    const Eigen::Vector2d dv = point(v, b.a, zero) - point(v, b.b, zero);
    out[i] = 2.0 * dv.squaredNorm();
  }
  return out;
}

Matrix DistanceConstraints::phi_q_times_q(double, const Vector& q, const Vector&,
                                          const Vector& a) const {
  // d/dq [2 d^T (a_a - a_b)] = 2 (a_a - a_b)^T on point a, minus on point b.
  Matrix out = Matrix::Zero(m(), q.size());
  const Eigen::Vector2d zero = Eigen::Vector2d::Zero();
  for (Index i = 0; i < m(); ++i) {
    const Bar& b = bars_[i];
    const Eigen::Vector2d da = point(a, b.a, zero) - point(a, b.b, zero);
    if (b.a >= 0) out.block<1, 2>(i, 2 * b.a) += 2.0 * da.transpose();
    if (b.b >= 0) out.block<1, 2>(i, 2 * b.b) -= 2.0 * da.transpose();
  }
  return out;
}

Matrix DistanceConstraints::phi_q_times_rho(double, const Vector&, const Vector& rho,
                                            const Vector&) const {
  return Matrix::Zero(m(), rho.size());
}

Matrix DistanceConstraints::phi_qT_times_q(double, const Vector& q, const Vector&,
                                           const Vector& w) const {
  const Index n = q.size();
  Matrix out = Matrix::Zero(n, n);
  const Matrix I2 = 2.0 * Matrix::Identity(2, 2);
  for (Index i = 0; i < m(); ++i) {
    const Bar& b = bars_[i];
    const Matrix blk = w[i] * I2;
    if (b.a >= 0) out.block(2 * b.a, 2 * b.a, 2, 2) += blk;
    if (b.b >= 0) out.block(2 * b.b, 2 * b.b, 2, 2) += blk;
    if (b.a >= 0 && b.b >= 0) {
      out.block(2 * b.a, 2 * b.b, 2, 2) -= blk;
      out.block(2 * b.b, 2 * b.a, 2, 2) -= blk;
    }
  }
  return out;
}

Matrix DistanceConstraints::phi_qT_times_rho(double, const Vector& q, const Vector& rho,
                                             const Vector&) const {
  return Matrix::Zero(q.size(), rho.size());
}

Matrix DistanceConstraints::phi_t_q(double, const Vector& q, const Vector&) const {
  return Matrix::Zero(m(), q.size());
}

Matrix DistanceConstraints::phi_t_rho(double, const Vector&, const Vector& rho) const {
  return Matrix::Zero(m(), rho.size());
}

Matrix DistanceConstraints::gamma_q(double, const Vector& q, const Vector&, const Vector&) const {
  return Matrix::Zero(m(), q.size());
}

Matrix DistanceConstraints::gamma_v(double t, const Vector& q, const Vector& v,
                                    const Vector& rho) const {
  return 2.0 * phi_q_times_q(t, q, rho, v);
}

Matrix DistanceConstraints::gamma_rho(double, const Vector&, const Vector&,
                                      const Vector& rho) const {
  return Matrix::Zero(m(), rho.size());
}

}  // namespace hysens
