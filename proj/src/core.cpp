#include "hysens/core.hpp"

#include <sstream>

namespace hysens {

void Dimensions::validate() const {
  std::ostringstream msg;
  if (n < 1) msg << "n must be >= 1 (got " << n << "); ";
  if (p < 1) msg << "p must be >= 1 (got " << p << "); ";
  if (nc < 1) msg << "nc must be >= 1 (got " << nc << "); ";
  if (m < 0 || m >= n) msg << "m must satisfy 0 <= m < n (got m=" << m << ", n=" << n << "); ";
  if (!msg.str().empty()) throw ValidationError("invalid dimensions: " + msg.str());
}

Index ParameterVector::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<Index>(i);
  }
  throw ValidationError("unknown parameter '" + label + "'");
}

SensitivityState SensitivityState::initial(const Matrix& dq0, const Matrix& dv0, Index nc) {
  if (dq0.rows() != dv0.rows() || dq0.cols() != dv0.cols()) {
    throw ValidationError("initial sensitivity blocks dq0/drho and dv0/drho differ in shape");
  }
  const Index p = dq0.cols();
  SensitivityState X;
  X.Q = dq0;
  X.V = dv0;
  X.Gamma = Matrix::Identity(p, p);
  X.Z = Matrix::Zero(nc, p);
  return X;
}

Matrix SensitivityState::stacked() const {
  const Index n = Q.rows(), p = Q.cols(), nc = Z.rows();
  Matrix X(2 * n + p + nc, p);
  X << Q, V, Gamma, Z;
  return X;
}

SensitivityState SensitivityState::from_stacked(const Matrix& X, const Dimensions& dims) {
  const Index n = dims.n, p = dims.p, nc = dims.nc;
  if (X.rows() != dims.canonical() || X.cols() != p) {
    std::ostringstream msg;
    msg << "stacked sensitivity has shape " << X.rows() << "x" << X.cols() << ", expected "
        << dims.canonical() << "x" << p;
    throw ValidationError(msg.str());
  }
  SensitivityState s;
  s.Q = X.topRows(n);
  s.V = X.middleRows(n, n);
  s.Gamma = X.middleRows(2 * n, p);
  s.Z = X.bottomRows(nc);
  return s;
}

Matrix AdjointState::stacked() const {
  const Index n = lamQ.rows(), p = lamGamma.rows(), nc = lamZ.rows();
  Matrix lam(2 * n + p + nc, nc);
  lam << lamQ, lamV, lamGamma, lamZ;
  return lam;
}

AdjointState AdjointState::from_stacked(const Matrix& lam, const Dimensions& dims) {
  const Index n = dims.n, p = dims.p, nc = dims.nc;
  if (lam.rows() != dims.canonical() || lam.cols() != nc) {
    std::ostringstream msg;
    msg << "stacked adjoint has shape " << lam.rows() << "x" << lam.cols() << ", expected "
        << dims.canonical() << "x" << nc;
    throw ValidationError(msg.str());
  }
  AdjointState a;
  a.lamQ = lam.topRows(n);
  a.lamV = lam.middleRows(n, n);
  a.lamGamma = lam.middleRows(2 * n, p);
  a.lamZ = lam.bottomRows(nc);
  a.lamLambda = Matrix::Zero(dims.m, nc);
  return a;
}

Vector pack_canonical(const GeneralizedState& gs, const ParameterVector& rho,
                      const QuadratureState& zq) {
  if (gs.q.size() != gs.v.size()) {
    std::ostringstream msg;
    msg << "pack_canonical: q has length " << gs.q.size() << " but v has length " << gs.v.size();
    throw ValidationError(msg.str());
  }
  if (gs.q.size() < 1 || rho.rho.size() < 1 || zq.z.size() < 1) {
    throw ValidationError("pack_canonical: q, rho and z must all be non-empty");
  }
  const Index n = gs.q.size(), p = rho.rho.size(), nc = zq.z.size();
  Vector x(2 * n + p + nc);
  x << gs.q, gs.v, rho.rho, zq.z;
  return x;
}

CanonicalParts unpack_canonical(const Vector& x, const Dimensions& dims) {
  if (x.size() != dims.canonical()) {
    std::ostringstream msg;
    msg << "unpack_canonical: vector has length " << x.size() << ", expected " << dims.canonical();
    throw ValidationError(msg.str());
  }
  CanonicalParts parts;
  parts.state.q = x.head(dims.n);
  parts.state.v = x.segment(dims.n, dims.n);
  parts.rho.rho = x.segment(2 * dims.n, dims.p);
  parts.z.z = x.tail(dims.nc);
  return parts;
}

bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

}  // namespace hysens
