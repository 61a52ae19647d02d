#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hysens/errors.hpp"

namespace hysens {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Matrix = Eigen::MatrixXd;

/// Sizes shared by every stage of a sensitivity run.
///
/// n: generalized coordinates, p: parameters, nc: scalar cost outputs,
/// m: constraint equations (0 when unconstrained), f = n - m velocity
/// degrees of freedom.
struct Dimensions {
  Index n = 1;
  Index p = 1;
  Index nc = 1;
  Index m = 0;

  [[nodiscard]] Index f() const { return n - m; }
  /// Length of the canonical state [q; v; rho; z].
  [[nodiscard]] Index canonical() const { return 2 * n + p + nc; }

  /// Throws ValidationError unless n >= 1, p >= 1, nc >= 1 and 0 <= m < n.
  void validate() const;
};

struct GeneralizedState {
  double t = 0.0;
  Vector q;
  Vector v;
  Vector vdot;  // cached; recomputable from (t, q, v, rho)
};

struct ParameterVector {
  Vector rho;
  std::vector<std::string> labels;

  [[nodiscard]] Index size() const { return rho.size(); }
  /// Index of a label, or throws ValidationError.
  [[nodiscard]] Index index_of(const std::string& label) const;
};

struct QuadratureState {
  Vector z;
};

/// Direct sensitivities X = [Q; V; Gamma; Z] (plus Lambda for the index-1 DAE).
struct SensitivityState {
  Matrix Q;       // n x p
  Matrix V;       // n x p
  Matrix Gamma;   // p x p, always identity
  Matrix Z;       // nc x p
  Matrix Lambda;  // m x p, empty unless the DAE formulation is active

  /// X(t0) = [dq0/drho; dv0/drho; I; 0].
  static SensitivityState initial(const Matrix& dq0, const Matrix& dv0, Index nc);

  /// Stacked (2n+p+nc) x p matrix in the fixed order [Q; V; Gamma; Z].
  [[nodiscard]] Matrix stacked() const;
  static SensitivityState from_stacked(const Matrix& X, const Dimensions& dims);
};

/// Adjoint variables lambda = [lamQ; lamV; lamGamma; lamZ] (plus lamLambda for
/// the DAE formulation, which stays identically zero).
struct AdjointState {
  Matrix lamQ;       // n x nc
  Matrix lamV;       // n x nc
  Matrix lamGamma;   // p x nc
  Matrix lamZ;       // nc x nc, always identity
  Matrix lamLambda;  // m x nc, zero

  [[nodiscard]] Matrix stacked() const;
  static AdjointState from_stacked(const Matrix& lam, const Dimensions& dims);
};

/// Returns [q; v; rho; z].
[[nodiscard]] Vector pack_canonical(const GeneralizedState& gs, const ParameterVector& rho,
                                    const QuadratureState& zq);

struct CanonicalParts {
  GeneralizedState state;
  ParameterVector rho;
  QuadratureState z;
};

/// Exact inverse of pack_canonical. Labels are not part of the canonical
/// vector and come back empty.
[[nodiscard]] CanonicalParts unpack_canonical(const Vector& x, const Dimensions& dims);

/// True when every entry is finite.
[[nodiscard]] bool all_finite(const Eigen::Ref<const Matrix>& m);

}  // namespace hysens
