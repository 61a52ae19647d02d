#include <cmath>

#include "options.hpp"

// Planar point mass on a massless string of length L anchored at the origin.
// q = (x, y), rho = (g, x0, vx0). Mode "slack" is free flight; mode "taut"
// adds |q|^2 - L^2 = 0. The string snaps taut (inelastic) when |q| reaches L.

namespace hysens {

namespace {

constexpr Index kG = 0, kX0 = 1, kVX0 = 2;

class PointMass2d final : public MultibodyModel {
 public:
  PointMass2d(double mass, double length, bool taut_start)
      : mass_(mass), length_(length), taut_(taut_start) {}
  Index n() const override { return 2; }
  Index p() const override { return 3; }
  Matrix mass(double, const Vector&, const Vector&) const override {
    return mass_ * Matrix::Identity(2, 2);
  }
  Vector force(double, const Vector&, const Vector&, const Vector& rho) const override {
    return Eigen::Vector2d(0.0, -mass_ * rho[kG]);
  }
  Matrix mass_q_times(double, const Vector&, const Vector&, const Vector&) const override {
    return Matrix::Zero(2, 2);
  }
  Matrix mass_rho_times(double, const Vector&, const Vector&, const Vector&) const override {
    return Matrix::Zero(2, 3);
  }
  Matrix force_q(double, const Vector&, const Vector&, const Vector&) const override {
    return Matrix::Zero(2, 2);
  }
  Matrix force_v(double, const Vector&, const Vector&, const Vector&) const override {
    return Matrix::Zero(2, 2);
  }
  Matrix force_rho(double, const Vector&, const Vector&, const Vector&) const override {
    Matrix out = Matrix::Zero(2, 3);
    out(1, kG) = -mass_;
    return out;
  }

  InitialState initial_state(const Vector& rho) const override {
    const double x0 = rho[kX0], vx = rho[kVX0];
    InitialState s;
    s.dq0_drho = Matrix::Zero(2, 3);
    s.dv0_drho = Matrix::Zero(2, 3);
    if (!taut_) {
      s.q0 = Eigen::Vector2d(x0, 0.0);
      s.v0 = Eigen::Vector2d(vx, 0.0);
      s.dq0_drho(0, kX0) = 1.0;
      s.dv0_drho(0, kVX0) = 1.0;
      return s;
    }
    if (!(std::abs(x0) < length_)) {
      throw ValidationError("pendulum: taut start needs |x0| < L");
    }
    // Hanging below the anchor, velocity tangent to the circle.
    const double y = -std::sqrt(length_ * length_ - x0 * x0);
    const double dy = -x0 / y;  // dy/dx0
    const double vy = -x0 * vx / y;
    s.q0 = Eigen::Vector2d(x0, y);
    s.v0 = Eigen::Vector2d(vx, vy);
    s.dq0_drho(0, kX0) = 1.0;
    s.dq0_drho(1, kX0) = dy;
    s.dv0_drho(0, kVX0) = 1.0;
    s.dv0_drho(1, kX0) = -vx / y + x0 * vx / (y * y) * dy;
    s.dv0_drho(1, kVX0) = -x0 / y;
    return s;
  }

 private:
  double mass_, length_;
  bool taut_;
};

}  // namespace

GalleryProblem make_pendulum(const GalleryOptions& opts) {
  using gallery_detail::number;
  gallery_detail::check_keys(opts, {"g", "x0", "vx0", "m", "L", "start", "formulation"},
                             "pendulum");
  const auto get = [&](const std::string& k, const std::string& def) {
    const auto it = opts.find(k);
    return it == opts.end() ? def : it->second;
  };
  const std::string start = get("start", "slack");
  const std::string form = get("formulation", "index1");
  if (start != "slack" && start != "taut") {
    throw ValidationError("pendulum: start must be slack or taut");
  }
  if (form != "index1" && form != "penalty") {
    throw ValidationError("pendulum: formulation must be index1 or penalty");
  }
  const double m = number(opts, "m", 1.0);
  const double L = number(opts, "L", 1.0);
  if (!(m > 0) || !(L > 0)) throw ValidationError("pendulum: m and L must be > 0");

  GalleryProblem pb;
  pb.name = "pendulum";
  pb.rho.rho = Vector(3);
  pb.rho.rho << number(opts, "g", 9.81), number(opts, "x0", 0.6), number(opts, "vx0", 1.0);
  pb.rho.labels = {"g", "x0", "vx0"};

  const bool taut_start = start == "taut";
  auto model = std::make_shared<PointMass2d>(m, L, taut_start);
  DistanceConstraints::Bar string_bar;
  string_bar.a = 0;
  string_bar.b = -1;
  string_bar.length = L;
  auto string_cons = std::make_shared<DistanceConstraints>(std::vector{string_bar});

  Mode slack;
  slack.name = "slack";
  slack.model = model;
  Mode taut;
  taut.name = "taut";
  taut.model = model;
  taut.constraints = string_cons;
  taut.formulation = form == "penalty" ? Formulation::Penalty : Formulation::Index1;
  pb.system.modes = {slack, taut};
  pb.system.initial_mode = taut_start ? 1 : 0;

  EventSpec snap;
  snap.name = "string-taut";
  snap.r = [L](const Vector& q) { return q.squaredNorm() - L * L; };
  snap.dr_dq = [](const Vector& q) { return RowVector(2.0 * q.transpose()); };
  snap.direction = +1;
  snap.kind = EventKind::ConstrainedInelastic;
  snap.from_mode = 0;
  snap.to_mode = 1;
  snap.dof = {0};
  pb.system.events = {snap};

  using T = ComponentCost::Term;
  using V = ComponentCost::Var;
  pb.costs["int-y"] =
      std::make_shared<ComponentCost>(std::vector<T>{{V::Position, 1, 1, 1.0}}, std::vector<T>{});
  pb.costs["terminal-x"] = std::make_shared<ComponentCost>(std::vector<T>{},
                                                           std::vector<T>{{V::Position, 0, 1, 1.0}});
  pb.costs["int-vx2"] =
      std::make_shared<ComponentCost>(std::vector<T>{{V::Velocity, 0, 2, 1.0}}, std::vector<T>{});
  pb.default_cost = "int-y";
  pb.t0 = 0.0;
  pb.tF = 2.0;
  return pb;
}

}  // namespace hysens
