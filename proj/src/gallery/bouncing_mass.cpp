#include "options.hpp"

// Point mass in 1-D dropped from height h0 onto y = 0 with restitution e.
// rho = (h0, e, g). Closed forms: t1 = sqrt(2 h0 / g), v- = -sqrt(2 g h0), v+ = -e v-.

namespace hysens {

namespace {

constexpr Index kH0 = 0, kE = 1, kG = 2;

class BouncingMass final : public MultibodyModel {
 public:
  explicit BouncingMass(double mass) : mass_(mass) {}
  Index n() const override { return 1; }
  Index p() const override { return 3; }
  Matrix mass(double, const Vector&, const Vector&) const override {
    return Matrix::Constant(1, 1, mass_);
  }
  Vector force(double, const Vector&, const Vector&, const Vector& rho) const override {
    return Vector::Constant(1, -mass_ * rho[kG]);
  }
  InitialState initial_state(const Vector& rho) const override {
    InitialState s;
    s.q0 = Vector::Constant(1, rho[kH0]);
    s.v0 = Vector::Zero(1);
    s.dq0_drho = Matrix::Zero(1, 3);
    s.dq0_drho(0, kH0) = 1.0;
    s.dv0_drho = Matrix::Zero(1, 3);
    return s;
  }
  Matrix mass_q_times(double, const Vector&, const Vector&, const Vector&) const override {
    return Matrix::Zero(1, 1);
  }
  Matrix mass_rho_times(double, const Vector&, const Vector&, const Vector&) const override {
    return Matrix::Zero(1, 3);
  }
  Matrix force_q(double, const Vector&, const Vector&, const Vector&) const override {
    return Matrix::Zero(1, 1);
  }
  Matrix force_v(double, const Vector&, const Vector&, const Vector&) const override {
    return Matrix::Zero(1, 1);
  }
  Matrix force_rho(double, const Vector&, const Vector&, const Vector&) const override {
    Matrix out = Matrix::Zero(1, 3);
    out(0, kG) = -mass_;
    return out;
  }

 private:
  double mass_;
};

// v+ = -e v-
class RestitutionJump final : public JumpFunction {
 public:
  Vector h(double, const Vector&, const Vector& v, const Vector& rho) const override {
    return -rho[kE] * v;
  }
  Vector h_t(double, const Vector&, const Vector& v, const Vector&) const override {
    return Vector::Zero(v.size());
  }
  Matrix h_q(double, const Vector& q, const Vector& v, const Vector&) const override {
    return Matrix::Zero(v.size(), q.size());
  }
  Matrix h_v(double, const Vector&, const Vector& v, const Vector& rho) const override {
    return -rho[kE] * Matrix::Identity(v.size(), v.size());
  }
  Matrix h_rho(double, const Vector&, const Vector& v, const Vector& rho) const override {
    Matrix out = Matrix::Zero(v.size(), rho.size());
    out.col(kE) = -v;
    return out;
  }
};

}  // namespace

GalleryProblem make_bouncing_mass(const GalleryOptions& opts) {
  using gallery_detail::number;
  gallery_detail::check_keys(opts, {"h0", "e", "g", "m"}, "bouncing-mass");
  const double m = number(opts, "m", 1.0);
  if (!(m > 0)) throw ValidationError("bouncing-mass: m must be > 0");

  GalleryProblem pb;
  pb.name = "bouncing-mass";
  pb.rho.rho = Vector(3);
  pb.rho.rho << number(opts, "h0", 1.0), number(opts, "e", 0.8), number(opts, "g", 9.81);
  pb.rho.labels = {"h0", "e", "g"};
  if (!(pb.rho.rho[kH0] > 0) || !(pb.rho.rho[kG] > 0)) {
    throw ValidationError("bouncing-mass: h0 and g must be > 0");
  }

  Mode flight;
  flight.name = "flight";
  flight.model = std::make_shared<BouncingMass>(m);
  pb.system.modes = {flight};

  EventSpec ground;
  ground.name = "ground";
  ground.r = [](const Vector& q) { return q[0]; };
  ground.dr_dq = [](const Vector&) { return RowVector::Ones(1); };
  ground.direction = -1;
  ground.kind = EventKind::VelocityJump;
  ground.jump = std::make_shared<RestitutionJump>();
  pb.system.events = {ground};

  using T = ComponentCost::Term;
  using V = ComponentCost::Var;
  pb.costs["terminal-y"] = std::make_shared<ComponentCost>(std::vector<T>{},
                                                           std::vector<T>{{V::Position, 0, 1, 1.0}});
  pb.costs["int-y"] =
      std::make_shared<ComponentCost>(std::vector<T>{{V::Position, 0, 1, 1.0}}, std::vector<T>{});
  pb.costs["int-vsq"] =
      std::make_shared<ComponentCost>(std::vector<T>{{V::Velocity, 0, 2, 1.0}}, std::vector<T>{});
  pb.default_cost = "terminal-y";
  pb.t0 = 0.0;
  pb.tF = 1.0;
  return pb;
}

}  // namespace hysens
