#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hysens/hybrid.hpp"

namespace hysens {

/// Squared-length constraints |p_a - p_b|^2 - L^2 = 0 between planar points
/// stored as (x, y) pairs in q. A point index of -1 denotes a fixed anchor.
/// Lengths may be parameters (rho_index >= 0). All derivatives are analytic.
class DistanceConstraints final : public ConstraintSet {
 public:
  struct Bar {
    int a = -1, b = -1;
    Eigen::Vector2d anchor_a = Eigen::Vector2d::Zero();
    Eigen::Vector2d anchor_b = Eigen::Vector2d::Zero();
    double length = 1.0;
    Index rho_index = -1;
  };

  explicit DistanceConstraints(std::vector<Bar> bars) : bars_(std::move(bars)) {}

  [[nodiscard]] Index m() const override { return static_cast<Index>(bars_.size()); }
  [[nodiscard]] const std::vector<Bar>& bars() const { return bars_; }
  [[nodiscard]] double length(const Bar& bar, const Vector& rho) const;

  [[nodiscard]] Vector phi(double t, const Vector& q, const Vector& rho) const override;
  [[nodiscard]] Matrix phi_q(double t, const Vector& q, const Vector& rho) const override;
  [[nodiscard]] Vector phi_t(double t, const Vector& q, const Vector& rho) const override;
  [[nodiscard]] Matrix phi_rho(double t, const Vector& q, const Vector& rho) const override;
  [[nodiscard]] Vector gamma(double t, const Vector& q, const Vector& v,
                             const Vector& rho) const override;
  [[nodiscard]] Matrix phi_q_times_q(double t, const Vector& q, const Vector& rho,
                                     const Vector& a) const override;
  [[nodiscard]] Matrix phi_q_times_rho(double t, const Vector& q, const Vector& rho,
                                       const Vector& a) const override;
  [[nodiscard]] Matrix phi_qT_times_q(double t, const Vector& q, const Vector& rho,
                                      const Vector& w) const override;
  [[nodiscard]] Matrix phi_qT_times_rho(double t, const Vector& q, const Vector& rho,
                                        const Vector& w) const override;
  [[nodiscard]] Matrix phi_t_q(double t, const Vector& q, const Vector& rho) const override;
  [[nodiscard]] Matrix phi_t_rho(double t, const Vector& q, const Vector& rho) const override;
  [[nodiscard]] Matrix gamma_q(double t, const Vector& q, const Vector& v,
                               const Vector& rho) const override;
  [[nodiscard]] Matrix gamma_v(double t, const Vector& q, const Vector& v,
                               const Vector& rho) const override;
  [[nodiscard]] Matrix gamma_rho(double t, const Vector& q, const Vector& v,
                                 const Vector& rho) const override;

 private:
  [[nodiscard]] Eigen::Vector2d point(const Vector& q, int idx, const Eigen::Vector2d& anchor) const;
  std::vector<Bar> bars_;
};

/// Polynomial cost built from coordinate terms. Acceleration terms are routed
/// through the argument function u = selected accelerations, so the chain rule
/// through u is exercised.
class ComponentCost final : public CostFunctional {
 public:
  enum class Var { Position, Velocity, Acceleration };
  struct Term {
    Var var = Var::Position;
    Index index = 0;
    int power = 1;  // 1 or 2
    double coef = 1.0;
  };

  ComponentCost(std::vector<Term> density, std::vector<Term> terminal);

  [[nodiscard]] Index nc() const override { return 1; }
  [[nodiscard]] Index nu() const override { return static_cast<Index>(accel_.size()); }
  [[nodiscard]] Vector g(const CostPoint& pt, const Vector& u) const override;
  [[nodiscard]] Vector u(const CostPoint& pt) const override;
  [[nodiscard]] Vector w(double t, const Vector& q, const Vector& v, const Vector& rho,
                         const Vector& u) const override;
  [[nodiscard]] CostPartials g_partials(const CostPoint& pt, const Vector& u) const override;
  [[nodiscard]] CostPartials u_partials(const CostPoint& pt) const override;
  [[nodiscard]] CostPartials w_partials(double t, const Vector& q, const Vector& v,
                                        const Vector& rho, const Vector& u) const override;

 private:
  std::vector<Term> density_, terminal_;
  std::vector<Index> accel_;  // acceleration components that make up u
};

/// A ready-to-run benchmark: system, default parameters, costs and time span.
struct GalleryProblem {
  std::string name;
  HybridSystem system;
  ParameterVector rho;
  std::map<std::string, std::shared_ptr<const CostFunctional>> costs;
  std::string default_cost;
  double t0 = 0.0;
  double tF = 1.0;

  [[nodiscard]] const CostFunctional& cost(const std::string& name) const;
};

/// Model options: numeric overrides of named physical constants, plus
/// model-specific string switches (see each factory).
using GalleryOptions = std::map<std::string, std::string>;

class ModelRegistry {
 public:
  using Factory = std::function<GalleryProblem(const GalleryOptions&)>;
  void add(const std::string& name, Factory f) { factories_[name] = std::move(f); }
  [[nodiscard]] GalleryProblem make(const std::string& name, const GalleryOptions& opts = {}) const;
  [[nodiscard]] std::vector<std::string> names() const;

 private:
  std::map<std::string, Factory> factories_;
};

/// Registry with "five-bar", "bouncing-mass" and "pendulum".
[[nodiscard]] const ModelRegistry& register_gallery();

/// Five-bar mechanism on a penalty formulation with an elastic ground contact
/// for point 2. Options: sens=<comma list> chooses the sensitivity parameters
/// among k1,k2,L01,L02,L_A1,L_B3,L_21,L_32 (default k1,k2); any of those names,
/// m1..m4 and g take numeric overrides.
[[nodiscard]] GalleryProblem make_five_bar(const GalleryOptions& opts = {});
/// Point mass dropped on the ground with restitution; rho = (h0, e, g).
[[nodiscard]] GalleryProblem make_bouncing_mass(const GalleryOptions& opts = {});
/// Planar point-mass pendulum; rho = (g, x0, vx0). Options: start=slack|taut,
/// formulation=index1|penalty for the taut mode.
[[nodiscard]] GalleryProblem make_pendulum(const GalleryOptions& opts = {});

/// Five-bar assembly: dependent coordinates by damped Newton with the dof
/// fixed, v0 = 0, and dq0/drho by implicit differentiation of Phi = 0.
[[nodiscard]] InitialState five_bar_initial_conditions(const GalleryProblem& five_bar,
                                                       const Vector& rho);

}  // namespace hysens
