#include <algorithm>
#include <cmath>
#include <sstream>

#include "options.hpp"

// Five-bar linkage in natural coordinates q = (x1, y1, x2, y2, x3, y3).
// Bars: A-1 (m1, L_A1), 1-2 (m2, L_21), 2-3 (m3, L_32), 3-B (m4, L_B3) with
// ground anchors A = (-0.5, 0) and B = (0.5, 0). Each bar is a uniform slender
// rod: its endpoint mass block is m/3 I per end and m/6 I coupling, and its
// weight is split half per endpoint. Spring 1 (k1, L01) joins B and point 1,
// spring 2 (k2, L02) joins A and point 2. Nominal pose: point 1 = (-1.5, -1),
// point 2 = (0, -2), point 3 = (1.5, -1), which is assembled and leaves both
// springs at their natural lengths. Point 2 (dof x2, y2) hits the ground
// y = -2.35 and its vertical velocity is reversed.

namespace hysens {

namespace {

const Eigen::Vector2d kAnchorA(-0.5, 0.0);
const Eigen::Vector2d kAnchorB(0.5, 0.0);
constexpr double kGround = -2.35;

const std::vector<std::string> kParamNames = {"k1",   "k2",   "L01",  "L02",
                                              "L_A1", "L_B3", "L_21", "L_32"};

// Physical constants with the subset chosen as sensitivity parameters.
struct FiveBarData {
  std::map<std::string, double> fixed;
  std::map<std::string, Index> index;  // name -> rho index

  double get(const std::string& name, const Vector& rho) const {
    const auto it = index.find(name);
    return it != index.end() ? rho[it->second] : fixed.at(name);
  }
  Index idx(const std::string& name) const {
    const auto it = index.find(name);
    return it != index.end() ? it->second : -1;
  }
};

struct Spring {
  std::string k, L0;
  int point;
  Eigen::Vector2d anchor;
};

class FiveBarModel final : public MultibodyModel {
 public:
  FiveBarModel(FiveBarData data, std::shared_ptr<const DistanceConstraints> cons)
      : data_(std::move(data)), cons_(std::move(cons)) {
    const double m1 = data_.fixed.at("m1"), m2 = data_.fixed.at("m2");
    const double m3 = data_.fixed.at("m3"), m4 = data_.fixed.at("m4");
    const Matrix I2 = Matrix::Identity(2, 2);
    M_ = Matrix::Zero(6, 6);
    M_.block(0, 0, 2, 2) = (m1 / 3 + m2 / 3) * I2;
    M_.block(0, 2, 2, 2) = M_.block(2, 0, 2, 2) = m2 / 6 * I2;
    M_.block(2, 2, 2, 2) = (m2 / 3 + m3 / 3) * I2;
    M_.block(2, 4, 2, 2) = M_.block(4, 2, 2, 2) = m3 / 6 * I2;
    M_.block(4, 4, 2, 2) = (m3 / 3 + m4 / 3) * I2;
    const double g = data_.fixed.at("g");
    gravity_ = Vector::Zero(6);
    gravity_[1] = -0.5 * (m1 + m2) * g;
    gravity_[3] = -0.5 * (m2 + m3) * g;
    gravity_[5] = -0.5 * (m3 + m4) * g;
    springs_ = {{"k1", "L01", 0, kAnchorB}, {"k2", "L02", 1, kAnchorA}};
  }

  Index n() const override { return 6; }
  Index p() const override { return static_cast<Index>(data_.index.size()); }
  Matrix mass(double, const Vector&, const Vector&) const override { return M_; }

  Vector force(double, const Vector& q, const Vector&, const Vector& rho) const override {
    Vector F = gravity_;
    for (const Spring& s : springs_) {
      const Eigen::Vector2d d = q.segment<2>(2 * s.point) - s.anchor;
      const double l = d.norm();
      F.segment<2>(2 * s.point) -= data_.get(s.k, rho) * (l - data_.get(s.L0, rho)) * d / l;
    }
    return F;
  }

  Matrix force_q(double, const Vector& q, const Vector&, const Vector& rho) const override {
    Matrix out = Matrix::Zero(6, 6);
    for (const Spring& s : springs_) {
      const Eigen::Vector2d d = q.segment<2>(2 * s.point) - s.anchor;
      const double l = d.norm();
      const Eigen::Vector2d u = d / l;
      const Eigen::Matrix2d uu = u * u.transpose();
      const double k = data_.get(s.k, rho), L0 = data_.get(s.L0, rho);
      out.block<2, 2>(2 * s.point, 2 * s.point) =
          -k * ((1.0 - L0 / l) * (Eigen::Matrix2d::Identity() - uu) + uu);
    }
    return out;
  }

  Matrix force_v(double, const Vector&, const Vector&, const Vector&) const override {
    return Matrix::Zero(6, 6);
  }

  Matrix force_rho(double, const Vector& q, const Vector&, const Vector& rho) const override {
    Matrix out = Matrix::Zero(6, rho.size());
    for (const Spring& s : springs_) {
      const Eigen::Vector2d d = q.segment<2>(2 * s.point) - s.anchor;
      const double l = d.norm();
      const Eigen::Vector2d u = d / l;
      const double k = data_.get(s.k, rho), L0 = data_.get(s.L0, rho);
      if (const Index j = data_.idx(s.k); j >= 0) out.block<2, 1>(2 * s.point, j) -= (l - L0) * u;
      if (const Index j = data_.idx(s.L0); j >= 0) out.block<2, 1>(2 * s.point, j) += k * u;
    }
    return out;
  }

  Matrix mass_q_times(double, const Vector&, const Vector&, const Vector&) const override {
    return Matrix::Zero(6, 6);
  }
  Matrix mass_rho_times(double, const Vector&, const Vector& rho, const Vector&) const override {
    return Matrix::Zero(6, rho.size());
  }

  InitialState initial_state(const Vector& rho) const override;

 private:
  FiveBarData data_;
  std::shared_ptr<const DistanceConstraints> cons_;
  Matrix M_;
  Vector gravity_;
  std::vector<Spring> springs_;
};

constexpr Index kDof[2] = {2, 3};
constexpr Index kDep[4] = {0, 1, 4, 5};

Matrix dep_columns(const Matrix& G) {
  Matrix out(G.rows(), 4);
  for (int j = 0; j < 4; ++j) out.col(j) = G.col(kDep[j]);
  return out;
}

InitialState FiveBarModel::initial_state(const Vector& rho) const {
  Vector q(6);
  q << -1.5, -1.0, 0.0, -2.0, 1.5, -1.0;
  // Damped Newton on the dependent coordinates with the dof fixed.
  const int max_iter = 50;
  int it = 0;
  for (; it < max_iter; ++it) {
    const Vector r = cons_->phi(0.0, q, rho);
    if (r.lpNorm<Eigen::Infinity>() <= 1e-13) break;
    const Eigen::FullPivLU<Matrix> lu(dep_columns(cons_->phi_q(0.0, q, rho)));
    if (!lu.isInvertible()) throw NumericalError("five-bar assembly failure: singular Phi_dep");
    const Vector step = lu.solve(r);
    double lam = 1.0;
    for (; lam > 1e-6; lam *= 0.5) {
      Vector trial = q;
      for (int j = 0; j < 4; ++j) trial[kDep[j]] -= lam * step[j];
      if (cons_->phi(0.0, trial, rho).norm() < r.norm()) {
        q = trial;
        break;
      }
    }
    if (lam <= 1e-6) break;
  }
  const double res = cons_->phi(0.0, q, rho).lpNorm<Eigen::Infinity>();
  if (res > 1e-12) {
    std::ostringstream msg;
    msg << "five-bar assembly failure: residual " << res << " after " << it << " iterations";
    throw NumericalError(msg.str());
  }

  InitialState s;
  s.q0 = q;
  s.v0 = Vector::Zero(6);
  s.dv0_drho = Matrix::Zero(6, rho.size());
  s.dq0_drho = Matrix::Zero(6, rho.size());
  const Matrix dep = -dep_columns(cons_->phi_q(0.0, q, rho))
                          .fullPivLu()
                          .solve(cons_->phi_rho(0.0, q, rho));
  for (int j = 0; j < 4; ++j) s.dq0_drho.row(kDep[j]) = dep.row(j);
  return s;
}

}  // namespace

GalleryProblem make_five_bar(const GalleryOptions& opts) {
  using gallery_detail::number;
  std::set<std::string> allowed(kParamNames.begin(), kParamNames.end());
  for (const char* k : {"m1", "m2", "m3", "m4", "g", "sens"}) allowed.insert(k);
  gallery_detail::check_keys(opts, allowed, "five-bar");

  FiveBarData data;
  const std::map<std::string, double> defaults = {
      {"k1", 100.0},    {"k2", 100.0},    {"L01", 2.2360},  {"L02", 2.0615},
      {"L_A1", 1.4142}, {"L_B3", 1.4142}, {"L_21", 1.8027}, {"L_32", 1.8027},
      {"m1", 1.0},      {"m2", 1.5},      {"m3", 1.5},      {"m4", 1.0},
      {"g", 9.81}};
  for (const auto& [k, v] : defaults) data.fixed[k] = number(opts, k, v);
  for (const char* k : {"m1", "m2", "m3", "m4"}) {
    if (!(data.fixed[k] > 0)) throw ValidationError(std::string("five-bar: ") + k + " must be > 0");
  }

  std::vector<std::string> sens;
  {
    const auto it = opts.find("sens");
    std::stringstream ss(it == opts.end() ? std::string("k1,k2") : it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      if (std::find(kParamNames.begin(), kParamNames.end(), item) == kParamNames.end()) {
        throw ValidationError("five-bar: '" + item + "' is not a sensitivity parameter");
      }
      if (data.index.count(item)) throw ValidationError("five-bar: duplicate parameter " + item);
      data.index[item] = static_cast<Index>(sens.size());
      sens.push_back(item);
    }
  }
  if (sens.empty()) throw ValidationError("five-bar: at least one sensitivity parameter needed");

  GalleryProblem pb;
  pb.name = "five-bar";
  pb.rho.labels = sens;
  pb.rho.rho = Vector(static_cast<Index>(sens.size()));
  for (std::size_t j = 0; j < sens.size(); ++j) {
    pb.rho.rho[static_cast<Index>(j)] = data.fixed.at(sens[j]);
  }

  auto bar = [&](int a, int b, Eigen::Vector2d anc_a, Eigen::Vector2d anc_b,
                 const std::string& name) {
    DistanceConstraints::Bar out;
    out.a = a;
    out.b = b;
    out.anchor_a = anc_a;
    out.anchor_b = anc_b;
    out.length = data.fixed.at(name);
    out.rho_index = data.idx(name);
    return out;
  };
  const Eigen::Vector2d none = Eigen::Vector2d::Zero();
  auto cons = std::make_shared<DistanceConstraints>(std::vector<DistanceConstraints::Bar>{
      bar(0, -1, none, kAnchorA, "L_A1"), bar(1, 0, none, none, "L_21"),
      bar(2, 1, none, none, "L_32"), bar(2, -1, none, kAnchorB, "L_B3")});

  Mode mode;
  mode.name = "penalty";
  mode.model = std::make_shared<FiveBarModel>(data, cons);
  mode.constraints = cons;
  mode.formulation = Formulation::Penalty;
  pb.system.modes = {mode};

  EventSpec ground;
  ground.name = "ground";
  ground.r = [](const Vector& q) { return q[3] - kGround; };
  ground.dr_dq = [](const Vector&) {
    RowVector c = RowVector::Zero(6);
    c[3] = 1.0;
    return c;
  };
  ground.direction = -1;
  ground.kind = EventKind::ConstrainedElastic;
  ground.jump = std::make_shared<LinearJump>(Eigen::Vector2d(1.0, -1.0).asDiagonal().toDenseMatrix());
  ground.dof = {kDof[0], kDof[1]};
  pb.system.events = {ground};

  using T = ComponentCost::Term;
  using V = ComponentCost::Var;
  pb.costs["int-vy2"] =
      std::make_shared<ComponentCost>(std::vector<T>{{V::Velocity, 3, 1, 1.0}}, std::vector<T>{});
  pb.costs["int-ay2"] = std::make_shared<ComponentCost>(
      std::vector<T>{{V::Acceleration, 3, 1, 1.0}}, std::vector<T>{});
  pb.costs["int-ay2sq-vy2sq"] = std::make_shared<ComponentCost>(
      std::vector<T>{{V::Acceleration, 3, 2, 1.0}, {V::Velocity, 3, 2, 1.0}}, std::vector<T>{});
  pb.default_cost = "int-vy2";
  pb.t0 = 0.0;
  pb.tF = 5.0;
  return pb;
}

InitialState five_bar_initial_conditions(const GalleryProblem& five_bar, const Vector& rho) {
  if (five_bar.name != "five-bar") throw ValidationError("not a five-bar problem");
  return five_bar.system.modes.front().model->initial_state(rho);
}

}  // namespace hysens
