#include "hysens/simulation.hpp"

#include <optional>
#include <sstream>

#include "hysens/direct.hpp"

namespace hysens {

StateView split_state(const Vector& y, const Dimensions& d) {
  return {y.head(d.n), y.segment(d.n, d.n), y.segment(2 * d.n, d.nc)};
}

Matrix canonical_sensitivity(const Vector& y, const Dimensions& d) {
  const Index n = d.n, p = d.p, nc = d.nc, r = 2 * n + nc;
  if (y.size() != r + r * p) throw ValidationError("state does not carry sensitivities");
  const Eigen::Map<const Matrix> Xr(y.data() + r, r, p);
  Matrix X(2 * n + p + nc, p);
  X << Xr.topRows(2 * n), Matrix::Identity(p, p), Xr.bottomRows(nc);
  return X;
}

namespace {

Vector pack_state(const Vector& q, const Vector& v, const Vector& z, const Matrix* X,
                  const Dimensions& d) {
  const Index r = 2 * d.n + d.nc;
  Vector y(r + (X ? r * d.p : 0));
  y.head(d.n) = q;
  y.segment(d.n, d.n) = v;
  y.segment(2 * d.n, d.nc) = z;
  if (X) {
    Matrix Xr(r, d.p);
    Xr << X->topRows(2 * d.n), X->bottomRows(d.nc);
    y.tail(r * d.p) = Eigen::Map<const Vector>(Xr.data(), r * d.p);
  }
  return y;
}

}  // namespace

std::size_t HybridTrajectory::segment_at(double t) const {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].dense.contains(t)) return i;
  }
  std::ostringstream msg;
  msg << "time " << t << " outside trajectory [" << t0 << ", " << tF << "]";
  throw ValidationError(msg.str());
}

Vector HybridTrajectory::state_at(double t) const { return state_at(segment_at(t), t); }

Vector HybridTrajectory::state_at(std::size_t segment, double t) const {
  return interpolate(segments.at(segment).dense, t).head(2 * dims.n + dims.nc);
}

Matrix HybridTrajectory::sensitivity_at(std::size_t segment, double t) const {
  if (!has_sensitivities) throw ValidationError("trajectory was computed without sensitivities");
  return canonical_sensitivity(interpolate(segments.at(segment).dense, t), dims);
}

HybridTrajectory simulate(const HybridSystem& sys, const CostFunctional& cost, const Vector& rho,
                          double t0, double tF, const SimulationOptions& opt) {
  sys.validate();
  opt.integrator.validate();
  if (!(tF > t0)) throw ValidationError("final time must exceed initial time");
  if (rho.size() != sys.p()) {
    std::ostringstream msg;
    msg << "parameter vector has length " << rho.size() << ", model expects " << sys.p();
    throw ValidationError(msg.str());
  }
  if (!rho.allFinite()) throw ValidationError("parameter vector contains non-finite values");

  HybridTrajectory traj;
  traj.dims = Dimensions{sys.n(), sys.p(), cost.nc(), sys.max_m()};
  traj.dims.validate();
  traj.rho = rho;
  traj.t0 = t0;
  traj.tF = tF;
  traj.has_sensitivities = opt.sensitivities;
  const Dimensions d = traj.dims;
  const Index n = d.n, p = d.p, nc = d.nc, r = 2 * n + nc;

  std::size_t mode_index = sys.initial_mode;
  traj.initial = sys.modes[mode_index].model->initial_state(rho);
  const InitialState& init = traj.initial;
  {
    const Mode& m0 = sys.modes[mode_index];
    const Index ng = cost_density(m0, cost, t0, init.q0, init.v0, rho).size();
    const Index nw = terminal_cost_gradients(m0, cost, t0, init.q0, init.v0, rho).value.size();
    if (ng != nc || nw != nc) {
      std::ostringstream msg;
      msg << "cost declares nc=" << nc << " but the density returns " << ng
          << " and the terminal cost " << nw << " entries";
      throw ValidationError(msg.str());
    }
  }
  Vector y;
  if (opt.sensitivities) {
    const Matrix X0 = SensitivityState::initial(init.dq0_drho, init.dv0_drho, nc).stacked();
    y = pack_state(init.q0, init.v0, Vector::Zero(nc), &X0, d);
  } else {
    y = pack_state(init.q0, init.v0, Vector::Zero(nc), nullptr, d);
  }

  double t = t0;
  std::optional<std::size_t> last_fired;
  for (;;) {
    const Mode& mode = sys.modes[mode_index];
    std::vector<std::size_t> active;
    std::vector<EventFunctionSpec> fns;
    for (std::size_t e = 0; e < sys.events.size(); ++e) {
      if (sys.events[e].from_mode != mode_index) continue;
      active.push_back(e);
      const EventSpec& spec = sys.events[e];
      fns.push_back({[&spec, n](double, const Vector& yy) { return spec.r(yy.head(n)); },
                     spec.direction, last_fired && *last_fired == e});
    }

    OdeRhs rhs;
    if (opt.sensitivities) {
      rhs = [&](double tt, const Vector& yy) -> Vector {
        const Vector q = yy.head(n), v = yy.segment(n, n);
        const ModeEval ev = mode.evaluate(tt, q, v, rho);
        const CostGradients g = cost_density_gradients(cost, tt, q, v, rho, ev);
        const Eigen::Map<const Matrix> Xr(yy.data() + r, r, p);
        SensitivityState X;
        X.Q = Xr.topRows(n);
        X.V = Xr.middleRows(n, n);
        X.Z = Xr.bottomRows(nc);
        const SensitivityState dX = tlm_rhs(ev, g, X);
        Vector out(yy.size());
        out << v, ev.vdot, g.value, Vector::Zero(r * p);
        Eigen::Map<Matrix> dXr(out.data() + r, r, p);
        dXr << dX.Q, dX.V, dX.Z;
        return out;
      };
    } else {
      rhs = [&](double tt, const Vector& yy) -> Vector {
        const Vector q = yy.head(n), v = yy.segment(n, n);
        const DaeSolution a = mode.acceleration(tt, q, v, rho);
        const CostPoint pt{tt, q, v, a.vdot, rho, a.mu};
        Vector out(r);
        out << v, a.vdot, cost.g(pt, cost.u(pt));
        return out;
      };
    }

    SegmentResult res = integrate_segment(rhs, y, t, tF, opt.integrator, fns);
    traj.segments.push_back({mode_index, std::move(res.dense)});
    if (!res.hit) break;

    if (traj.events.size() >= opt.max_events) {
      std::ostringstream msg;
      msg << "more than " << opt.max_events << " events before t=" << tF
          << " (accumulating events are not supported)";
      throw NumericalError(msg.str());
    }

    const std::size_t e = active[res.hit->index];
    const EventSpec& spec = sys.events[e];
    const double te = res.hit->t;
    const Vector& ym = res.hit->y;
    const StateView sm = split_state(ym, d);
    const Mode& mode_plus = sys.modes[spec.to_mode];

    // Transversality is checked before any jump is attempted.
    const RowVector tq = event_time_row(spec.gradient(sm.q), sm.v);
    StateJump sj = apply_state_jump(spec, mode, mode_plus, te, sm.q, sm.v, rho);

    EventRecord rec;
    rec.event_index = e;
    rec.name = spec.name;
    rec.kind = spec.kind;
    rec.mode_minus = mode_index;
    rec.mode_plus = spec.to_mode;
    rec.t_eve = te;
    rec.context = make_jump_context(spec, mode, mode_plus, cost, te, sm.q, sm.v, sj.v_plus, rho);
    rec.jump = build_jump_matrix(rec.context);
    rec.dteve_dQminus = tq;
    rec.minus = GeneralizedState{te, sm.q, sm.v, rec.context.a_minus};
    rec.plus = GeneralizedState{te, sm.q, sj.v_plus, rec.context.a_plus};
    rec.z = sm.z;
    rec.delta_mu = sj.delta_mu;

    if (opt.sensitivities) {
      rec.X_minus = canonical_sensitivity(ym, d);
      rec.X_plus = apply_jump_direct(rec.jump, rec.X_minus);
      rec.dteve_drho = tq * rec.X_minus.topRows(n);
      y = pack_state(sm.q, sj.v_plus, sm.z, &rec.X_plus, d);
    } else {
      y = pack_state(sm.q, sj.v_plus, sm.z, nullptr, d);
    }
    traj.events.push_back(std::move(rec));
    t = te;
    mode_index = spec.to_mode;
    last_fired = e;
  }
  return traj;
}

Vector cost_value(const HybridTrajectory& traj, const HybridSystem& sys,
                  const CostFunctional& cost) {
  const StateView s = split_state(traj.final_state(), traj.dims);
  const CostGradients w =
      terminal_cost_gradients(sys.modes[traj.final_mode()], cost, traj.tF, s.q, s.v, traj.rho);
  return s.z + w.value;
}

ConstraintResiduals constraint_residuals(const HybridTrajectory& traj, const HybridSystem& sys) {
  ConstraintResiduals out;
  for (const Segment& seg : traj.segments) {
    const Mode& mode = sys.modes[seg.mode];
    if (!mode.constraints) continue;
    for (double t : seg.dense.nodes()) {
      const StateView s = split_state(interpolate(seg.dense, t), traj.dims);
      out.record(*mode.constraints, t, s.q, s.v, traj.rho);
    }
  }
  return out;
}

}  // namespace hysens
