#include "hysens/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hysens {

void IntegratorConfig::validate() const {
  std::ostringstream msg;
  if (!(rtol > 0)) msg << "rtol must be > 0; ";
  if (!(atol > 0)) msg << "atol must be > 0; ";
  if (!(event_tol > 0)) msg << "event_tol must be > 0; ";
  if (!(h0 >= 0)) msg << "h0 must be >= 0; ";
  if (!(hmax > 0)) msg << "hmax must be > 0; ";
  if (max_steps < 1) msg << "max_steps must be >= 1; ";
  if (!msg.str().empty()) throw ValidationError("invalid integrator config: " + msg.str());
}

Vector DenseStep::eval(double t) const {
  if (t == t0) return y0;
  if (t == t1) return y1;
  const double th = (t - t0) / (t1 - t0);
  const double th1 = 1.0 - th;
  return y0 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
}

DenseSegment::DenseSegment(double t_start, Vector y_start)
    : t_start_(t_start), y_start_(std::move(y_start)) {}

double DenseSegment::t_end() const {
  if (has_cut_) return t_cut_;
  return steps_.empty() ? t_start_ : steps_.back().t1;
}

const Vector& DenseSegment::back() const {
  if (has_cut_) return y_cut_;
  return steps_.empty() ? y_start_ : steps_.back().y1;
}

bool DenseSegment::contains(double t) const {
  const double a = std::min(t_start_, t_end()), b = std::max(t_start_, t_end());
  return t >= a && t <= b;
}

std::vector<double> DenseSegment::nodes() const {
  std::vector<double> out;
  out.reserve(steps_.size() + 1);
  out.push_back(t_start_);
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (has_cut_ && i + 1 == steps_.size()) out.push_back(t_cut_);
    else out.push_back(steps_[i].t1);
  }
  return out;
}

void DenseSegment::cut(double t) {
  if (steps_.empty()) throw ValidationError("cannot cut an empty dense segment");
  y_cut_ = steps_.back().eval(t);
  t_cut_ = t;
  has_cut_ = true;
}

Vector interpolate(const DenseSegment& seg, double t) {
  if (!seg.contains(t)) {
    std::ostringstream msg;
    msg << "interpolation time " << t << " outside segment [" << seg.t_start() << ", "
        << seg.t_end() << "]";
    throw ValidationError(msg.str());
  }
  if (t == seg.t_start_) return seg.y_start_;
  if (seg.has_cut_ && t == seg.t_cut_) return seg.y_cut_;
  const bool forward = seg.t_end() >= seg.t_start_;
  // First step whose end reaches t.
  const auto it = std::lower_bound(
      seg.steps_.begin(), seg.steps_.end(), t,
      [forward](const DenseStep& s, double x) { return forward ? s.t1 < x : s.t1 > x; });
  const DenseStep& s = (it == seg.steps_.end()) ? seg.steps_.back() : *it;
  return s.eval(t);
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double rms_norm(const Vector& e, const Vector& y0, const Vector& y1, const IntegratorConfig& cfg) {
  if (e.size() == 0) return 0.0;
  const Vector scale = cfg.atol + cfg.rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array();
  return std::sqrt((e.array() / scale.array()).square().mean());
}

double initial_step(const OdeRhs& rhs, double t0, const Vector& y0, const Vector& f0, double dir,
                    double span, const IntegratorConfig& cfg) {
  const Vector zero = Vector::Zero(y0.size());
  const double d0 = rms_norm(y0, y0, zero, cfg);
  const double d1n = rms_norm(f0, y0, zero, cfg);
  double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
  h0 = std::min(h0, span);
  const Vector y1 = y0 + dir * h0 * f0;
  const Vector f1 = rhs(t0 + dir * h0, y1);
  const double d2 = rms_norm(f1 - f0, y0, zero, cfg) / h0;
  const double dm = std::max(d1n, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
  return std::min({100 * h0, h1, cfg.hmax, span});
}

// Root of r on [a, b] (time order irrelevant) given r(a) and r(b) of opposite sign.
double localize(const std::function<double(double)>& r, double a, double ra, double b, double rb,
                double tol) {
  for (int it = 0; it < 200 && std::abs(b - a) > tol; ++it) {
    const double m = 0.5 * (a + b);
    const double rm = r(m);
    if (rm == 0.0) return m;
    if ((rm > 0) == (ra > 0)) {
      a = m;
      ra = rm;
    } else {
      b = m;
      rb = rm;
    }
    const double s = a - ra * (b - a) / (rb - ra);
    if ((s - a) * (s - b) < 0) {
      const double rs = r(s);
      if (rs == 0.0) return s;
      if ((rs > 0) == (ra > 0)) {
        a = s;
        ra = rs;
      } else {
        b = s;
        rb = rs;
      }
    }
  }
  // Final secant estimate inside the bracket.
  const double s = a - ra * (b - a) / (rb - ra);
  return std::isfinite(s) && (s - a) * (s - b) <= 0 ? s : 0.5 * (a + b);
}

bool crosses(double r0, double r1, int direction) {
  const bool rising = r0 < 0 && r1 >= 0;
  const bool falling = r0 > 0 && r1 <= 0;
  if (direction > 0) return rising;
  if (direction < 0) return falling;
  return rising || falling;
}

}  // namespace

SegmentResult integrate_segment(const OdeRhs& rhs, const Vector& y0, double t0, double t1,
                                const IntegratorConfig& cfg,
                                const std::vector<EventFunctionSpec>& events) {
  cfg.validate();
  if (!y0.allFinite()) throw ValidationError("initial state contains non-finite values");
  SegmentResult res;
  res.dense = DenseSegment(t0, y0);
  res.t_end = t0;
  res.y_end = y0;
  if (t1 == t0) return res;

  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  const double loc_tol = std::max(cfg.event_tol, 1e-10 * span);

  std::vector<bool> masked(events.size());
  std::vector<double> rprev(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    masked[i] = events[i].masked;
    rprev[i] = events[i].fn(t0, y0);
  }

  double t = t0;
  Vector y = y0;
  Vector k1 = rhs(t, y);
  double h = cfg.h0 > 0 ? std::min({cfg.h0, cfg.hmax, span})
                        : initial_step(rhs, t0, y0, k1, dir, span, cfg);
  bool last_rejected = false;
  long steps = 0;

  while (dir * (t1 - t) > 0) {
    if (++steps > cfg.max_steps) {
      std::ostringstream msg;
      msg << "maximum number of steps (" << cfg.max_steps << ") exceeded at t=" << t;
      throw NumericalError(msg.str());
    }
    const double hmin = 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < hmin) {
      std::ostringstream msg;
      msg << "step size underflow at t=" << t
          << "; the trajectory may be grazing an event surface (grazing is not supported)";
      throw GrazingError(msg.str());
    }
    bool final_step = false;
    if (h >= dir * (t1 - t)) {
      h = dir * (t1 - t);
      final_step = true;
    }
    const double hs = dir * h;
    const Vector k2 = rhs(t + c2 * hs, y + hs * (a21 * k1));
    const Vector k3 = rhs(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
    const Vector k4 = rhs(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vector k5 = rhs(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    // Land exactly on t1 so stage times never leave the interval.
    const double tn = final_step ? t1 : t + hs;
    const Vector k6 = rhs(tn, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vector yn = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Vector k7 = rhs(tn, yn);
    const Vector err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = rms_norm(err, y, yn, cfg);

    if (!std::isfinite(en)) {
      h *= 0.2;
      last_rejected = true;
      ++res.rejected;
      continue;
    }
    if (en > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      last_rejected = true;
      ++res.rejected;
      continue;
    }

    DenseStep step;
    step.t0 = t;
    step.t1 = tn;
    step.y0 = y;
    step.y1 = yn;
    step.r2 = yn - y;
    step.r3 = hs * k1 - step.r2;
    step.r4 = step.r2 - hs * k7 - step.r3;
    step.r5 = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    res.dense.push(std::move(step));
    ++res.accepted;

    // Event scan over the accepted step.
    std::optional<EventHit> best;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const double rn = events[i].fn(tn, yn);
      if (masked[i]) {
        if (std::abs(rn) > cfg.event_departure) masked[i] = false;
        rprev[i] = rn;
        continue;
      }
      if (crosses(rprev[i], rn, events[i].direction)) {
        const DenseStep& last = res.dense.steps().back();
        const auto rfun = [&](double s) { return events[i].fn(s, last.eval(s)); };
        const double te = localize(rfun, t, rprev[i], tn, rn, loc_tol);
        if (best && std::abs(te - best->t) <= cfg.event_tol) {
          std::ostringstream msg;
          msg << "simultaneous events " << best->index << " and " << i << " at t=" << te;
          throw NumericalError(msg.str());
        }
        if (!best || dir * (te - best->t) < 0) best = EventHit{i, te, Vector()};
      }
      rprev[i] = rn;
    }
    if (best) {
      res.dense.cut(best->t);
      best->y = res.dense.back();
      res.t_end = best->t;
      res.y_end = best->y;
      res.hit = std::move(best);
      return res;
    }

    t = tn;
    y = yn;
    k1 = k7;
    double fac = std::clamp(0.9 * std::pow(std::max(en, 1e-10), -0.2), 0.2, 5.0);
    if (last_rejected) fac = std::min(fac, 1.0);
    last_rejected = false;
    h = std::min(h * fac, cfg.hmax);
  }
  res.t_end = t;
  res.y_end = y;
  return res;
}

}  // namespace hysens
