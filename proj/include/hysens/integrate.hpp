#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "hysens/core.hpp"

namespace hysens {

struct IntegratorConfig {
  double rtol = 1e-8;
  double atol = 1e-10;
  double h0 = 0.0;  // 0 selects the initial step automatically
  double hmax = std::numeric_limits<double>::infinity();
  double event_tol = 1e-12;
  // A fired event stays masked until |r| exceeds this value.
  double event_departure = 1e-9;
  long max_steps = 1'000'000;

  void validate() const;
};

/// One accepted step with its continuous extension.
struct DenseStep {
  double t0 = 0.0;
  double t1 = 0.0;
  Vector y0, y1;
  Vector r2, r3, r4, r5;  // interpolation coefficients (r1 = y0)

  [[nodiscard]] Vector eval(double t) const;
};

/// Dense output for one smooth segment. Time may run backward (t_end < t_start).
class DenseSegment {
 public:
  DenseSegment() = default;
  explicit DenseSegment(double t_start, Vector y_start);

  [[nodiscard]] double t_start() const { return t_start_; }
  [[nodiscard]] double t_end() const;
  [[nodiscard]] const std::vector<DenseStep>& steps() const { return steps_; }
  [[nodiscard]] bool contains(double t) const;
  [[nodiscard]] const Vector& front() const { return y_start_; }
  [[nodiscard]] const Vector& back() const;
  /// Node times including t_start.
  [[nodiscard]] std::vector<double> nodes() const;

  void push(DenseStep step) { steps_.push_back(std::move(step)); }
  /// Ends the segment at t inside the last step; the state there becomes a node.
  void cut(double t);

 private:
  friend Vector interpolate(const DenseSegment& seg, double t);
  double t_start_ = 0.0;
  Vector y_start_;
  std::vector<DenseStep> steps_;
  bool has_cut_ = false;
  double t_cut_ = 0.0;
  Vector y_cut_;
};

/// Dense-output evaluation; stored nodes are returned exactly. Throws
/// ValidationError when t lies outside the segment.
[[nodiscard]] Vector interpolate(const DenseSegment& seg, double t);

using OdeRhs = std::function<Vector(double, const Vector&)>;
using EventFunction = std::function<double(double, const Vector&)>;

/// Event function with a crossing direction filter: +1 rising only, -1 falling
/// only, 0 either way.
struct EventFunctionSpec {
  EventFunction fn;
  int direction = 0;
  bool masked = false;  // initially masked (just fired)
};

struct EventHit {
  std::size_t index = 0;
  double t = 0.0;
  Vector y;  // state at the localized event time
};

struct SegmentResult {
  DenseSegment dense;
  double t_end = 0.0;
  Vector y_end;
  std::optional<EventHit> hit;
  long accepted = 0;
  long rejected = 0;
};

/// Adaptive Dormand-Prince 5(4) integration on [t0, t1] (t1 < t0 integrates
/// backward) with event localization. On an event, the segment is cut at the
/// localized time and the hit is reported.
[[nodiscard]] SegmentResult integrate_segment(const OdeRhs& rhs, const Vector& y0, double t0,
                                              double t1, const IntegratorConfig& cfg,
                                              const std::vector<EventFunctionSpec>& events = {});

}  // namespace hysens
