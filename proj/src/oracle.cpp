#include "hysens/oracle.hpp"

#include <algorithm>
#include <future>
#include <sstream>

namespace hysens {

namespace {

double step_for(double x, double h_rel) { return h_rel * std::max(1.0, std::abs(x)); }

void check_topology(const HybridTrajectory& nominal, const HybridTrajectory& other, Index j,
                    int sign) {
  bool same = nominal.events.size() == other.events.size();
  for (std::size_t k = 0; same && k < nominal.events.size(); ++k) {
    same = nominal.events[k].event_index == other.events[k].event_index;
  }
  if (!same) {
    std::ostringstream msg;
    msg << "event topology changed; reduce h (parameter " << j << ", "
        << (sign > 0 ? "+" : "-") << "h run fired " << other.events.size()
        << " events, nominal fired " << nominal.events.size() << ")";
    throw NumericalError(msg.str());
  }
}

// Nominal run plus the 2p perturbed runs, launched concurrently.
struct PerturbedRuns {
  HybridTrajectory nominal;
  std::vector<HybridTrajectory> plus, minus;
  std::vector<double> h;
};

PerturbedRuns run_all(const HybridSystem& sys, const CostFunctional& cost, const Vector& rho,
                      double t0, double tF, const IntegratorConfig& cfg, double h_rel) {
  if (!(h_rel > 0)) throw ValidationError("h_rel must be > 0");
  SimulationOptions opt;
  opt.integrator = cfg;
  const Index p = rho.size();
  auto launch = [&](Vector r) {
    return std::async(std::launch::async,
                      [&, r = std::move(r)] { return simulate(sys, cost, r, t0, tF, opt); });
  };
  PerturbedRuns runs;
  auto nominal = launch(rho);
  std::vector<std::future<HybridTrajectory>> fp, fm;
  for (Index j = 0; j < p; ++j) {
    const double h = step_for(rho[j], h_rel);
    runs.h.push_back(h);
    Vector rp = rho, rm = rho;
    rp[j] += h;
    rm[j] -= h;
    fp.push_back(launch(rp));
    fm.push_back(launch(rm));
  }
  runs.nominal = nominal.get();
  for (Index j = 0; j < p; ++j) {
    runs.plus.push_back(fp[j].get());
    runs.minus.push_back(fm[j].get());
  }
  for (Index j = 0; j < p; ++j) {
    check_topology(runs.nominal, runs.plus[j], j, +1);
    check_topology(runs.nominal, runs.minus[j], j, -1);
  }
  return runs;
}

}  // namespace

Matrix fd_cost_sensitivity(const HybridSystem& sys, const CostFunctional& cost, const Vector& rho,
                           double t0, double tF, const IntegratorConfig& cfg, double h_rel) {
  const PerturbedRuns runs = run_all(sys, cost, rho, t0, tF, cfg, h_rel);
  const Index p = rho.size();
  Matrix G(cost.nc(), p);
  for (Index j = 0; j < p; ++j) {
    G.col(j) = (cost_value(runs.plus[j], sys, cost) - cost_value(runs.minus[j], sys, cost)) /
               (2.0 * runs.h[j]);
  }
  return G;
}

std::vector<FdTrajectorySample> fd_trajectory_sensitivity(
    const HybridSystem& sys, const CostFunctional& cost, const Vector& rho, double t0, double tF,
    const IntegratorConfig& cfg, const std::vector<double>& sample_times, double h_rel) {
  const PerturbedRuns runs = run_all(sys, cost, rho, t0, tF, cfg, h_rel);
  const Dimensions& d = runs.nominal.dims;
  const Index n = d.n, p = d.p, nc = d.nc;

  // Unreliable windows: the span of each event's time over all runs, padded.
  const double pad = 10.0 * cfg.event_tol;
  std::vector<std::pair<double, double>> windows;
  for (std::size_t k = 0; k < runs.nominal.events.size(); ++k) {
    double lo = runs.nominal.events[k].t_eve, hi = lo;
    for (Index j = 0; j < p; ++j) {
      for (const HybridTrajectory* tr : {&runs.plus[j], &runs.minus[j]}) {
        lo = std::min(lo, tr->events[k].t_eve);
        hi = std::max(hi, tr->events[k].t_eve);
      }
    }
    windows.emplace_back(lo - pad, hi + pad);
  }

  std::vector<FdTrajectorySample> out;
  for (double t : sample_times) {
    FdTrajectorySample s;
    s.t = t;
    s.Q.resize(n, p);
    s.V.resize(n, p);
    s.Z.resize(nc, p);
    for (const auto& [lo, hi] : windows) {
      if (t >= lo && t <= hi) s.reliable = false;
    }
    for (Index j = 0; j < p; ++j) {
      const Vector diff =
          (runs.plus[j].state_at(t) - runs.minus[j].state_at(t)) / (2.0 * runs.h[j]);
      s.Q.col(j) = diff.head(n);
      s.V.col(j) = diff.segment(n, n);
      s.Z.col(j) = diff.segment(2 * n, nc);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace hysens
