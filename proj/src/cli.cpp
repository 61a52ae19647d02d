#include "hysens/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>

#include "hysens/adjoint.hpp"
#include "hysens/direct.hpp"
#include "hysens/gallery.hpp"
#include "hysens/io.hpp"
#include "hysens/oracle.hpp"

namespace hysens {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunSettings {
  std::string command;
  std::string model = "five-bar";
  std::string cost;  // empty: the model's default
  std::optional<double> t0, tf;
  double rtol = 1e-8, atol = 1e-10, event_tol = 1e-12;
  GalleryOptions params;
  std::string out = "out";
  std::string format = "csv";
  std::uint64_t seed = 0;
  std::optional<double> fd_rtol, fd_atol;
  double fd_h_rel = 1e-6;
};

// Raw flag values; only flags given on the command line override the config file.
struct Flags {
  std::string config, model, cost, out, format;
  double t0 = 0, tf = 0, rtol = 0, atol = 0, event_tol = 0, fd_rtol = 0, fd_atol = 0, fd_h_rel = 0;
  std::vector<std::string> params;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON file mirroring these flags");
  sub->add_option("--model", f.model, "gallery model name");
  sub->add_option("--cost", f.cost, "cost name from the model's menu");
  sub->add_option("--t0", f.t0, "initial time");
  sub->add_option("--tf", f.tf, "final time");
  sub->add_option("--rtol", f.rtol, "relative tolerance");
  sub->add_option("--atol", f.atol, "absolute tolerance");
  sub->add_option("--event-tol", f.event_tol, "event time tolerance");
  sub->add_option("--params", f.params, "model options key=value");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--format", f.format, "table format: csv|json");
  sub->add_option("--seed", f.seed, "seed recorded for randomized runs");
}

void apply_config_file(RunSettings& s, const std::string& path) {
  const json doc = read_json(path);
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  try {
    for (const auto& [k, v] : doc.items()) {
      if (k == "model") s.model = v.get<std::string>();
      else if (k == "cost") s.cost = v.get<std::string>();
      else if (k == "t0") s.t0 = v.get<double>();
      else if (k == "tf") s.tf = v.get<double>();
      else if (k == "rtol") s.rtol = v.get<double>();
      else if (k == "atol") s.atol = v.get<double>();
      else if (k == "event_tol") s.event_tol = v.get<double>();
      else if (k == "out") s.out = v.get<std::string>();
      else if (k == "format") s.format = v.get<std::string>();
      else if (k == "seed") s.seed = v.get<std::uint64_t>();
      else if (k == "fd_rtol") s.fd_rtol = v.get<double>();
      else if (k == "fd_atol") s.fd_atol = v.get<double>();
      else if (k == "fd_h_rel") s.fd_h_rel = v.get<double>();
      else if (k == "params") {
        for (const auto& [pk, pv] : v.items()) {
          s.params[pk] = pv.is_string() ? pv.get<std::string>() : pv.dump();
        }
      } else {
        throw ValidationError("unknown config key '" + k + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
}

RunSettings resolve(const CLI::App* sub, const Flags& f) {
  RunSettings s;
  s.command = sub->get_name();
  if (!f.config.empty()) apply_config_file(s, f.config);
  const auto given = [&](const char* name) { return sub->count(name) > 0; };
  if (given("--model")) s.model = f.model;
  if (given("--cost")) s.cost = f.cost;
  if (given("--t0")) s.t0 = f.t0;
  if (given("--tf")) s.tf = f.tf;
  if (given("--rtol")) s.rtol = f.rtol;
  if (given("--atol")) s.atol = f.atol;
  if (given("--event-tol")) s.event_tol = f.event_tol;
  if (given("--out")) s.out = f.out;
  if (given("--format")) s.format = f.format;
  if (given("--seed")) s.seed = f.seed;
  if (sub->get_option_no_throw("--fd-rtol") && given("--fd-rtol")) s.fd_rtol = f.fd_rtol;
  if (sub->get_option_no_throw("--fd-atol") && given("--fd-atol")) s.fd_atol = f.fd_atol;
  if (sub->get_option_no_throw("--fd-h-rel") && given("--fd-h-rel")) s.fd_h_rel = f.fd_h_rel;
  for (const std::string& kv : f.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("--params expects key=value, got '" + kv + "'");
    }
    s.params[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return s;
}

// Everything a pipeline needs once the settings are resolved.
struct Run {
  RunSettings settings;
  GalleryProblem problem;
  std::string cost_name;
  IntegratorConfig integrator;
  TableFormat format = TableFormat::Csv;
  fs::path dir;

  const CostFunctional& cost() const { return problem.cost(cost_name); }

  json provenance() const {
    const RunSettings& s = settings;
    json p;
    p["tool"] = "hysens";
    p["command"] = s.command;
    p["model"] = s.model;
    p["cost"] = cost_name;
    p["params"] = s.params;
    json rho = json::object();
    for (Index j = 0; j < problem.rho.size(); ++j) rho[problem.rho.labels[j]] = problem.rho.rho[j];
    p["rho"] = rho;
    p["t0"] = problem.t0;
    p["tf"] = problem.tF;
    p["rtol"] = s.rtol;
    p["atol"] = s.atol;
    p["event_tol"] = s.event_tol;
    p["format"] = s.format;
    p["seed"] = s.seed;
    if (s.command == "fd-check") {
      p["fd_rtol"] = s.fd_rtol.value_or(s.rtol);
      p["fd_atol"] = s.fd_atol.value_or(s.atol);
      p["fd_h_rel"] = s.fd_h_rel;
    }
    return p;
  }

  void table(const std::string& stem, const Table& t) const {
    const fs::path path = dir / (stem + extension(format));
    write_table(path, t, format);
    write_provenance(path, provenance());
  }
  void document(const std::string& name, const json& doc) const {
    const fs::path path = dir / name;
    write_json(path, doc);
    write_provenance(path, provenance());
  }
};

Run prepare(const RunSettings& s) {
  Run r;
  r.settings = s;
  r.problem = register_gallery().make(s.model, s.params);
  if (s.t0) r.problem.t0 = *s.t0;
  if (s.tf) r.problem.tF = *s.tf;
  if (!(r.problem.tF > r.problem.t0)) throw ValidationError("tf must be greater than t0");
  r.cost_name = s.cost.empty() ? r.problem.default_cost : s.cost;
  (void)r.cost();  // validates the name
  r.integrator.rtol = s.rtol;
  r.integrator.atol = s.atol;
  r.integrator.event_tol = s.event_tol;
  r.integrator.validate();
  r.format = parse_table_format(s.format);
  r.dir = s.out;
  fs::create_directories(r.dir);
  return r;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0 ? std::abs(a - b) / scale : 0.0;
}

Table series_table(const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows) {
  return Table{header, rows};
}

void write_forward_outputs(const Run& r, const HybridTrajectory& traj) {
  r.table("trajectory", trajectory_table(traj));
  r.document("events.json", events_json(traj));
  r.table("residuals", residual_table(constraint_residuals(traj, r.problem.system)));
}

json gradient_doc(const Run& r, const Vector& psi, const Matrix& direct, const Matrix* adjoint) {
  json g;
  g["model"] = r.settings.model;
  g["cost"] = r.cost_name;
  g["parameters"] = r.problem.rho.labels;
  g["psi"] = std::vector<double>(psi.data(), psi.data() + psi.size());
  g["direct"] = matrix_json(direct);
  if (adjoint) {
    g["adjoint"] = matrix_json(*adjoint);
    double worst = 0.0;
    for (Index i = 0; i < direct.rows(); ++i)
      for (Index j = 0; j < direct.cols(); ++j)
        worst = std::max(worst, rel_diff(direct(i, j), (*adjoint)(i, j)));
    g["max_rel_diff"] = worst;
  }
  return g;
}

void print_gradient(std::ostream& out, const Run& r, const Matrix& G, const char* what) {
  out << what << " d psi / d rho (" << r.settings.model << ", " << r.cost_name << "):\n";
  out << std::setprecision(12);
  for (Index i = 0; i < G.rows(); ++i)
    for (Index j = 0; j < G.cols(); ++j)
      out << "  [" << i << "] " << r.problem.rho.labels[j] << " = " << G(i, j) << "\n";
}

int cmd_simulate(const Run& r, std::ostream& out) {
  SimulationOptions opt;
  opt.integrator = r.integrator;
  const HybridTrajectory traj =
      simulate(r.problem.system, r.cost(), r.problem.rho.rho, r.problem.t0, r.problem.tF, opt);
  write_forward_outputs(r, traj);
  const ConstraintResiduals res = constraint_residuals(traj, r.problem.system);
  out << "simulated " << r.settings.model << " on [" << r.problem.t0 << ", " << r.problem.tF
      << "]: " << traj.events.size() << " events, psi = "
      << cost_value(traj, r.problem.system, r.cost()).transpose() << "\n";
  if (!res.t.empty()) {
    out << "max position residual " << res.max_pos() << ", max velocity residual "
        << res.max_vel() << "\n";
  }
  return 0;
}

int cmd_direct(const Run& r, std::ostream& out) {
  const DirectResult d = propagate_direct(r.problem.system, r.cost(), r.problem.rho.rho,
                                          r.problem.t0, r.problem.tF, r.integrator);
  write_forward_outputs(r, d.trajectory);
  const SensitivitySeries ss = sensitivity_series(d.trajectory);
  r.table("sensitivity", series_table(ss.header, ss.rows));
  r.document("gradient.json", gradient_doc(r, d.psi, d.gradient, nullptr));
  print_gradient(out, r, d.gradient, "direct");
  return 0;
}

int cmd_adjoint(const Run& r, std::ostream& out) {
  const DirectResult d = propagate_direct(r.problem.system, r.cost(), r.problem.rho.rho,
                                          r.problem.t0, r.problem.tF, r.integrator);
  const AdjointResult a = propagate_adjoint(d.trajectory, r.problem.system, r.cost(), r.integrator);
  write_forward_outputs(r, d.trajectory);
  const AdjointSeries back = adjoint_series(a, d.trajectory.dims);
  const AdjointSeries fwd = forward_order(back);
  r.table("adjoint_backward", series_table(back.header, back.rows));
  r.table("adjoint_forward", series_table(fwd.header, fwd.rows));
  const json g = gradient_doc(r, d.psi, d.gradient, &a.gradient);
  r.document("gradient.json", g);
  print_gradient(out, r, a.gradient, "adjoint");
  out << "max relative difference to direct: " << g["max_rel_diff"].get<double>() << "\n";
  return 0;
}

int cmd_fd_check(const Run& r, std::ostream& out) {
  const RunSettings& s = r.settings;
  const DirectResult d = propagate_direct(r.problem.system, r.cost(), r.problem.rho.rho,
                                          r.problem.t0, r.problem.tF, r.integrator);
  const AdjointResult a = propagate_adjoint(d.trajectory, r.problem.system, r.cost(), r.integrator);
  IntegratorConfig fd_cfg = r.integrator;
  fd_cfg.rtol = s.fd_rtol.value_or(s.rtol);
  fd_cfg.atol = s.fd_atol.value_or(s.atol);
  fd_cfg.validate();
  const Matrix fd = fd_cost_sensitivity(r.problem.system, r.cost(), r.problem.rho.rho,
                                        r.problem.t0, r.problem.tF, fd_cfg, s.fd_h_rel);
  json rows = json::array();
  out << std::left << std::setw(12) << "parameter" << std::setw(22) << "direct" << std::setw(22)
      << "adjoint" << std::setw(22) << "fd" << "max_rel_diff\n";
  out << std::setprecision(12);
  for (Index i = 0; i < fd.rows(); ++i) {
    for (Index j = 0; j < fd.cols(); ++j) {
      const double dd = d.gradient(i, j), aa = a.gradient(i, j), ff = fd(i, j);
      const double worst = std::max({rel_diff(dd, ff), rel_diff(aa, ff), rel_diff(dd, aa)});
      json row;
      row["parameter"] = r.problem.rho.labels[j];
      row["output"] = i;
      row["direct"] = dd;
      row["adjoint"] = aa;
      row["fd"] = ff;
      row["max_rel_diff"] = worst;
      rows.push_back(row);
      out << std::setw(12) << r.problem.rho.labels[j] << std::setw(22) << dd << std::setw(22)
          << aa << std::setw(22) << ff << worst << "\n";
    }
  }
  r.document("fd_check.json", rows);
  return 0;
}

// Re-renders the tabular outputs of a stored run in the requested format and
// summarizes its JSON documents.
int cmd_report(const std::string& dir_name, const std::string& format_name, std::ostream& out) {
  const fs::path dir(dir_name);
  if (!fs::is_directory(dir)) throw ValidationError("no run directory " + dir.string());
  const TableFormat format = parse_table_format(format_name);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& p : files) {
    const std::string name = p.filename().string();
    if (name.ends_with(".provenance.json")) continue;
    if (p.extension() == ".csv" || p.extension() == ".json") {
      const bool tabular = p.extension() == ".csv" || read_json(p).contains("header");
      if (tabular && p.extension() != extension(format)) {
        const Table t = read_table(p);
        const fs::path target = fs::path(p).replace_extension(extension(format));
        write_table(target, t, format);
        const fs::path prov(p.string() + ".provenance.json");
        json meta = fs::exists(prov) ? read_json(prov) : json::object();
        meta["rendered_from"] = name;
        write_provenance(target, meta);
        out << "rendered " << target.filename().string() << " (" << t.rows.size() << " rows)\n";
      }
    }
  }
  if (fs::exists(dir / "events.json")) {
    const json ev = read_json(dir / "events.json");
    out << "events: " << ev.size() << "\n";
    for (const json& e : ev) {
      out << "  t = " << std::setprecision(12) << e["t_eve"].get<double>() << "  "
          << e["kind"].get<std::string>() << "\n";
    }
  }
  if (fs::exists(dir / "gradient.json")) {
    out << "gradient: " << read_json(dir / "gradient.json").dump() << "\n";
  }
  if (fs::exists(dir / "fd_check.json")) {
    out << "fd check: " << read_json(dir / "fd_check.json").dump() << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"hysens: hybrid multibody simulation with direct and adjoint sensitivities"};
  app.require_subcommand(1);
  Flags flags;
  std::vector<CLI::App*> pipelines;
  for (const auto& [name, help] : std::vector<std::pair<const char*, const char*>>{
           {"simulate", "forward run: trajectory, events, constraint residuals"},
           {"direct", "forward run with direct (tangent linear) sensitivities"},
           {"adjoint", "direct run plus backward adjoint sweep"},
           {"fd-check", "direct, adjoint and finite-difference gradients side by side"}}) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, flags);
    pipelines.push_back(sub);
  }
  CLI::App* fd = pipelines.back();
  fd->add_option("--fd-rtol", flags.fd_rtol, "relative tolerance of the perturbed runs");
  fd->add_option("--fd-atol", flags.fd_atol, "absolute tolerance of the perturbed runs");
  fd->add_option("--fd-h-rel", flags.fd_h_rel, "relative finite-difference step");

  std::string report_dir = "out", report_format = "csv";
  CLI::App* report = app.add_subcommand("report", "re-render the outputs of a stored run");
  report->add_option("--out", report_dir, "run directory");
  report->add_option("--format", report_format, "target table format: csv|json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (report->parsed()) return cmd_report(report_dir, report_format, out);
    for (CLI::App* sub : pipelines) {
      if (!sub->parsed()) continue;
      const Run r = prepare(resolve(sub, flags));
      const std::string& c = r.settings.command;
      if (c == "simulate") return cmd_simulate(r, out);
      if (c == "direct") return cmd_direct(r, out);
      if (c == "adjoint") return cmd_adjoint(r, out);
      return cmd_fd_check(r, out);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace hysens
