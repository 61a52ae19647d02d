#include "hysens/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace hysens {

namespace fs = std::filesystem;
using nlohmann::json;

TableFormat parse_table_format(const std::string& s) {
  if (s == "csv") return TableFormat::Csv;
  if (s == "json") return TableFormat::Json;
  throw ValidationError("format must be csv or json, got '" + s + "'");
}

const char* extension(TableFormat f) { return f == TableFormat::Csv ? ".csv" : ".json"; }

Table trajectory_table(const HybridTrajectory& traj) {
  const Dimensions& d = traj.dims;
  Table tab;
  tab.header.push_back("t");
  for (const char* s : {"q", "v"})
    for (Index i = 0; i < d.n; ++i) tab.header.push_back(s + std::to_string(i + 1));
  for (Index i = 0; i < d.nc; ++i) tab.header.push_back("z" + std::to_string(i + 1));
  const Index w = 2 * d.n + d.nc;
  for (const Segment& seg : traj.segments) {
    for (double t : seg.dense.nodes()) {
      const Vector y = interpolate(seg.dense, t);
      std::vector<double> row{t};
      row.insert(row.end(), y.data(), y.data() + w);
      tab.rows.push_back(std::move(row));
    }
  }
  return tab;
}

Table residual_table(const ConstraintResiduals& res) {
  Table tab;
  tab.header = {"t", "pos", "vel"};
  for (std::size_t i = 0; i < res.t.size(); ++i) tab.rows.push_back({res.t[i], res.pos[i], res.vel[i]});
  return tab;
}

namespace {

std::vector<double> to_std(const Eigen::Ref<const Matrix>& m) {
  std::vector<double> out;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

double block_norm(const Matrix& m) { return m.size() ? m.norm() : 0.0; }

}  // namespace

json events_json(const HybridTrajectory& traj) {
  json arr = json::array();
  for (const EventRecord& e : traj.events) {
    json ev;
    ev["t_eve"] = e.t_eve;
    ev["kind"] = to_string(e.kind);
    ev["name"] = e.name;
    ev["mode_minus"] = e.mode_minus;
    ev["mode_plus"] = e.mode_plus;
    ev["q"] = to_std(e.minus.q);
    ev["v_minus"] = to_std(e.minus.v);
    ev["v_plus"] = to_std(e.plus.v);
    ev["z"] = to_std(e.z);
    if (e.dteve_drho.size()) ev["dteve_drho"] = to_std(e.dteve_drho);
    if (e.kind == EventKind::ConstrainedInelastic) ev["delta_mu"] = to_std(e.delta_mu);
    const JumpMatrix& S = e.jump;
    ev["jump_block_norms"] = {{"S", block_norm(S.S)},   {"QQ", block_norm(S.QQ)},
                              {"QG", block_norm(S.QG)}, {"VQ", block_norm(S.VQ)},
                              {"VV", block_norm(S.VV)}, {"VG", block_norm(S.VG)},
                              {"ZQ", block_norm(S.ZQ)}};
    arr.push_back(std::move(ev));
  }
  return arr;
}

AdjointSeries forward_order(const AdjointSeries& backward) {
  AdjointSeries out;
  out.header = backward.header;
  out.rows.assign(backward.rows.rbegin(), backward.rows.rend());
  return out;
}

void write_table(const fs::path& path, const Table& table, TableFormat format) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write " + path.string());
  if (format == TableFormat::Json) {
    f << json{{"header", table.header}, {"rows", table.rows}}.dump() << "\n";
    return;
  }
  for (std::size_t i = 0; i < table.header.size(); ++i) f << (i ? "," : "") << table.header[i];
  f << "\n";
  char buf[32];
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto r = std::to_chars(buf, buf + sizeof buf, row[i]);
      f << (i ? "," : "") << std::string_view(buf, r.ptr - buf);
    }
    f << "\n";
  }
}

Table read_table(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot read " + path.string());
  Table tab;
  if (path.extension() == ".json") {
    const json doc = json::parse(f, nullptr, false);
    if (doc.is_discarded() || !doc.contains("header") || !doc.contains("rows")) {
      throw ValidationError(path.string() + " is not a table document");
    }
    tab.header = doc["header"].get<std::vector<std::string>>();
    tab.rows = doc["rows"].get<std::vector<std::vector<double>>>();
    return tab;
  }
  std::string line;
  if (!std::getline(f, line)) throw ValidationError(path.string() + " is empty");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) tab.header.push_back(cell);
  }
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double x = 0.0;
      const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), x);
      if (r.ec != std::errc() || r.ptr != cell.data() + cell.size()) {
        throw ValidationError(path.string() + ": bad number '" + cell + "'");
      }
      row.push_back(x);
    }
    if (row.size() != tab.header.size()) {
      throw ValidationError(path.string() + ": row width does not match header");
    }
    tab.rows.push_back(std::move(row));
  }
  return tab;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write " + path.string());
  f << doc.dump(2) << "\n";
}

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot read " + path.string());
  const json doc = json::parse(f, nullptr, false);
  if (doc.is_discarded()) throw ValidationError(path.string() + " is not valid JSON");
  return doc;
}

void write_provenance(const fs::path& file, const json& provenance) {
  json doc = provenance;
  doc["file"] = file.filename().string();
  write_json(fs::path(file.string() + ".provenance.json"), doc);
}

}  // namespace hysens
