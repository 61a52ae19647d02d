#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hysens/adjoint.hpp"
#include "hysens/simulation.hpp"

namespace hysens {

/// Named-column numeric table, the common shape of every time-series output.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

enum class TableFormat { Csv, Json };

[[nodiscard]] TableFormat parse_table_format(const std::string& s);
[[nodiscard]] const char* extension(TableFormat f);

/// t, q1..qn, v1..vn, z1..znc at every accepted node of every segment. Event
/// times appear twice (pre- and post-event rows).
[[nodiscard]] Table trajectory_table(const HybridTrajectory& traj);
/// t, pos, vel at every accepted step of every constrained segment.
[[nodiscard]] Table residual_table(const ConstraintResiduals& res);
/// Event records as {t_eve, kind, v_minus, v_plus, dteve_drho, delta_mu?, ...}.
[[nodiscard]] nlohmann::json events_json(const HybridTrajectory& traj);
/// Adjoint series reordered so that time increases.
[[nodiscard]] AdjointSeries forward_order(const AdjointSeries& backward);

/// CSV uses 17 significant digits so that values round-trip exactly.
void write_table(const std::filesystem::path& path, const Table& table, TableFormat format);
[[nodiscard]] Table read_table(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
[[nodiscard]] nlohmann::json read_json(const std::filesystem::path& path);

/// Writes <file>.provenance.json next to an output file.
void write_provenance(const std::filesystem::path& file, const nlohmann::json& provenance);

}  // namespace hysens
