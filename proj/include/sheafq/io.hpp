#pragma once

#include "sheafq/sheaf.hpp"
#include "sheafq/training.hpp"

#include "json.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace sheafq {

using Json = nlohmann::json;

/// {"vertices": [...], "edges": [[u, v], ...]}
Json graph_to_json(const Graph& graph);
/// Throws ParseError prefixed with `source`.
Graph graph_from_json(const Json& doc, const std::string& source = "graph");

/// {"graph": ..., "d_v": {id: k}, "d_e": {"u,v": k}, "maps": {"v|u,v": [row-major]}}.
/// d_v / d_e may also be a single integer on input.
Json sheaf_to_json(const CellularSheaf<double>& sheaf);
CellularSheaf<double> sheaf_from_json(const Json& doc, const std::string& source = "sheaf");

Json read_json_file(const std::filesystem::path& file);
void write_json_file(const Json& doc, const std::filesystem::path& file, int indent = 2);

CellularSheaf<double> read_sheaf(const std::filesystem::path& file);
void write_sheaf(const CellularSheaf<double>& sheaf, const std::filesystem::path& file);

/// Sheaf JSON plus "raw_theta", "encoder", "readout" and "config".
Json checkpoint_to_json(const SheafModel& model, const Json& config = Json::object());
SheafModel model_from_checkpoint(const Json& doc, const std::string& source = "checkpoint");

/// Generator manifest; read back by inspect-dataset to cross-check counts.
Json manifest_to_json(const TwoBlockManifest& m);
TwoBlockManifest manifest_from_json(const Json& doc, const std::string& source = "manifest.json");

/// Columns: epoch, task, cent, theta_mm, total, val_loss, val_acc.
void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& file);

/// Signal files: one row per stalk coordinate, one column per channel, no header.
MatrixXd read_signal_csv(const std::filesystem::path& file);
void write_signal_csv(const MatrixXd& signal, const std::filesystem::path& file);
void write_signal_csv(const MatrixXd& signal, std::ostream& out);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);
/// `x` rounded to `digits` significant digits.
std::string format_significant(double x, int digits = 6);

}  // namespace sheafq
