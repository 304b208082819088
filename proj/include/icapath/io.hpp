#pragma once

#include <cstdint>
#include <iosfwd>
#include "json.hpp"
#include <optional>
#include <string>
#include <vector>

#include "icapath/dataset.hpp"
#include "icapath/diagnostics.hpp"
#include "icapath/family.hpp"
#include "icapath/penalty.hpp"
#include "icapath/simulate.hpp"
#include "icapath/solver.hpp"
#include "icapath/tuning.hpp"

namespace icapath {

std::string version_string();

/// Table read from a headed CSV file; `data.y` holds the response column.
struct CsvTable {
  std::vector<std::string> predictor_names;
  Dataset data;
};

/// RFC 4180 records (quoted fields, doubled quotes, CRLF or LF endings).
/// Throws DataError naming the record and column of the first bad cell.
std::vector<std::vector<std::string>> parse_csv_records(std::istream& in);

CsvTable read_csv(std::istream& in, const std::string& response = "y");
CsvTable read_csv_file(const std::string& path,
                       const std::string& response = "y");

/// Provenance block embedded in every output file.
struct RunManifest {
  std::string command;
  std::string config_digest;  // FNV-1a 64 of the canonical settings text
  std::uint64_t seed = 0;
  std::string version;
  std::string timestamp;  // UTC, ISO 8601
};

std::string fnv1a_hex(const std::string& text);
RunManifest make_manifest(const std::string& command,
                          const std::string& settings, std::uint64_t seed);

nlohmann::json to_json(const RunManifest& m);

/// A path as stored on disk; coefficients on the user's scale.
struct StoredPath {
  FamilySpec family = FamilySpec::gaussian();
  PenaltySpec penalty = PenaltySpec::l1();
  std::vector<std::string> predictor_names;
  std::vector<double> lambdas;
  std::vector<Vector> coefficients;
  std::vector<double> loglik;
  std::vector<double> deviance;
  std::vector<bool> converged;
  Vector column_scales;
  bool standardized = false;
  double tol = 1e-8;
  int max_sweeps = 100;

  Eigen::Index p() const { return column_scales.size(); }
  Vector fitted_coefficients(std::size_t k) const;
};

nlohmann::json path_to_json(const PathResult& path, const FamilySpec& fam,
                            const PenaltySpec& pen, const SolverConfig& cfg,
                            const std::vector<std::string>& names,
                            const RunManifest& manifest);

/// Throws DataError when required fields are missing or mistyped.
StoredPath path_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SelectionResult& sel);
nlohmann::json to_json(const OptimalityReport& r);
nlohmann::json to_json(const GlobalCheckReport& r);

/// One row per method: medians and robust SDs of every metric.
void write_experiment_csv(std::ostream& out, const ExperimentResult& result);
nlohmann::json to_json(const ExperimentResult& result);

/// Wide table: lambda followed by one column per predictor.
void write_plot_csv(std::ostream& out, const StoredPath& path);

}  // namespace icapath
