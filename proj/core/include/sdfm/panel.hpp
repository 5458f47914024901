#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdfm/time_index.hpp"

namespace sdfm {

struct StationMeta {
  std::string id;
  std::string name;
  std::optional<double> latitude;
  std::optional<double> longitude;
};

using MissingMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Monthly multivariate panel: one row per station, one column per time point.
// Cells flagged in `missing` hold NaN in `values`; all other cells are finite.
struct Panel {
  std::vector<StationMeta> stations;
  TimeIndex time;
  Eigen::MatrixXd values;
  MissingMask missing;

  int n() const { return static_cast<int>(values.rows()); }
  int T() const { return static_cast<int>(values.cols()); }
  bool any_missing() const { return missing.any(); }
  int missing_count() const { return static_cast<int>(missing.count()); }

  // Checks the structural invariants (dimensions agree, ids unique,
  // observed cells finite). Throws on violation.
  void validate() const;
};

struct StandardizationParams {
  Eigen::VectorXd means;
  Eigen::VectorXd sds;  // all entries > 0
};

struct CsvSchema {
  char delimiter = ',';
};

// Reads a wide CSV (`date,<id_1>,...,<id_n>`, dates "YYYY-MM", cells decimal
// numbers, empty, or "NA"). Months must be contiguous and strictly increasing.
Panel load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

// Writes the same wide format; values printed with 17 significant digits so a
// load/write/load round trip is bit-stable. Missing cells become "NA".
void write_csv(const Panel& panel, const std::filesystem::path& path);

// Optional sidecar `id,name,latitude,longitude`; empty lat/lon allowed.
std::vector<StationMeta> load_station_meta(const std::filesystem::path& path);

// Attaches sidecar metadata to matching station ids; unknown ids are ignored.
void apply_station_meta(Panel& panel, const std::vector<StationMeta>& meta);

// Centers each row by its mean and scales by its sample standard deviation
// (denominator T-1). Input must be fully observed with nondegenerate rows.
std::pair<Panel, StandardizationParams> standardize(const Panel& panel);

// Exact inverse of standardize up to floating-point round-off.
Panel destandardize(const Panel& panel, const StandardizationParams& params);

}  // namespace sdfm
