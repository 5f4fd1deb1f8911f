#pragma once

// File formats: dataset CSV, model/metrics JSON, and the binary layout for
// grid and plane functions (one JSON header line followed by little-endian
// f64 values).

#include <istream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "kpn/grid.hpp"
#include "kpn/kplane.hpp"
#include "kpn/network.hpp"

namespace kpn {

struct NumericTable {
  std::vector<std::string> header;  // empty when the file has none
  Eigen::MatrixXd values;
};

/// Comma-separated numbers, one row per line; a first row containing a
/// non-numeric cell is taken as the header. ParseError (with line number) on
/// empty input, ragged rows, non-numeric cells, NaN or Inf.
NumericTable parse_csv(std::istream& in);
NumericTable read_csv(const std::string& path);

/// d feature columns followed by one target column.
Dataset ingest_csv(const std::string& path);
Dataset dataset_from_table(const NumericTable& table);

void write_csv(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& values);

nlohmann::json read_json(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& j);
void write_text(const std::string& path, const std::string& text);

void write_grid(const std::string& path, const GridFunction& f);
GridFunction read_grid(const std::string& path);
void write_plane(const std::string& path, const PlaneFunction& g);
PlaneFunction read_plane(const std::string& path);

}  // namespace kpn
