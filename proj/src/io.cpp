#include "kpn/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "kpn/error.hpp"

namespace kpn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void write_f64(std::ostream& out, std::span<const double> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * 8));
  } else {
    for (double v : values) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      char buf[8];
      for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
      out.write(buf, 8);
    }
  }
}

std::vector<double> read_f64(std::istream& in, std::size_t n, const std::string& path) {
  std::vector<double> values(n);
  std::vector<unsigned char> raw(n * 8);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw ParseError("'" + path + "': truncated value array", 2);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | raw[i * 8 + b];
    values[i] = std::bit_cast<double>(bits);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("'" + path + "': trailing bytes", 2);
  return values;
}

nlohmann::json read_header(std::istream& in, const std::string& path, const std::string& kind) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("'" + path + "': missing header", 1);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': header is not JSON: " + e.what(), 1);
  }
  if (h.value("kind", std::string()) != kind) throw SchemaError("'" + path + "': expected kind '" + kind + "'");
  return h;
}

std::vector<GridAxis> axes_from(const nlohmann::json& extents, const nlohmann::json& counts) {
  if (!extents.is_array() || !counts.is_array() || extents.size() != counts.size()) {
    throw SchemaError("grid header: extents and counts must be arrays of equal length");
  }
  std::vector<GridAxis> axes;
  for (std::size_t a = 0; a < extents.size(); ++a) axes.push_back({counts[a].get<int>(), extents[a].get<double>()});
  return axes;
}

nlohmann::json axes_json(const std::vector<GridAxis>& axes, const char* prefix) {
  nlohmann::json j;
  nlohmann::json ext = nlohmann::json::array(), cnt = nlohmann::json::array();
  for (const auto& ax : axes) {
    ext.push_back(ax.extent);
    cnt.push_back(ax.count);
  }
  j[std::string(prefix) + "extents"] = ext;
  j[std::string(prefix) + "counts"] = cnt;
  return j;
}

}  // namespace

NumericTable parse_csv(std::istream& in) {
  NumericTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);
    if (trim(line).empty()) continue;
    const auto cells = split_cells(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_number(cells[c], row[c])) numeric = false;
    }
    if (!numeric && rows.empty() && table.header.empty()) {
      table.header = cells;
      width = cells.size();
      continue;
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " columns, found " + std::to_string(cells.size()), lineno);
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_number(cells[c], v)) throw ParseError("non-numeric cell '" + cells[c] + "'", lineno);
      if (!std::isfinite(v)) throw ParseError("non-finite value '" + cells[c] + "'", lineno);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no data rows", std::max(lineno, 1L));
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return table;
}

NumericTable read_csv(const std::string& path) {
  auto in = open_in(path);
  return parse_csv(in);
}

Dataset dataset_from_table(const NumericTable& table) {
  if (table.values.cols() < 2) throw ParseError("dataset needs at least one feature and one target column", 1);
  Dataset ds;
  ds.X = table.values.leftCols(table.values.cols() - 1);
  ds.y = table.values.col(table.values.cols() - 1);
  ds.validate();
  return ds;
}

Dataset ingest_csv(const std::string& path) { return dataset_from_table(read_csv(path)); }

void write_csv(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& values) {
  auto out = open_out(path);
  out.precision(17);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  if (!header.empty()) out << '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << values(r, c);
    out << '\n';
  }
}

nlohmann::json read_json(const std::string& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("'" + path + "': " + e.what(), 0);
  }
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

void write_grid(const std::string& path, const GridFunction& f) {
  nlohmann::json h = axes_json(f.axes(), "");
  h["kind"] = "grid";
  h["dims"] = f.dim();
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out << h.dump() << '\n';
  write_f64(out, f.values());
}

GridFunction read_grid(const std::string& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  const auto h = read_header(in, path, "grid");
  try {
    auto axes = axes_from(h.at("extents"), h.at("counts"));
    if (h.at("dims").get<int>() != static_cast<int>(axes.size())) throw SchemaError("grid header: dims mismatch");
    std::size_t n = 1;
    for (const auto& ax : axes) n *= static_cast<std::size_t>(std::max(ax.count, 0));
    return GridFunction(std::move(axes), read_f64(in, n, path));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("'" + path + "': " + e.what());
  }
}

void write_plane(const std::string& path, const PlaneFunction& g) {
  const auto& design = g.design();
  nlohmann::json h = axes_json(g.t_axes(), "t_");
  h["kind"] = "plane";
  h["d"] = design.d();
  h["k"] = design.k();
  h["weights"] = design.weights();
  nlohmann::json dirs = nlohmann::json::array();
  for (const auto& A : design.directions()) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < A.cols(); ++c) row.push_back(A(r, c));
      rows.push_back(row);
    }
    dirs.push_back(rows);
  }
  h["design"] = dirs;
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out << h.dump() << '\n';
  write_f64(out, g.values());
}

PlaneFunction read_plane(const std::string& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  const auto h = read_header(in, path, "plane");
  try {
    const int d = h.at("d").get<int>();
    const int k = h.at("k").get<int>();
    std::vector<Eigen::MatrixXd> dirs;
    for (const auto& JA : h.at("design")) {
      Eigen::MatrixXd A(d - k, d);
      for (int r = 0; r < d - k; ++r) {
        for (int c = 0; c < d; ++c) A(r, c) = JA.at(r).at(c).get<double>();
      }
      dirs.push_back(A);
    }
    DirectionDesign design(d, k, std::move(dirs), h.at("weights").get<std::vector<double>>());
    auto axes = axes_from(h.at("t_extents"), h.at("t_counts"));
    std::size_t n = design.size();
    for (const auto& ax : axes) n *= static_cast<std::size_t>(std::max(ax.count, 0));
    return PlaneFunction(std::move(design), std::move(axes), read_f64(in, n, path));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("'" + path + "': " + e.what());
  }
}

}  // namespace kpn
