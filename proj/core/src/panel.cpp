#include "sdfm/panel.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "sdfm/errors.hpp"
#include "sdfm/io.hpp"

namespace sdfm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t pos = text.find('\n', start);
    if (pos == std::string::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    std::string line = text.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = pos + 1;
  }
  return lines;
}

bool is_na_token(const std::string& cell) {
  if (cell.empty()) return true;
  return lower(cell) == "na";
}

double parse_number(const std::string& cell, int row, int col) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError("row " + std::to_string(row) + ", column " +
                     std::to_string(col) + ": cannot parse cell '" + cell +
                     "' as a number");
  }
  return value;
}

// "YYYY-MM" -> (year, month). Row is 1-based for diagnostics.
std::pair<int, int> parse_date(const std::string& cell, int row) {
  const auto fail = [&]() -> std::pair<int, int> {
    throw ParseError("row " + std::to_string(row) + ", column 1: expected "
                     "date 'YYYY-MM', got '" + cell + "'");
  };
  const std::size_t dash = cell.find('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 >= cell.size()) {
    return fail();
  }
  int year = 0, month = 0;
  const char* ys = cell.data();
  const char* ye = cell.data() + dash;
  const char* ms = cell.data() + dash + 1;
  const char* me = cell.data() + cell.size();
  auto [yp, yec] = std::from_chars(ys, ye, year);
  auto [mp, mec] = std::from_chars(ms, me, month);
  if (yec != std::errc() || yp != ye || mec != std::errc() || mp != me) {
    return fail();
  }
  if (month < 1 || month > 12) {
    throw ParseError("row " + std::to_string(row) + ", column 1: month out of "
                     "range in '" + cell + "'");
  }
  return {year, month};
}

}  // namespace

void Panel::validate() const {
  time.validate();
  const int rows = n();
  const int cols = T();
  if (rows < 1 || cols < 1) throw ShapeError("panel must be at least 1x1");
  if (static_cast<int>(stations.size()) != rows) {
    throw ShapeError("station list length " + std::to_string(stations.size()) +
                     " does not match " + std::to_string(rows) + " rows");
  }
  if (time.length != cols) {
    throw ShapeError("time index length " + std::to_string(time.length) +
                     " does not match " + std::to_string(cols) + " columns");
  }
  if (missing.rows() != rows || missing.cols() != cols) {
    throw ShapeError("missing mask shape does not match values");
  }
  std::set<std::string> ids;
  for (const auto& s : stations) {
    if (s.id.empty()) throw ShapeError("empty station id");
    if (!ids.insert(s.id).second) {
      throw ShapeError("duplicate station id '" + s.id + "'");
    }
    if (s.latitude && (*s.latitude < -90.0 || *s.latitude > 90.0)) {
      throw ShapeError("station '" + s.id + "' latitude out of range");
    }
    if (s.longitude && (*s.longitude < -180.0 || *s.longitude > 180.0)) {
      throw ShapeError("station '" + s.id + "' longitude out of range");
    }
  }
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (!missing(i, j) && !std::isfinite(values(i, j))) {
        throw ShapeError("non-finite value at station '" + stations[i].id +
                         "', t=" + std::to_string(j + 1) +
                         " not flagged missing");
      }
    }
  }
}

Panel load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::string text = read_file(path);
  if (text.size() >= 3 && text[0] == '\xEF' && text[1] == '\xBB' &&
      text[2] == '\xBF') {
    text.erase(0, 3);  // UTF-8 BOM
  }
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw ParseError(path.string() + ": empty file");

  const std::vector<std::string> header = split_line(lines[0], schema.delimiter);
  if (header.empty() || lower(trim(header[0])) != "date") {
    throw ParseError(path.string() + ": header must start with 'date'");
  }
  const int n = static_cast<int>(header.size()) - 1;
  if (n < 1) throw ParseError(path.string() + ": no station columns");

  Panel panel;
  panel.stations.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    StationMeta meta;
    meta.id = trim(header[static_cast<std::size_t>(i) + 1]);
    if (meta.id.empty()) {
      throw ParseError(path.string() + ": empty station id in header column " +
                       std::to_string(i + 2));
    }
    meta.name = meta.id;
    panel.stations.push_back(std::move(meta));
  }

  std::vector<std::vector<double>> cols;
  std::vector<std::vector<bool>> miss;
  int prev_year = 0, prev_month = 0;
  int T = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const int row = static_cast<int>(li) + 1;
    const std::vector<std::string> fields = split_line(lines[li], schema.delimiter);
    if (static_cast<int>(fields.size()) != n + 1) {
      throw ParseError("row " + std::to_string(row) + ": expected " +
                       std::to_string(n + 1) + " fields, got " +
                       std::to_string(fields.size()));
    }
    const auto [year, month] = parse_date(trim(fields[0]), row);
    if (T == 0) {
      panel.time.start_year = year;
      panel.time.start_month = month;
    } else {
      const int expected_month = prev_month % 12 + 1;
      const int expected_year = prev_year + (prev_month == 12 ? 1 : 0);
      if (year == prev_year && month == prev_month) {
        throw DuplicateTimestamp("row " + std::to_string(row) +
                                 ": duplicate month " + trim(fields[0]));
      }
      if (year != expected_year || month != expected_month) {
        throw GapInTimeIndex("row " + std::to_string(row) + ": expected " +
                             std::to_string(expected_year) + "-" +
                             (expected_month < 10 ? "0" : "") +
                             std::to_string(expected_month) + ", got " +
                             trim(fields[0]));
      }
    }
    prev_year = year;
    prev_month = month;
    ++T;

    std::vector<double> col(static_cast<std::size_t>(n));
    std::vector<bool> m(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const std::string cell = trim(fields[static_cast<std::size_t>(i) + 1]);
      if (is_na_token(cell)) {
        col[static_cast<std::size_t>(i)] = kNaN;
        m[static_cast<std::size_t>(i)] = true;
      } else {
        col[static_cast<std::size_t>(i)] = parse_number(cell, row, i + 2);
      }
    }
    cols.push_back(std::move(col));
    miss.push_back(std::move(m));
  }
  if (T == 0) throw ParseError(path.string() + ": no data rows");

  panel.time.length = T;
  panel.values.resize(n, T);
  panel.missing.resize(n, T);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) {
      panel.values(i, t) = cols[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      panel.missing(i, t) = miss[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
    }
  }
  panel.validate();
  return panel;
}

void write_csv(const Panel& panel, const std::filesystem::path& path) {
  panel.validate();
  std::string out = "date";
  for (const auto& s : panel.stations) {
    out += ',';
    out += s.id;
  }
  out += '\n';
  for (int t = 1; t <= panel.T(); ++t) {
    out += panel.time.label(t);
    for (int i = 0; i < panel.n(); ++i) {
      out += ',';
      if (panel.missing(i, t - 1)) {
        out += "NA";
      } else {
        out += format_double(panel.values(i, t - 1));
      }
    }
    out += '\n';
  }
  atomic_write(path, out);
}

std::vector<StationMeta> load_station_meta(const std::filesystem::path& path) {
  const std::vector<std::string> lines = split_lines(read_file(path));
  if (lines.empty()) throw ParseError(path.string() + ": empty file");
  const std::vector<std::string> header = split_line(lines[0], ',');
  if (header.size() < 2 || lower(trim(header[0])) != "id") {
    throw ParseError(path.string() + ": expected header id,name[,latitude,longitude]");
  }
  std::vector<StationMeta> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const int row = static_cast<int>(li) + 1;
    const std::vector<std::string> f = split_line(lines[li], ',');
    if (f.size() < 2) {
      throw ParseError("row " + std::to_string(row) + ": expected at least id,name");
    }
    StationMeta meta;
    meta.id = trim(f[0]);
    meta.name = trim(f[1]);
    if (f.size() > 2 && !trim(f[2]).empty()) {
      meta.latitude = parse_number(trim(f[2]), row, 3);
    }
    if (f.size() > 3 && !trim(f[3]).empty()) {
      meta.longitude = parse_number(trim(f[3]), row, 4);
    }
    out.push_back(std::move(meta));
  }
  return out;
}

void apply_station_meta(Panel& panel, const std::vector<StationMeta>& meta) {
  for (auto& station : panel.stations) {
    const auto it = std::find_if(meta.begin(), meta.end(), [&](const auto& m) {
      return m.id == station.id;
    });
    if (it != meta.end()) station = *it;
  }
  panel.validate();
}

std::pair<Panel, StandardizationParams> standardize(const Panel& panel) {
  panel.validate();
  if (panel.any_missing()) {
    throw MissingDataError("cannot standardize a panel with " +
                           std::to_string(panel.missing_count()) +
                           " missing entries");
  }
  const int T = panel.T();
  if (T < 2) {
    throw DegenerateSeriesError("standardization needs at least 2 time points");
  }
  StandardizationParams params;
  params.means = panel.values.rowwise().mean();
  Eigen::MatrixXd centered = panel.values.colwise() - params.means;
  params.sds =
      (centered.array().square().rowwise().sum() / (T - 1)).sqrt().matrix();
  for (int i = 0; i < panel.n(); ++i) {
    if (!(params.sds(i) > 0.0)) {
      throw DegenerateSeriesError("station '" + panel.stations[i].id +
                                  "' has zero variance");
    }
  }
  Panel out = panel;
  out.values = (centered.array().colwise() / params.sds.array()).matrix();
  return {std::move(out), std::move(params)};
}

Panel destandardize(const Panel& panel, const StandardizationParams& params) {
  panel.validate();
  if (params.means.size() != panel.n() || params.sds.size() != panel.n()) {
    throw ShapeError("standardization params sized for " +
                     std::to_string(params.means.size()) +
                     " stations, panel has " + std::to_string(panel.n()));
  }
  Panel out = panel;
  out.values = ((panel.values.array().colwise() * params.sds.array())
                    .colwise() +
                params.means.array())
                   .matrix();
  return out;
}

}  // namespace sdfm
