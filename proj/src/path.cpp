#include <oupop/errors.hpp>
#include <oupop/path.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace oupop {

void check_grid(std::span<const double> grid) {
  if (grid.empty())
    throw InvalidGrid("grid is empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(grid[k]))
      throw InvalidGrid("grid contains a non-finite time");
    if (k > 0 && !(grid[k] > grid[k - 1])) {
      std::ostringstream os;
      os << "grid not strictly increasing at index " << k << " (t=" << grid[k]
         << ")";
      throw InvalidGrid(os.str());
    }
  }
}

SamplePath::SamplePath(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  check_grid(grid_);
  if (grid_.size() != values_.size())
    throw InvalidGrid("grid and values differ in length");
  for (double v : values_)
    if (!std::isfinite(v))
      throw InvalidGrid("path contains a non-finite value");
}

std::size_t SamplePath::bracket(double t) const {
  if (grid_.size() < 2)
    return 0;
  auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
  std::size_t k = static_cast<std::size_t>(it - grid_.begin());
  k = k == 0 ? 0 : k - 1;
  return std::min(k, grid_.size() - 2);
}

double SamplePath::at(double t) const {
  if (grid_.empty() || !(t >= grid_.front() && t <= grid_.back())) {
    std::ostringstream os;
    os << "t=" << t << " outside path grid";
    if (!grid_.empty())
      os << " [" << grid_.front() << ", " << grid_.back() << "]";
    throw OutOfRange(os.str());
  }
  if (grid_.size() == 1)
    return values_.front();
  const std::size_t k = bracket(t);
  const double t0 = grid_[k], t1 = grid_[k + 1];
  if (t == t0)
    return values_[k];
  if (t == t1)
    return values_[k + 1];
  const double w = (t - t0) / (t1 - t0);
  return values_[k] + w * (values_[k + 1] - values_[k]);
}

double evaluate_path(const SamplePath &path, double t) { return path.at(t); }

std::vector<double> uniform_grid(double horizon, double step) {
  if (!(horizon > 0.0) || !(step > 0.0) || !std::isfinite(horizon))
    throw InvalidGrid("uniform grid needs horizon > 0 and step > 0");
  const auto n = static_cast<std::size_t>(std::floor(horizon / step));
  std::vector<double> grid;
  grid.reserve(n + 2);
  for (std::size_t k = 0; k <= n; ++k)
    grid.push_back(static_cast<double>(k) * step);
  // Merge a sliver of a final interval (rounding of horizon/step) into the
  // last full one so the final node is exactly horizon.
  if (horizon - grid.back() > step * 1e-6)
    grid.push_back(horizon);
  else
    grid.back() = horizon;
  if (grid.size() == 1)
    grid.push_back(horizon);
  return grid;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream &os, std::span<const std::string> header,
               std::span<const std::span<const double>> columns) {
  if (header.size() != columns.size())
    throw ParameterError("csv header and column count differ");
  for (std::size_t c = 0; c < header.size(); ++c)
    os << (c ? "," : "") << header[c];
  os << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns[0].size();
  for (const auto &col : columns)
    if (col.size() != rows)
      throw ParameterError("csv columns differ in length");
  std::string line;
  for (std::size_t r = 0; r < rows; ++r) {
    line.clear();
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c)
        line += ',';
      line += format_double(columns[c][r]);
    }
    line += '\n';
    os << line;
  }
}

void write_csv(const std::filesystem::path &file,
               std::span<const std::string> header,
               std::span<const std::span<const double>> columns) {
  std::ofstream os(file, std::ios::binary);
  if (!os)
    throw Error("cannot open " + file.string() + " for writing");
  write_csv(os, header, columns);
}

void write_path_csv(std::ostream &os, const SamplePath &path) {
  const std::string header[] = {"t", "value"};
  const std::span<const double> cols[] = {path.grid(), path.values()};
  write_csv(os, header, cols);
}

void write_path_csv(const std::filesystem::path &file, const SamplePath &path) {
  std::ofstream os(file, std::ios::binary);
  if (!os)
    throw Error("cannot open " + file.string() + " for writing");
  write_path_csv(os, path);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view cell, std::size_t line) {
  cell = trim(cell);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty())
    throw ParseError("not a number: '" + std::string(cell) + "'", line);
  if (!std::isfinite(v))
    throw ParseError("non-finite value: '" + std::string(cell) + "'", line);
  return v;
}

} // namespace

SamplePath read_path_csv(std::istream &is, std::size_t min_rows) {
  std::string raw;
  std::size_t line = 0;
  bool have_header = false;
  std::vector<double> t, v;
  while (std::getline(is, raw)) {
    ++line;
    std::string_view row = trim(raw);
    if (row.empty())
      continue;
    if (!have_header) {
      if (row != "t,value")
        throw ParseError("expected header 't,value'", line);
      have_header = true;
      continue;
    }
    const auto comma = row.find(',');
    if (comma == std::string_view::npos ||
        row.find(',', comma + 1) != std::string_view::npos)
      throw ParseError("expected exactly two columns", line);
    const double tk = parse_cell(row.substr(0, comma), line);
    const double vk = parse_cell(row.substr(comma + 1), line);
    if (!t.empty() && !(tk > t.back())) {
      std::ostringstream os;
      os << "line " << line << ": time " << tk
         << " does not increase past previous " << t.back();
      throw InvalidGrid(os.str());
    }
    t.push_back(tk);
    v.push_back(vk);
  }
  if (!have_header)
    throw ParseError("missing header 't,value'", line == 0 ? 1 : line);
  if (t.size() < min_rows)
    throw ParseError("need at least " + std::to_string(min_rows) +
                         " data rows, found " + std::to_string(t.size()),
                     line);
  return SamplePath(std::move(t), std::move(v));
}

SamplePath load_series_csv(const std::filesystem::path &file,
                           std::size_t min_rows) {
  std::ifstream is(file);
  if (!is)
    throw Error("cannot open " + file.string());
  return read_path_csv(is, min_rows);
}

} // namespace oupop
