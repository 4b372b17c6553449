#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oupop {

/// Time grid with one real value per node. Used for Wiener paths, OU paths
/// and measured series. Immutable after construction.
class SamplePath {
public:
  SamplePath() = default;

  /// Throws InvalidGrid unless the grid is strictly increasing, the lengths
  /// match, and every value is finite.
  SamplePath(std::vector<double> grid, std::vector<double> values);

  std::span<const double> grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return grid_.size(); }
  bool empty() const { return grid_.empty(); }
  double front_time() const { return grid_.front(); }
  double back_time() const { return grid_.back(); }

  /// Linear interpolation between bracketing nodes, exact at nodes.
  /// Throws OutOfRange outside [grid.front(), grid.back()].
  double at(double t) const;

  /// Index k of the interval [grid[k], grid[k+1]] containing t (clamped to
  /// the last interval at the right end). Requires t inside the grid.
  std::size_t bracket(double t) const;

private:
  std::vector<double> grid_;
  std::vector<double> values_;
};

double evaluate_path(const SamplePath &path, double t);

/// Nodes 0, step, 2*step, ... with the final node placed exactly at horizon.
/// A last interval shorter than step/1e6 is merged into its predecessor.
std::vector<double> uniform_grid(double horizon, double step);

/// Throws InvalidGrid unless strictly increasing with at least one node.
void check_grid(std::span<const double> grid);

// CSV helpers. Doubles are written in shortest round-trip form.

std::string format_double(double v);

/// Writes a header line and one row per index; every column must have the
/// same length.
void write_csv(std::ostream &os, std::span<const std::string> header,
               std::span<const std::span<const double>> columns);
void write_csv(const std::filesystem::path &file,
               std::span<const std::string> header,
               std::span<const std::span<const double>> columns);

/// `t,value` export.
void write_path_csv(std::ostream &os, const SamplePath &path);
void write_path_csv(const std::filesystem::path &file, const SamplePath &path);

/// Parses `t,value` CSV. Rejects malformed rows and non-finite values with a
/// ParseError naming the line; a non-increasing time column raises
/// InvalidGrid. At least `min_rows` data rows are required.
SamplePath read_path_csv(std::istream &is, std::size_t min_rows = 3);
SamplePath load_series_csv(const std::filesystem::path &file,
                           std::size_t min_rows = 3);

} // namespace oupop
