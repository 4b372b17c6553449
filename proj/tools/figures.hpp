#pragma once

#include "commands.hpp"
#include "scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace oupop::cli {

// Parameter sets of the reproducible figure bundles. Bump the version when
// any entry changes so old bundles can be told apart.
inline constexpr std::string_view kFigureManifestVersion = "1";

struct ObserverFigure {
  MeasurementSetup data;
  ObserverSetup observer;
};

struct FigurePanel {
  std::string name;
  std::variant<Scenario, ObserverFigure> job;
};

struct Figure {
  std::string id;
  std::string title;
  std::vector<FigurePanel> panels;
};

/// All documented figures; seeds derive from seed_base.
std::vector<Figure> figure_manifest(std::uint64_t seed_base);

std::vector<std::string> figure_ids();

/// Writes <dir>/<panel>/... for every panel plus <dir>/manifest.txt.
/// `step` overrides the integration/observer step of every panel.
void emit_figure(const Figure &figure, const std::filesystem::path &dir,
                 std::optional<double> step, std::ostream &log);

} // namespace oupop::cli
