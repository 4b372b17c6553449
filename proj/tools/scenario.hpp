#pragma once

#include <oupop/models.hpp>
#include <oupop/noise.hpp>
#include <oupop/solve.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oupop::cli {

/// Flat `key = value` text. `#` starts a comment; blank lines are ignored.
/// Duplicate keys and lines without `=` are configuration errors.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream &is);
KeyValues load_key_values(const std::filesystem::path &file);

struct Scenario {
  ModelSpec model;
  State x0;
  double horizon = 10.0;
  double step = kDefaultStep;
  double eps = 1e-2;
  NoiseSetup noise;
  std::size_t seed_count = 1;
  std::vector<std::uint64_t> seed_list; ///< explicit seeds; overrides count
  std::uint64_t seed_base = 42;
  std::filesystem::path out_dir = "out";
  /// Hand-typed envelopes; only honoured with --trust-envelope.
  std::optional<EnvelopeBounds> envelope;
  std::optional<EnvelopeBounds> envelope_mu;

  /// seed_list if given, otherwise seed_base + k for k < seed_count.
  std::vector<RngSeed> seeds() const;
};

/// Validates and converts a key-value map. Every problem is reported as a
/// ConfigError naming the key.
Scenario scenario_from_key_values(const KeyValues &kv);

/// Canonical key-value form of a scenario (inverse of
/// scenario_from_key_values for the keys it understands).
std::string format_scenario(const Scenario &s);

} // namespace oupop::cli
