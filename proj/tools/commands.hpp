#pragma once

#include "scenario.hpp"

#include <oupop/observe.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace oupop::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Returns the process exit status.
int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);

/// Runs a scenario and writes its CSV bundle into scenario.out_dir:
///   trajectory_seed<S>.csv, noise_seed<S>.csv (and noise_mu_seed<S>.csv for
///   independent LV noise), envelope.csv, absorption.csv.
/// Hand-typed envelopes in the scenario are rejected unless trust_envelope.
EnsembleResult run_simulation(const Scenario &scenario, bool trust_envelope,
                              std::ostream &log);

/// Synthetic logistic measurements p(t) for the observer commands.
struct MeasurementSetup {
  double r = 2.0;
  double p0 = 0.05;
  double horizon = 2.0;
  double step = 1e-3;
  double alpha = 0.0; ///< 0 gives the closed-form sigmoid
  OUParams ou{1.0, 0.4};
  std::optional<Interval> band; ///< calibration target for r + alpha z
  RngSeed seed{42};
};

struct Measurements {
  SamplePath p;
  std::optional<SamplePath> rate; ///< r + alpha z on the measurement grid
  EnvelopeBounds envelope;        ///< observed range of the rate
};

Measurements generate_measurements(const MeasurementSetup &setup);

enum class ObserverKind { Direct, Luenberger, HighGain };

struct ObserverSetup {
  ObserverKind kind = ObserverKind::HighGain;
  LuenbergerConfig luenberger;
  HighGainConfig highgain;
  double r0 = 0.0;
  ObserverOptions options;
};

ObserverRun run_observer(const ObserverSetup &setup, const SamplePath &p);

void write_observer_csv(const std::filesystem::path &file,
                        const ObserverRun &run);

} // namespace oupop::cli
