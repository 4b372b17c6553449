#include "commands.hpp"
#include "figures.hpp"

#include <oupop/errors.hpp>
#include <oupop/fit.hpp>
#include <oupop/models.hpp>
#include <oupop/noise.hpp>
#include <oupop/solve.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace oupop::cli {

namespace {

std::string seed_tag(RngSeed s) { return std::to_string(s.value); }

std::string fmt_entry(const AbsorptionReport &rep) {
  return rep.entry_time ? format_double(*rep.entry_time) : std::string("none");
}

std::ofstream open_out(const fs::path &file) {
  std::ofstream os(file, std::ios::binary);
  if (!os)
    throw Error("cannot open " + file.string() + " for writing");
  return os;
}

void write_absorption(const fs::path &file, const Scenario &sc,
                      const EnsembleResult &res, std::ostream &log) {
  auto os = open_out(file);
  const bool lv = std::holds_alternative<LVSpec>(sc.model);
  if (lv)
    os << "seed,beta,lambda_lower,lambda_upper,mu_lower,mu_upper,"
          "persist_first,persist_second,box_x_lower,box_x_upper,box_y_lower,"
          "box_y_upper,entry_time,stayed\n";
  else
    os << "seed,beta,envelope_lower,envelope_upper,region_lower,region_upper,"
          "entry_time,stayed\n";

  std::size_t entered = 0;
  for (std::size_t i = 0; i < res.trajectories.size(); ++i) {
    const Realization &real = res.realizations[i];
    const Trajectory &tr = res.trajectories[i];
    EnvelopeBounds env = sc.envelope.value_or(real.envelope);
    os << seed_tag(real.seed) << ',' << format_double(real.beta) << ',';
    AbsorptionReport rep;
    if (const auto *k = std::get_if<LogisticKSpec>(&sc.model)) {
      (void)k;
      rep = absorption_report(tr, logistic_k_attracting_interval(env, 0.0), sc.eps);
    } else if (const auto *r = std::get_if<LogisticRSpec>(&sc.model)) {
      rep = absorption_report(tr, Interval{r->c, r->c}, sc.eps);
    } else {
      const auto &m = std::get<LVSpec>(sc.model);
      const EnvelopeBounds env_mu = sc.envelope_mu.value_or(*real.envelope_mu);
      const auto cond = lv_persistence_conditions(env, env_mu, m);
      rep = absorption_report(tr, lv_attracting_box(env, env_mu, m, 0.0), sc.eps);
      const auto &box = std::get<Box2D>(rep.region);
      os << format_double(env.lower) << ',' << format_double(env.upper) << ','
         << format_double(env_mu.lower) << ',' << format_double(env_mu.upper)
         << ',' << cond.first_species << ',' << cond.second_species << ','
         << format_double(box.x.lower) << ',' << format_double(box.x.upper)
         << ',' << format_double(box.y.lower) << ','
         << format_double(box.y.upper) << ',' << fmt_entry(rep) << ','
         << rep.stayed << '\n';
      entered += rep.stayed;
      continue;
    }
    const auto &iv = std::get<Interval>(rep.region);
    os << format_double(env.lower) << ',' << format_double(env.upper) << ','
       << format_double(iv.lower) << ',' << format_double(iv.upper) << ','
       << fmt_entry(rep) << ',' << rep.stayed << '\n';
    entered += rep.stayed;
  }
  log << "absorbed: " << entered << "/" << res.trajectories.size()
      << " trajectories entered and stayed in the eps-inflated region\n";
}

} // namespace

EnsembleResult run_simulation(const Scenario &sc, bool trust_envelope,
                              std::ostream &log) {
  if ((sc.envelope || sc.envelope_mu) && !trust_envelope)
    throw ConfigError(sc.envelope ? "envelope_lower" : "envelope_mu_lower",
                      "hand-typed envelopes require --trust-envelope");
  if (sc.envelope || sc.envelope_mu)
    log << "warning: using hand-typed envelope(s) instead of calibrated ones\n";

  EnsembleResult res =
      ensemble(sc.model, sc.x0, sc.horizon, sc.step, sc.seeds(), sc.noise);

  fs::create_directories(sc.out_dir);
  for (std::size_t i = 0; i < res.trajectories.size(); ++i) {
    const Realization &real = res.realizations[i];
    const std::string tag = seed_tag(real.seed);
    write_trajectory_csv(sc.out_dir / ("trajectory_seed" + tag + ".csv"),
                         res.trajectories[i]);
    write_path_csv(sc.out_dir / ("noise_seed" + tag + ".csv"), real.noise);
    if (real.noise_mu)
      write_path_csv(sc.out_dir / ("noise_mu_seed" + tag + ".csv"),
                     *real.noise_mu);
  }
  write_envelope_csv(sc.out_dir / "envelope.csv", res);
  write_absorption(sc.out_dir / "absorption.csv", sc, res, log);
  log << "wrote " << res.trajectories.size() << " trajectories to "
      << sc.out_dir.string() << '\n';
  return res;
}

Measurements generate_measurements(const MeasurementSetup &setup) {
  const auto grid = uniform_grid(setup.horizon, setup.step);
  Measurements out;
  if (setup.alpha == 0.0) {
    out.p = logistic_measurements(setup.r, setup.p0, grid);
    out.envelope = {setup.r, setup.r};
    return out;
  }
  if (!(setup.p0 > 0.0 && setup.p0 < 1.0))
    throw ParameterError("p0 must be in (0, 1)");
  // dp/dt = (r + alpha z) p (1 - p) is the perturbed-rate logistic with c = 1.
  LogisticRSpec spec{setup.r, 1.0, setup.alpha, setup.ou};
  NoiseSetup noise;
  noise.target = setup.band;
  const Realization real = realize_noise(spec, noise, setup.horizon, setup.seed);
  const Trajectory tr =
      integrate(spec, State{setup.p0, 0.0}, setup.horizon, setup.step, real.noise);
  out.p = SamplePath(tr.grid, tr.x);
  std::vector<double> rate(tr.grid.size());
  for (std::size_t k = 0; k < rate.size(); ++k)
    rate[k] = setup.r + setup.alpha * real.noise.at(std::min(tr.grid[k], real.noise.back_time()));
  out.rate = SamplePath(tr.grid, std::move(rate));
  out.envelope = real.envelope;
  return out;
}

ObserverRun run_observer(const ObserverSetup &setup, const SamplePath &p) {
  switch (setup.kind) {
  case ObserverKind::Direct:
    return direct_run(p);
  case ObserverKind::Luenberger:
    return luenberger_run(setup.luenberger, p,
                          {p.values().front(), setup.r0}, setup.options);
  case ObserverKind::HighGain:
    return highgain_run(setup.highgain, p, highgain_init(p, setup.r0),
                        setup.options);
  }
  throw ParameterError("unknown observer kind");
}

void write_observer_csv(const fs::path &file, const ObserverRun &run) {
  const std::string header[] = {"t", "p", "p_hat", "r_hat", "innovation"};
  const std::span<const double> cols[] = {run.grid, run.measured, run.p_hat,
                                          run.r_hat, run.innovation};
  write_csv(file, header, cols);
}

// Command-line front end ----------------------------------------------------

namespace {

struct GlobalFlags {
  std::string out_dir;
  std::optional<std::uint64_t> seed_base;
  std::optional<double> step;
};

void require_config(bool ok, const std::string &field, const std::string &what) {
  if (!ok)
    throw ConfigError(field, what);
}

int cmd_simulate(const std::string &file, bool trust, const GlobalFlags &g,
                 std::ostream &out) {
  Scenario sc = scenario_from_key_values(load_key_values(file));
  if (!g.out_dir.empty())
    sc.out_dir = g.out_dir;
  if (g.seed_base)
    sc.seed_base = *g.seed_base;
  if (g.step) {
    require_config(*g.step > 0.0, "--step", "must be > 0");
    sc.step = *g.step;
  }
  run_simulation(sc, trust, out);
  return kExitOk;
}

struct CalibrateArgs {
  std::uint64_t seed = 42;
  double gamma = 0.1, alpha = 2.0, nominal = 3.0;
  double lower = 0.5, upper = 5.5, horizon = 25.0;
  double beta_start = 1.0, noise_step = 1e-2;
};

int cmd_calibrate(const CalibrateArgs &a, std::ostream &out) {
  CalibrationRequest req;
  req.seed = RngSeed{a.seed};
  req.gamma = a.gamma;
  req.alpha = a.alpha;
  req.nominal = a.nominal;
  req.lower = a.lower;
  req.upper = a.upper;
  req.horizon = a.horizon;
  req.grid_step = a.noise_step;
  req.beta_start = a.beta_start;
  require_config(a.gamma > 0.0, "--gamma", "must be > 0");
  require_config(a.alpha >= 0.0, "--alpha", "must be >= 0");
  require_config(a.lower < a.nominal && a.nominal < a.upper, "--lower",
                 "need lower < nominal < upper");
  require_config(a.horizon > 0.0, "--horizon", "must be > 0");
  require_config(a.beta_start > 0.0, "--beta-start", "must be > 0");
  require_config(a.noise_step > 0.0, "--noise-step", "must be > 0");
  try {
    const Calibration cal = calibrate_beta(req);
    const bool ok = a.alpha == 0.0 || recheck_calibration(req, cal.beta);
    out << "beta = " << format_double(cal.beta) << '\n'
        << "envelope_lower = " << format_double(cal.envelope.lower) << '\n'
        << "envelope_upper = " << format_double(cal.envelope.upper) << '\n'
        << "trials = " << cal.trials << '\n'
        << "verdict = " << (ok ? "PASS" : "FAIL") << '\n';
    return ok ? kExitOk : kExitRuntime;
  } catch (const CalibrationFailure &e) {
    out << "verdict = FAIL\n"
        << "tightest_envelope_lower = " << format_double(e.tightest_lower()) << '\n'
        << "tightest_envelope_upper = " << format_double(e.tightest_upper()) << '\n'
        << "last_beta = " << format_double(e.last_beta()) << '\n';
    throw;
  }
}

struct ObserveArgs {
  std::string data;
  std::string observer = "highgain";
  double theta = 15.0, gamma_p = -5.0, gamma_r = -1.0, r0 = 0.0;
  double r = 2.0, p0 = 0.05, horizon = 2.0;
  double alpha = 0.0, beta = 1.0, gamma = 0.4;
  std::optional<double> r_lower, r_upper;
  std::optional<std::uint64_t> seed;
};

int cmd_observe(const ObserveArgs &a, const GlobalFlags &g, std::ostream &out) {
  ObserverSetup setup;
  if (a.observer == "direct")
    setup.kind = ObserverKind::Direct;
  else if (a.observer == "luenberger")
    setup.kind = ObserverKind::Luenberger;
  else if (a.observer == "highgain")
    setup.kind = ObserverKind::HighGain;
  else
    throw ConfigError("--observer", "expected direct, luenberger or highgain");
  setup.highgain.theta = a.theta;
  setup.luenberger = {a.gamma_p, a.gamma_r};
  setup.r0 = a.r0;
  require_config(a.theta > 0.0, "--theta", "must be > 0");
  require_config(a.gamma_p < 0.0, "--gamma-p", "must be < 0");
  require_config(a.gamma_r < 0.0, "--gamma-r", "must be < 0");
  if (g.step) {
    require_config(*g.step > 0.0, "--step", "must be > 0");
    setup.options.step = *g.step;
  }

  SamplePath p;
  std::optional<SamplePath> rate;
  if (!a.data.empty()) {
    p = load_series_csv(a.data, 2);
  } else {
    MeasurementSetup ms;
    ms.r = a.r;
    ms.p0 = a.p0;
    ms.horizon = a.horizon;
    ms.step = setup.options.step;
    ms.alpha = a.alpha;
    ms.ou = {a.beta, a.gamma};
    ms.seed = RngSeed{a.seed.value_or(g.seed_base.value_or(42))};
    require_config(a.horizon > 0.0, "--horizon", "must be > 0");
    require_config(a.alpha >= 0.0, "--alpha", "must be >= 0");
    require_config(a.beta > 0.0 && a.gamma > 0.0, "--beta", "OU beta and gamma must be > 0");
    if (a.r_lower || a.r_upper) {
      require_config(a.r_lower && a.r_upper, "--r-lower", "band needs --r-lower and --r-upper");
      require_config(*a.r_lower < a.r && a.r < *a.r_upper, "--r-lower",
                     "band must contain r");
      ms.band = Interval{*a.r_lower, *a.r_upper};
    }
    Measurements m = generate_measurements(ms);
    p = std::move(m.p);
    rate = std::move(m.rate);
  }

  const ObserverRun run = run_observer(setup, p);
  const fs::path dir = g.out_dir.empty() ? fs::path("out") : fs::path(g.out_dir);
  fs::create_directories(dir);
  const fs::path file = dir / ("observe_" + a.observer + ".csv");
  write_observer_csv(file, run);
  if (rate)
    write_path_csv(dir / "observe_rate.csv", *rate);
  out << "observer = " << a.observer << '\n'
      << "rows = " << run.grid.size() << '\n'
      << "final_t = " << format_double(run.grid.back()) << '\n'
      << "final_r_hat = " << format_double(run.r_hat.back()) << '\n'
      << "final_innovation = " << format_double(run.innovation.back()) << '\n'
      << "csv = " << file.string() << '\n';
  return kExitOk;
}

int cmd_fit(const std::string &file, bool json, std::ostream &out) {
  const FittedOU fit = fit_ou(load_series_csv(file));
  out << (json ? format_fit_json(fit) + "\n" : format_fit_report(fit));
  return kExitOk;
}

int cmd_figures(const std::string &id, bool list, const GlobalFlags &g,
                std::ostream &out) {
  const auto manifest = figure_manifest(g.seed_base.value_or(42));
  if (list || id.empty()) {
    for (const auto &f : manifest)
      out << f.id << "  " << f.title << '\n';
    if (!list)
      throw ConfigError("figure-id", "missing figure id");
    return kExitOk;
  }
  auto it = std::find_if(manifest.begin(), manifest.end(),
                         [&](const Figure &f) { return f.id == id; });
  if (it == manifest.end()) {
    std::string valid;
    for (const auto &f : manifest)
      valid += (valid.empty() ? "" : ", ") + f.id;
    throw ConfigError("figure-id", "unknown figure '" + id + "'; valid ids: " + valid);
  }
  if (g.step)
    require_config(*g.step > 0.0, "--step", "must be > 0");
  const fs::path dir = (g.out_dir.empty() ? fs::path("figures") : fs::path(g.out_dir)) / id;
  emit_figure(*it, dir, g.step, out);
  return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err) {
  CLI::App app{"Population models driven by bounded Ornstein-Uhlenbeck noise"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags g;
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_option("--seed-base", g.seed_base, "Base seed; member k uses base + k");
  app.add_option("--step", g.step, "Integration / observer step");

  auto *sim = app.add_subcommand("simulate", "Run a scenario file");
  std::string scenario_file;
  bool trust = false;
  sim->add_option("scenario", scenario_file, "Scenario file")->required();
  sim->add_flag("--trust-envelope", trust,
                "Accept hand-typed envelope_* keys in the scenario");

  auto *cal = app.add_subcommand("calibrate", "Calibrate beta for a target interval");
  CalibrateArgs ca;
  cal->add_option("--seed", ca.seed);
  cal->add_option("--gamma", ca.gamma);
  cal->add_option("--alpha", ca.alpha);
  cal->add_option("--nominal", ca.nominal);
  cal->add_option("--lower", ca.lower, "b1 (exclusive)");
  cal->add_option("--upper", ca.upper, "b2 (exclusive)");
  cal->add_option("--horizon", ca.horizon);
  cal->add_option("--beta-start", ca.beta_start);
  cal->add_option("--noise-step", ca.noise_step);

  auto *obs = app.add_subcommand("observe", "Estimate r of the logistic model");
  ObserveArgs oa;
  obs->add_option("--data", oa.data, "CSV with header t,value of measured p");
  obs->add_option("--observer", oa.observer, "direct | luenberger | highgain");
  obs->add_option("--theta", oa.theta);
  obs->add_option("--gamma-p", oa.gamma_p);
  obs->add_option("--gamma-r", oa.gamma_r);
  obs->add_option("--r0", oa.r0, "Initial rate estimate");
  obs->add_option("--r", oa.r, "True rate for generated data");
  obs->add_option("--p0", oa.p0);
  obs->add_option("--horizon", oa.horizon);
  obs->add_option("--alpha", oa.alpha, "Noise amount on r (0: noiseless)");
  obs->add_option("--beta", oa.beta);
  obs->add_option("--gamma", oa.gamma);
  obs->add_option("--r-lower", oa.r_lower, "Calibration band for r + alpha z");
  obs->add_option("--r-upper", oa.r_upper);
  obs->add_option("--seed", oa.seed);

  auto *fit = app.add_subcommand("fit", "Fit OU parameters to a t,value series");
  std::string fit_file;
  bool json = false;
  fit->add_option("data", fit_file)->required();
  fit->add_flag("--json", json);

  auto *fig = app.add_subcommand("figures", "Emit a figure's data bundle");
  std::string fig_id;
  bool fig_list = false;
  fig->add_option("figure-id", fig_id);
  fig->add_flag("--list", fig_list);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*sim)
      return cmd_simulate(scenario_file, trust, g, out);
    if (*cal)
      return cmd_calibrate(ca, out);
    if (*obs)
      return cmd_observe(oa, g, out);
    if (*fit)
      return cmd_fit(fit_file, json, out);
    if (*fig)
      return cmd_figures(fig_id, fig_list, g, out);
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

} // namespace oupop::cli
