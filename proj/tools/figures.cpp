#include "figures.hpp"

#include <oupop/errors.hpp>

#include <fstream>
#include <ostream>

namespace fs = std::filesystem;

namespace oupop::cli {

namespace {

constexpr std::size_t kFigureSeeds = 5;

Scenario base(ModelSpec model, State x0, double horizon, std::uint64_t seed_base) {
  Scenario s;
  s.model = std::move(model);
  s.x0 = x0;
  s.horizon = horizon;
  s.seed_count = kFigureSeeds;
  s.seed_base = seed_base;
  return s;
}

Scenario logistic_k(double alpha, double beta, double gamma, double x0,
                    std::uint64_t seed_base) {
  return base(LogisticKSpec{3.0, alpha, {beta, gamma}}, {x0, 0.0}, 10.0, seed_base);
}

Scenario logistic_r(double beta, double x0, std::uint64_t seed_base) {
  return base(LogisticRSpec{2.0, 1.5, 2.0, {beta, 0.4}}, {x0, 0.0}, 10.0, seed_base);
}

Scenario lotka_volterra(double lambda, double mu, double a, double b, double c,
                        double e, State x0, std::uint64_t seed_base) {
  LVSpec m;
  m.lambda = lambda;
  m.mu = mu;
  m.a = a;
  m.b = b;
  m.c = c;
  m.e = e;
  m.alpha = 2.0;
  m.ou = {1.0, 0.5};
  return base(m, x0, 10.0, seed_base);
}

ObserverFigure observer_figure(ObserverKind kind, double alpha, double horizon,
                               std::uint64_t seed_base) {
  ObserverFigure f;
  f.data.r = 2.0;
  f.data.p0 = 0.05;
  f.data.horizon = horizon;
  f.data.alpha = alpha;
  f.data.ou = {1.0, 0.4};
  if (alpha > 0.0)
    f.data.band = Interval{1.0, 3.0};
  f.data.seed = RngSeed{seed_base};
  f.observer.kind = kind;
  f.observer.highgain.theta = 15.0;
  f.observer.luenberger = {-5.0, -1.0};
  f.observer.r0 = 0.0;
  return f;
}

} // namespace

std::vector<Figure> figure_manifest(std::uint64_t sb) {
  std::vector<Figure> m;
  m.push_back({"logistic-k-1", "perturbed carrying capacity, x0 = 2.4",
               {{"top", logistic_k(2.0, 1.0, 0.1, 2.4, sb)},
                {"bottom", logistic_k(2.2, 10.0, 0.2, 2.4, sb)}}});
  m.push_back({"logistic-k-2", "perturbed carrying capacity, x0 = 0.2",
               {{"top", logistic_k(2.0, 1.0, 0.4, 0.2, sb)},
                {"bottom", logistic_k(2.2, 10.0, 0.4, 0.2, sb)}}});
  m.push_back({"logistic-k-3", "perturbed carrying capacity, x0 = 3",
               {{"top", logistic_k(2.0, 1.0, 0.1, 3.0, sb)},
                {"bottom", logistic_k(2.2, 10.0, 0.2, 3.0, sb)}}});
  m.push_back({"logistic-r-1", "perturbed growth rate, beta = 1",
               {{"x0_0.8", logistic_r(1.0, 0.8, sb)},
                {"x0_1.5", logistic_r(1.0, 1.5, sb)},
                {"x0_0.2", logistic_r(1.0, 0.2, sb)}}});
  m.push_back({"logistic-r-2", "perturbed growth rate, beta = 10",
               {{"x0_0.8", logistic_r(10.0, 0.8, sb)},
                {"x0_1.5", logistic_r(10.0, 1.5, sb)},
                {"x0_0.2", logistic_r(10.0, 0.2, sb)}}});
  m.push_back({"lv-1", "competitive Lotka-Volterra, a=20 b=4 c=1 e=30",
               {{"phase", lotka_volterra(25.0, 22.0, 20.0, 4.0, 1.0, 30.0,
                                         {3.2, 1.2}, sb)}}});
  m.push_back({"lv-2", "competitive Lotka-Volterra, a=20 b=2 c=4 e=314",
               {{"phase", lotka_volterra(5.0, 7.0, 20.0, 2.0, 4.0, 314.0,
                                         {4.0, 3.0}, sb)}}});
  m.push_back({"estimator", "direct estimator of r under a perturbed rate",
               {{"direct", observer_figure(ObserverKind::Direct, 2.0, 5.0, sb)}}});
  m.push_back({"observer-det", "high-gain observer, theta = 15, T = 2, no noise",
               {{"highgain", observer_figure(ObserverKind::HighGain, 0.0, 2.0, sb)}}});
  m.push_back({"observer-noise", "high-gain observer, theta = 15, T = 2, perturbed r",
               {{"highgain", observer_figure(ObserverKind::HighGain, 2.0, 2.0, sb)}}});
  m.push_back({"luenberger", "Luenberger observer, gamma_p = -5, gamma_r = -1",
               {{"luenberger", observer_figure(ObserverKind::Luenberger, 0.0, 5.0, sb)}}});
  return m;
}

std::vector<std::string> figure_ids() {
  std::vector<std::string> ids;
  for (const auto &f : figure_manifest(42))
    ids.push_back(f.id);
  return ids;
}

void emit_figure(const Figure &figure, const fs::path &dir,
                 std::optional<double> step, std::ostream &log) {
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "manifest.txt", std::ios::binary);
    os << "manifest_version = " << kFigureManifestVersion << '\n'
       << "figure = " << figure.id << '\n'
       << "title = " << figure.title << '\n';
  }
  for (const auto &panel : figure.panels) {
    const fs::path pdir = dir / panel.name;
    fs::create_directories(pdir);
    if (const auto *sc = std::get_if<Scenario>(&panel.job)) {
      Scenario s = *sc;
      s.out_dir = pdir;
      if (step)
        s.step = *step;
      {
        std::ofstream os(pdir / "scenario.txt", std::ios::binary);
        os << format_scenario(s);
      }
      log << figure.id << "/" << panel.name << ": ";
      run_simulation(s, false, log);
      continue;
    }
    ObserverFigure f = std::get<ObserverFigure>(panel.job);
    if (step) {
      f.data.step = *step;
      f.observer.options.step = *step;
    } else {
      f.observer.options.step = f.data.step;
    }
    const Measurements data = generate_measurements(f.data);
    const ObserverRun run = run_observer(f.observer, data.p);
    write_observer_csv(pdir / "observer.csv", run);
    write_path_csv(pdir / "measured.csv", data.p);
    if (data.rate)
      write_path_csv(pdir / "rate.csv", *data.rate);
    {
      std::ofstream os(pdir / "bounds.csv", std::ios::binary);
      os << "r_lower,r,r_upper\n";
      const double lo = f.data.band ? f.data.band->lower : f.data.r;
      const double hi = f.data.band ? f.data.band->upper : f.data.r;
      os << format_double(lo) << ',' << format_double(f.data.r) << ','
         << format_double(hi) << '\n';
    }
    log << figure.id << "/" << panel.name << ": final r_hat = "
        << format_double(run.r_hat.back()) << '\n';
  }
}

} // namespace oupop::cli
