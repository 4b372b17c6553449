#include "scenario.hpp"

#include <oupop/errors.hpp>
#include <oupop/path.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

namespace oupop::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

} // namespace

KeyValues parse_key_values(std::istream &is) {
  KeyValues kv;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(is, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos)
      raw.erase(hash);
    const std::string row = trim(raw);
    if (row.empty())
      continue;
    const auto eq = row.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line), "expected 'key = value'");
    std::string key = trim(std::string_view(row).substr(0, eq));
    std::string value = trim(std::string_view(row).substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line), "empty key");
    if (!kv.emplace(key, value).second)
      throw ConfigError(key, "duplicate key");
  }
  return kv;
}

KeyValues load_key_values(const std::filesystem::path &file) {
  std::ifstream is(file);
  if (!is)
    throw ConfigError("scenario", "cannot open " + file.string());
  return parse_key_values(is);
}

std::vector<RngSeed> Scenario::seeds() const {
  std::vector<RngSeed> out;
  if (!seed_list.empty()) {
    for (auto s : seed_list)
      out.push_back(RngSeed{s});
    return out;
  }
  for (std::size_t k = 0; k < seed_count; ++k)
    out.push_back(derive_seed(seed_base, k));
  return out;
}

namespace {

class Reader {
public:
  explicit Reader(const KeyValues &kv) : kv_(kv) {}

  bool has(const std::string &key) const { return kv_.count(key) != 0; }

  const std::string &text(const std::string &key) {
    used_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end())
      throw ConfigError(key, "missing required key");
    return it->second;
  }

  double number(const std::string &key) {
    const std::string &v = text(key);
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
      throw ConfigError(key, "not a finite number: '" + v + "'");
    return out;
  }

  double number_or(const std::string &key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  double positive(const std::string &key) {
    const double v = number(key);
    if (!(v > 0.0))
      throw ConfigError(key, "must be > 0");
    return v;
  }

  double nonnegative(const std::string &key) {
    const double v = number(key);
    if (!(v >= 0.0))
      throw ConfigError(key, "must be >= 0");
    return v;
  }

  std::uint64_t unsigned_int(const std::string &key) {
    const std::string &v = text(key);
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
      throw ConfigError(key, "not a non-negative integer: '" + v + "'");
    return out;
  }

  std::optional<Interval> interval(const std::string &lo, const std::string &hi) {
    const bool a = has(lo), b = has(hi);
    if (!a && !b)
      return std::nullopt;
    if (a != b)
      throw ConfigError(a ? hi : lo, "missing required key (interval needs both ends)");
    Interval iv{number(lo), number(hi)};
    if (!(iv.lower < iv.upper))
      throw ConfigError(lo, "interval lower end must be below upper end");
    return iv;
  }

  std::optional<EnvelopeBounds> envelope(const std::string &lo,
                                         const std::string &hi) {
    auto iv = interval(lo, hi);
    if (!iv)
      return std::nullopt;
    return EnvelopeBounds{iv->lower, iv->upper};
  }

  void reject_unused() const {
    for (const auto &[key, value] : kv_)
      if (!used_.count(key))
        throw ConfigError(key, "unknown key");
  }

private:
  const KeyValues &kv_;
  std::set<std::string> used_;
};

OUParams read_ou(Reader &r) { return {r.positive("beta"), r.positive("gamma")}; }

void require_inside(const std::optional<Interval> &iv, double nominal,
                    const std::string &key) {
  if (iv && !(iv->lower < nominal && nominal < iv->upper))
    throw ConfigError(key, "target interval must contain the nominal value");
}

} // namespace

Scenario scenario_from_key_values(const KeyValues &kv) {
  Reader r(kv);
  Scenario s;
  const std::string model = r.text("model");

  if (model == "logistic-k") {
    LogisticKSpec m;
    m.a = r.positive("a");
    m.alpha = r.nonnegative("alpha");
    m.ou = read_ou(r);
    s.noise.target = r.interval("target_lower", "target_upper");
    require_inside(s.noise.target, m.a, "target_lower");
    s.model = m;
  } else if (model == "logistic-r") {
    LogisticRSpec m;
    m.r = r.positive("r");
    m.c = r.positive("c");
    m.alpha = r.nonnegative("alpha");
    m.ou = read_ou(r);
    s.noise.target = r.interval("target_lower", "target_upper");
    require_inside(s.noise.target, m.r, "target_lower");
    s.model = m;
  } else if (model == "lotka-volterra") {
    LVSpec m;
    m.lambda = r.positive("lambda");
    m.mu = r.positive("mu");
    m.a = r.positive("a");
    m.b = r.positive("b");
    m.c = r.positive("c");
    m.e = r.positive("e");
    m.alpha = r.nonnegative("alpha");
    m.ou = read_ou(r);
    if (r.has("noise")) {
      const std::string mode = r.text("noise");
      if (mode == "independent")
        m.independent_noise = true;
      else if (mode != "shared")
        throw ConfigError("noise", "expected 'shared' or 'independent'");
    }
    s.noise.target = r.interval("target_lambda_lower", "target_lambda_upper");
    s.noise.target_mu = r.interval("target_mu_lower", "target_mu_upper");
    require_inside(s.noise.target, m.lambda, "target_lambda_lower");
    require_inside(s.noise.target_mu, m.mu, "target_mu_lower");
    s.x0.y = r.nonnegative("y0");
    s.envelope_mu = r.envelope("envelope_mu_lower", "envelope_mu_upper");
    s.model = m;
  } else {
    throw ConfigError("model", "expected logistic-k, logistic-r or lotka-volterra, got '" + model + "'");
  }

  s.x0.x = r.nonnegative("x0");
  s.horizon = r.positive("horizon");
  if (r.has("step"))
    s.step = r.positive("step");
  if (r.has("noise_step"))
    s.noise.grid_step = r.positive("noise_step");
  if (r.has("eps"))
    s.eps = r.nonnegative("eps");
  if (r.has("seed_base"))
    s.seed_base = r.unsigned_int("seed_base");
  if (r.has("seeds")) {
    s.seed_count = r.unsigned_int("seeds");
    if (s.seed_count == 0)
      throw ConfigError("seeds", "must be at least 1");
  }
  if (r.has("seed_list")) {
    std::stringstream ss(r.text("seed_list"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      std::uint64_t v = 0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
        throw ConfigError("seed_list", "not a non-negative integer: '" + item + "'");
      s.seed_list.push_back(v);
    }
    if (s.seed_list.empty())
      throw ConfigError("seed_list", "must list at least one seed");
  }
  if (r.has("out_dir"))
    s.out_dir = r.text("out_dir");
  s.envelope = r.envelope("envelope_lower", "envelope_upper");
  r.reject_unused();
  return s;
}

std::string format_scenario(const Scenario &s) {
  std::ostringstream os;
  auto put = [&os](const char *key, double v) {
    os << key << " = " << format_double(v) << '\n';
  };
  auto put_interval = [&](const char *lo, const char *hi,
                          const std::optional<Interval> &iv) {
    if (iv) {
      put(lo, iv->lower);
      put(hi, iv->upper);
    }
  };
  os << "model = " << model_name(s.model) << '\n';
  if (const auto *k = std::get_if<LogisticKSpec>(&s.model)) {
    put("a", k->a);
    put("alpha", k->alpha);
    put("beta", k->ou.beta);
    put("gamma", k->ou.gamma);
    put_interval("target_lower", "target_upper", s.noise.target);
  } else if (const auto *r = std::get_if<LogisticRSpec>(&s.model)) {
    put("r", r->r);
    put("c", r->c);
    put("alpha", r->alpha);
    put("beta", r->ou.beta);
    put("gamma", r->ou.gamma);
    put_interval("target_lower", "target_upper", s.noise.target);
  } else {
    const auto &m = std::get<LVSpec>(s.model);
    put("lambda", m.lambda);
    put("mu", m.mu);
    put("a", m.a);
    put("b", m.b);
    put("c", m.c);
    put("e", m.e);
    put("alpha", m.alpha);
    put("beta", m.ou.beta);
    put("gamma", m.ou.gamma);
    os << "noise = " << (m.independent_noise ? "independent" : "shared") << '\n';
    put_interval("target_lambda_lower", "target_lambda_upper", s.noise.target);
    put_interval("target_mu_lower", "target_mu_upper", s.noise.target_mu);
    put("y0", s.x0.y);
  }
  put("x0", s.x0.x);
  put("horizon", s.horizon);
  put("step", s.step);
  put("noise_step", s.noise.grid_step);
  put("eps", s.eps);
  if (s.seed_list.empty()) {
    os << "seeds = " << s.seed_count << '\n';
    os << "seed_base = " << s.seed_base << '\n';
  } else {
    os << "seed_list = ";
    for (std::size_t i = 0; i < s.seed_list.size(); ++i)
      os << (i ? ", " : "") << s.seed_list[i];
    os << '\n';
  }
  return os.str();
}

} // namespace oupop::cli
