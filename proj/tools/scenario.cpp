#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <thread>

#include "hydronls/constructor.hpp"
#include "hydronls/diagnostics.hpp"
#include "hydronls/field_io.hpp"
#include "hydronls/profile.hpp"
#include "hydronls/text_io.hpp"
#include "hydronls/timeflow.hpp"
#include "svg.hpp"

namespace hydronls::cli {

using nlohmann::json;

namespace {

// ---- schema helpers ----

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

std::string at(const std::string& where, const char* key) { return where + "." + key; }

double number(const json& j, const std::string& where, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(at(where, key) + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(at(where, key) + ": must be finite");
  return d;
}

double required_number(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) throw ConfigError(at(where, key) + ": required");
  return number(j, where, key, 0.0);
}

std::optional<double> optional_number(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return number(j, where, key, 0.0);
}

int integer(const json& j, const std::string& where, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(at(where, key) + ": expected an integer");
  const auto i = v.get<long long>();
  if (i < -1000000000LL || i > 1000000000LL) throw ConfigError(at(where, key) + ": out of range");
  return static_cast<int>(i);
}

bool boolean(const json& j, const std::string& where, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw ConfigError(at(where, key) + ": expected true or false");
  return j.at(key).get<bool>();
}

std::string choice(const json& j, const std::string& where, const char* key, std::string fallback,
                   std::initializer_list<const char*> options) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError(at(where, key) + ": expected a string");
  const auto s = j.at(key).get<std::string>();
  if (options.size() != 0 &&
      std::none_of(options.begin(), options.end(), [&](const char* o) { return s == o; })) {
    std::string list;
    for (const char* o : options) list += std::string(list.empty() ? "" : ", ") + o;
    throw ConfigError(at(where, key) + ": '" + s + "' is not one of {" + list + "}");
  }
  return s;
}

std::vector<double> vector(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) return {};
  const auto& v = j.at(key);
  if (!v.is_array()) throw ConfigError(at(where, key) + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number() || !std::isfinite(e.get<double>())) {
      throw ConfigError(at(where, key) + ": expected finite numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

void check_dims(const std::vector<double>& v, int n, const std::string& name) {
  require(v.empty() || static_cast<int>(v.size()) == n,
          name + ": expected " + std::to_string(n) + " entries");
}

// ---- block parsers ----

ProfileConfig parse_profile(const json& j) {
  const std::string w = "profile";
  if (!j.is_object()) throw ConfigError(w + ": expected an object");
  ProfileConfig p;
  p.kind = choice(j, w, "kind", p.kind, {"ground_state", "dirichlet", "stark"});
  if (p.kind == "ground_state") {
    check_keys(j, w, {"kind", "n", "tol", "node_spacing", "max_radius"});
  } else if (p.kind == "dirichlet") {
    check_keys(j, w, {"kind", "n", "k", "gamma0", "radius", "tol", "node_spacing", "scan_start"});
  } else {
    check_keys(j, w, {"kind", "n", "k1", "gamma0", "radius", "tol", "node_spacing", "scan_start"});
  }
  p.n = integer(j, w, "n", 1);
  p.k = number(j, w, "k", 0.0);
  p.gamma0 = number(j, w, "gamma0", 1.0);
  p.k1 = number(j, w, "k1", 0.0);
  p.radius = number(j, w, "radius", 0.0);
  p.tol = number(j, w, "tol", p.tol);
  p.node_spacing = optional_number(j, w, "node_spacing");
  p.max_radius = optional_number(j, w, "max_radius");
  p.scan_start = optional_number(j, w, "scan_start");
  require(p.n >= 1 && p.n <= 3, "profile.n: must be 1, 2 or 3");
  require(p.kind != "stark" || p.n == 1, "profile.n: stark profiles are one-dimensional");
  require(p.kind == "ground_state" || p.radius > 0.0, "profile.radius: required and positive");
  require(p.tol > 0.0, "profile.tol: must be positive");
  require(!p.node_spacing || *p.node_spacing > 0.0, "profile.node_spacing: must be positive");
  require(!p.max_radius || *p.max_radius > 0.0, "profile.max_radius: must be positive");
  require(!p.scan_start || *p.scan_start > 0.0, "profile.scan_start: must be positive");
  return p;
}

GridConfig parse_grid(const json& j) {
  check_keys(j, "grid", {"points", "half_width"});
  GridConfig g;
  g.points = integer(j, "grid", "points", g.points);
  g.half_width = number(j, "grid", "half_width", g.half_width);
  require(g.points >= 8 && (g.points & (g.points - 1)) == 0,
          "grid.points: must be a power of two, at least 8");
  require(g.half_width > 0.0, "grid.half_width: must be positive");
  return g;
}

SolutionConfig parse_solution(const json& j) {
  const std::string w = "solution";
  check_keys(j, w, {"mode", "a0", "b0", "x0", "lambda", "theta", "gamma1", "virial", "virial_zero_tol"});
  SolutionConfig s;
  s.mode = choice(j, w, "mode", s.mode, {"auto", "profile", "general"});
  s.a0 = number(j, w, "a0", 0.0);
  s.b0 = number(j, w, "b0", 0.0);
  s.x0 = vector(j, w, "x0");
  s.lambda = vector(j, w, "lambda");
  s.theta = number(j, w, "theta", 0.0);
  s.gamma1 = number(j, w, "gamma1", 0.0);
  s.virial = boolean(j, w, "virial", false);
  s.virial_zero_tol = number(j, w, "virial_zero_tol", s.virial_zero_tol);
  require(s.virial_zero_tol >= 0.0, "solution.virial_zero_tol: must be non-negative");
  return s;
}

VirialConfig parse_virial(const json& j) {
  const std::string w = "virial";
  check_keys(j, w, {"H", "M0", "M0p", "N", "n"});
  VirialConfig v;
  v.H = required_number(j, w, "H");
  v.M0 = required_number(j, w, "M0");
  v.M0p = required_number(j, w, "M0p");
  v.N = number(j, w, "N", 1.0);
  v.n = integer(j, w, "n", 1);
  require(v.M0 > 0.0, "virial.M0: must be positive");
  require(v.N > 0.0, "virial.N: must be positive");
  require(v.n >= 1 && v.n <= 3, "virial.n: must be 1, 2 or 3");
  return v;
}

EvolveConfig parse_evolve(const json& j) {
  const std::string w = "evolve";
  check_keys(j, w, {"dt", "t_end", "sigma", "snapshot_times", "containment_threshold", "amp_ceiling",
                    "nonlinear", "scheme"});
  EvolveConfig e;
  e.dt = required_number(j, w, "dt");
  e.t_end = required_number(j, w, "t_end");
  e.sigma = optional_number(j, w, "sigma");
  e.snapshot_times = vector(j, w, "snapshot_times");
  e.containment_threshold = number(j, w, "containment_threshold", e.containment_threshold);
  e.amp_ceiling = number(j, w, "amp_ceiling", e.amp_ceiling);
  e.nonlinear = boolean(j, w, "nonlinear", true);
  e.scheme = choice(j, w, "scheme", "strang", {"strang", "yoshida4"}) == "strang"
                 ? SplittingScheme::strang
                 : SplittingScheme::yoshida4;
  require(e.dt > 0.0, "evolve.dt: must be positive");
  require(e.t_end >= 0.0, "evolve.t_end: must be non-negative");
  require(!e.sigma || *e.sigma > 0.0, "evolve.sigma: must be positive");
  require(e.containment_threshold > 0.0, "evolve.containment_threshold: must be positive");
  require(e.amp_ceiling > 0.0, "evolve.amp_ceiling: must be positive");
  require(std::is_sorted(e.snapshot_times.begin(), e.snapshot_times.end()),
          "evolve.snapshot_times: must be sorted");
  for (double t : e.snapshot_times) {
    require(t >= 0.0 && t <= e.t_end, "evolve.snapshot_times: must lie in [0, t_end]");
  }
  return e;
}

InitialConfig parse_initial(const json& j) {
  const std::string w = "initial";
  if (!j.is_object()) throw ConfigError(w + ": expected an object");
  InitialConfig i;
  i.source = choice(j, w, "source", i.source, {"solution", "gaussian", "wfield"});
  if (i.source == "solution") {
    check_keys(j, w, {"source"});
  } else if (i.source == "gaussian") {
    check_keys(j, w, {"source", "amplitude", "width", "chirp", "center", "kick"});
  } else {
    check_keys(j, w, {"source", "path"});
  }
  i.amplitude = number(j, w, "amplitude", 1.0);
  i.width = number(j, w, "width", 1.0);
  i.chirp = number(j, w, "chirp", 0.0);
  i.center = vector(j, w, "center");
  i.kick = vector(j, w, "kick");
  i.path = choice(j, w, "path", "", {});
  require(i.width > 0.0, "initial.width: must be positive");
  require(i.source != "wfield" || !i.path.empty(), "initial.path: required for source 'wfield'");
  return i;
}

VerifyConfig parse_verify(const json& j) {
  const std::string w = "verify";
  check_keys(j, w, {"l2_tolerance", "mass_tolerance", "rate_fit", "rate_grid"});
  VerifyConfig v;
  v.l2_tolerance = number(j, w, "l2_tolerance", v.l2_tolerance);
  v.mass_tolerance = number(j, w, "mass_tolerance", v.mass_tolerance);
  v.rate_fit = boolean(j, w, "rate_fit", false);
  if (j.contains("rate_grid")) v.rate_grid = parse_grid(j.at("rate_grid"));
  require(v.l2_tolerance > 0.0 && v.mass_tolerance > 0.0, "verify: tolerances must be positive");
  return v;
}

SweepConfig parse_sweep(const json& j) {
  const std::string w = "sweep";
  check_keys(j, w, {"H", "M0", "M0p", "n", "random"});
  SweepConfig s;
  s.H = vector(j, w, "H");
  s.M0 = vector(j, w, "M0");
  s.M0p = vector(j, w, "M0p");
  s.n = integer(j, w, "n", 1);
  require(s.n >= 1 && s.n <= 3, "sweep.n: must be 1, 2 or 3");
  require(s.H.empty() == s.M0.empty() && s.H.empty() == s.M0p.empty(),
          "sweep: H, M0 and M0p must be given together");
  for (double m : s.M0) require(m > 0.0, "sweep.M0: values must be positive");
  if (j.contains("random")) {
    const auto& r = j.at("random");
    const std::string rw = "sweep.random";
    check_keys(r, rw, {"count", "H", "M0", "M0p"});
    s.random_count = integer(r, rw, "count", 0);
    s.H_range = vector(r, rw, "H");
    s.M0_range = vector(r, rw, "M0");
    s.M0p_range = vector(r, rw, "M0p");
    require(s.random_count >= 0, "sweep.random.count: must be non-negative");
    for (const auto* range : {&s.H_range, &s.M0_range, &s.M0p_range}) {
      require(range->size() == 2 && (*range)[0] <= (*range)[1],
              "sweep.random: ranges must be [lo, hi] pairs");
    }
    require(s.M0_range[0] > 0.0, "sweep.random.M0: range must be positive");
  }
  require(!s.H.empty() || s.random_count > 0, "sweep: no triples to evaluate");
  return s;
}

// ---- building blocks ----

class Logger {
 public:
  explicit Logger(const RunOptions& opt) : os_(opt.verbose ? opt.log : nullptr) {}
  void operator()(const std::string& msg) const {
    if (os_) *os_ << "[hydronls] " << msg << '\n';
  }

 private:
  std::ostream* os_;
};

RadialProfile make_profile(const ProfileConfig& p) {
  ProfileOptions opt;
  if (p.node_spacing) opt.node_spacing = *p.node_spacing;
  if (p.max_radius) opt.max_radius = *p.max_radius;
  opt.scan_start = p.scan_start;
  if (p.kind == "ground_state") return ground_state(p.n, p.tol, opt);
  if (p.kind == "dirichlet") return dirichlet_profile(p.n, p.k, p.gamma0, p.radius, p.tol, opt);
  return stark_profile_1d(p.k1, p.gamma0, p.radius, p.tol, opt);
}

SolutionSpec make_spec(const RadialProfile& profile, const SolutionConfig& s) {
  const auto& p = profile.params();
  const int n = p.n;
  check_dims(s.x0, n, "solution.x0");
  check_dims(s.lambda, n, "solution.lambda");
  std::string mode = s.mode;
  if (mode == "auto") mode = p.mode == PotentialMode::linear ? "general" : "profile";
  std::optional<TimeFlow> flow;
  if (mode == "profile") {
    require(s.b0 == 0.0 && s.lambda.empty(), "solution: b0 and lambda apply to general flows only");
    require(p.mode == PotentialMode::quadratic, "solution.mode: profile flows need a quadratic profile");
    flow = TimeFlow::profile(s.a0, p.k, p.gamma0, n);
  } else {
    std::vector<double> lambda = s.lambda;
    if (lambda.empty()) lambda.assign(p.lambda_dir.begin(), p.lambda_dir.begin() + n);
    const double k1 = p.mode == PotentialMode::linear ? p.k1 : 0.0;
    flow = general_timeflow(s.a0, s.b0, k1, p.gamma0, lambda);
  }
  SolutionSpec spec{profile, *flow, std::nullopt, s.x0, s.theta, s.gamma1};
  spec.validate();
  return spec;
}

Grid make_grid_for(const GridConfig& g, int n) { return make_grid(n, g.points, g.half_width); }

std::string indexed(const char* stem, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu%s", stem, i, ext);
  return buf;
}

double ground_state_norm(int n, const std::optional<RadialProfile>& maybe_ground) {
  if (maybe_ground && maybe_ground->kind() == ProfileKind::ground_state) {
    return std::sqrt(profile_norms(*maybe_ground).mass);
  }
  return std::sqrt(profile_norms(ground_state(n, 1e-10)).mass);
}

json report_entry(double t, const FunctionalReport& r, const std::vector<double>& lambda, double gs_norm) {
  json e{{"t", t}, {"functionals", to_json(r)},
         {"mass_threshold", to_string(mass_threshold_check(r, gs_norm))}};
  if (!lambda.empty()) e["hoelder"] = hoelder_check(r, lambda);
  return e;
}

json base_summary(const std::string& command, const ScenarioConfig& cfg) {
  return {{"command", command}, {"schema", kSchema}, {"seed", cfg.seed}};
}

void finish(const RunOptions& opt, json& summary, std::vector<std::string> outputs) {
  outputs.push_back("summary.json");
  summary["outputs"] = outputs;
  write_json(opt.out_dir / "summary.json", summary);
}

// ---- commands ----

RunResult run_profile(const ScenarioConfig& cfg, const RunOptions& opt, const Logger& log) {
  log("solving " + cfg.profile->kind + " profile");
  const RadialProfile profile = make_profile(*cfg.profile);
  write_profile(opt.out_dir / "profile.csv", profile);
  Series s{"u", {}};
  for (std::size_t i = 0; i < profile.nodes().size(); i += std::max<std::size_t>(1, profile.nodes().size() / 1000)) {
    s.points.emplace_back(profile.nodes()[i], profile.values()[i]);
  }
  write_svg_plot(opt.out_dir / "profile.svg", "profile", profile.is_radial() ? "r" : "x", "u", {s});
  const auto norms = profile_norms(profile);
  json summary = base_summary("profile", cfg);
  summary["profile"] = {{"u_center", profile.u_center()},
                        {"peak", profile.peak()},
                        {"residual", profile_residual(profile)},
                        {"mass", norms.mass},
                        {"grad_sq", norms.grad_sq},
                        {"power", norms.power},
                        {"second_moment", norms.second_moment},
                        {"energy", norms.energy}};
  finish(opt, summary, {"profile.csv", "profile.json", "profile.svg"});
  return {ok, summary};
}

RunResult run_classify(const ScenarioConfig& cfg, const RunOptions& opt, const Logger& log) {
  const auto& v = *cfg.virial;
  const auto vc = virial_coefficients(v.H, v.M0, v.M0p, v.N);
  const auto report = classify_blowup(vc, v.n);
  log("regime " + to_string(report.regime));
  write_json(opt.out_dir / "blowup.json", to_json(report));
  const double horizon = report.T ? *report.T : 10.0;
  Series m{"M(t)", {}};
  for (int i = 0; i <= 200; ++i) {
    const double t = horizon * i / 200.0;
    m.points.emplace_back(t, vc.M(t));
  }
  write_svg_plot(opt.out_dir / "virial.svg", "second moment", "t", "M", {m});
  json summary = base_summary("classify", cfg);
  summary["blowup"] = to_json(report);
  finish(opt, summary, {"blowup.json", "virial.svg"});
  return {ok, summary};
}

RunResult run_construct(const ScenarioConfig& cfg, const RunOptions& opt, const Logger& log) {
  const RadialProfile profile = make_profile(*cfg.profile);
  const SolutionSpec spec = make_spec(profile, *cfg.solution);
  const int n = profile.params().n;
  const Grid grid = make_grid_for(*cfg.grid, n);
  check_dims(cfg.lambda, n, "lambda");
  std::vector<double> times = cfg.times.empty() ? std::vector<double>{0.0} : cfg.times;
  for (double t : times) {
    require(t >= 0.0 && t < spec.flow.valid_until(),
            "times: each time must lie in [0, valid_until = " + format_number(spec.flow.valid_until()) + ")");
  }
  const double gs_norm = ground_state_norm(n, profile);
  std::vector<std::string> outputs;
  json reports = json::array();
  std::vector<Series> sections;
  Series peak{"max |psi|", {}};
  for (std::size_t i = 0; i < times.size(); ++i) {
    log("building t = " + format_number(times[i]));
    const WaveField f = build_solution(spec, times[i], grid);
    const auto name = indexed("snapshot", i, ".wfield");
    write_wfield(opt.out_dir / name, f);
    outputs.push_back(name);
    if (n == 1) {
      const auto csv = indexed("snapshot", i, ".csv");
      write_field_csv(opt.out_dir / csv, f);
      outputs.push_back(csv);
      Series s{"t=" + format_number(times[i]), {}};
      for (std::size_t k = 0; k < grid.size(); ++k) {
        s.points.emplace_back(grid.coordinates()[k], std::abs(f.values()[k]));
      }
      sections.push_back(std::move(s));
    }
    const auto r = functionals(f, cfg.lambda);
    reports.push_back(report_entry(times[i], r, cfg.lambda, gs_norm));
    peak.points.emplace_back(times[i], r.amp_max);
  }
  write_json(opt.out_dir / "functionals.json", reports);
  outputs.push_back("functionals.json");

  const double t_max = *std::max_element(times.begin(), times.end());
  std::vector<double> dense;
  for (int i = 0; i <= 200; ++i) dense.push_back(t_max * i / 200.0);
  if (t_max == 0.0) dense = {0.0};
  write_timeflow_csv(opt.out_dir / "timeflow.csv", spec.flow, dense);
  outputs.push_back("timeflow.csv");
  if (n == 1) {
    write_svg_plot(opt.out_dir / "amplitude.svg", "|psi| sections", "x", "|psi|", sections);
  } else {
    write_svg_plot(opt.out_dir / "amplitude.svg", "peak amplitude", "t", "max |psi|", {peak});
  }
  outputs.push_back("amplitude.svg");

  json summary = base_summary("construct", cfg);
  summary["valid_until"] = std::isfinite(spec.flow.valid_until()) ? json(spec.flow.valid_until()) : json();
  if (cfg.solution->virial) {
    const auto r0 = functionals(build_solution(spec, 0.0, grid));
    const auto vc = virial_coefficients(r0.H, r0.M, r0.Mp, r0.N);
    json v{{"H", vc.H()}, {"M0", vc.M0()}, {"M0p", vc.M0p()}, {"N", vc.N()}, {"K", vc.K()}, {"k", vc.k()},
           {"blowup", to_json(classify_blowup(vc, n, cfg.solution->virial_zero_tol))}};
    if (spec.flow.mode() == FlowMode::profile) v["k_prescribed"] = spec.flow.k_or_k1();
    write_json(opt.out_dir / "virial.json", v);
    outputs.push_back("virial.json");
    summary["virial"] = v;
  }
  summary["snapshots"] = times.size();
  finish(opt, summary, outputs);
  return {ok, summary};
}

WaveField initial_field(const ScenarioConfig& cfg, const Logger& log) {
  const auto& init = cfg.initial ? *cfg.initial : InitialConfig{};
  if (init.source == "wfield") {
    log("reading " + init.path);
    return read_wfield(init.path);
  }
  require(cfg.grid.has_value(), "grid: required");
  if (init.source == "solution") {
    require(cfg.profile && cfg.solution, "initial.source 'solution' needs profile and solution blocks");
    const RadialProfile profile = make_profile(*cfg.profile);
    const SolutionSpec spec = make_spec(profile, *cfg.solution);
    return build_solution(spec, 0.0, make_grid_for(*cfg.grid, profile.params().n));
  }
  const int n = static_cast<int>(std::max({init.center.size(), init.kick.size(), std::size_t{1}}));
  require(n <= 3, "initial: at most three dimensions");
  check_dims(init.center, n, "initial.center");
  check_dims(init.kick, n, "initial.kick");
  const Grid grid = make_grid_for(*cfg.grid, n);
  std::vector<complex> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto x = grid.position(i);
    double r2 = 0.0, kx = 0.0;
    for (int d = 0; d < n; ++d) {
      const auto ud = static_cast<std::size_t>(d);
      const double y = x[ud] - (init.center.empty() ? 0.0 : init.center[ud]);
      r2 += y * y;
      kx += (init.kick.empty() ? 0.0 : init.kick[ud]) * x[ud];
    }
    v[i] = init.amplitude * std::exp(-r2 / (2.0 * init.width * init.width)) *
           std::polar(1.0, kx + init.chirp * r2 / 4.0);
  }
  return WaveField(grid, std::move(v));
}

RunResult run_evolve(const ScenarioConfig& cfg, const RunOptions& opt, const Logger& log) {
  const WaveField psi0 = initial_field(cfg, log);
  const int n = psi0.grid().n_dims();
  check_dims(cfg.lambda, n, "lambda");
  log("evolving to t = " + format_number(cfg.evolve->t_end));
  const auto res = evolve(psi0, *cfg.evolve);
  for (const auto& w : res.warnings) log("warning: " + w);
  std::vector<std::string> outputs;
  FunctionalOptions fopt;
  fopt.containment = cfg.evolve->containment_threshold;
  CsvWriter csv(opt.out_dir / "diagnostics.csv", {"t", "N", "H", "M", "Mp", "amp_max"});
  Series mass{"N", {}}, moment{"M", {}};
  auto record = [&](const WaveField& f) {
    const auto r = functionals(f, {}, fopt);
    csv.row({f.time_tag(), r.N, r.H, r.M, r.Mp, r.amp_max});
    mass.points.emplace_back(f.time_tag(), r.N);
    moment.points.emplace_back(f.time_tag(), r.M);
  };
  record(psi0);
  for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
    const auto name = indexed("evolve", i, ".wfield");
    write_wfield(opt.out_dir / name, res.snapshots[i]);
    outputs.push_back(name);
    record(res.snapshots[i]);
  }
  write_wfield(opt.out_dir / "final.wfield", res.final_state);
  write_json(opt.out_dir / "termination.json", to_json(res));
  write_svg_plot(opt.out_dir / "diagnostics.svg", "oracle run", "t", "value", {mass, moment});
  for (const char* f : {"final.wfield", "termination.json", "diagnostics.csv", "diagnostics.svg"}) {
    outputs.push_back(f);
  }
  json summary = base_summary("evolve", cfg);
  summary["termination"] = to_json(res);
  finish(opt, summary, outputs);
  return {ok, summary};
}

json check(const std::string& name, double value, double tolerance, bool pass) {
  return {{"name", name}, {"value", value}, {"tolerance", tolerance}, {"pass", pass}};
}

RunResult run_verify(const ScenarioConfig& cfg, const RunOptions& opt, const Logger& log) {
  const RadialProfile profile = make_profile(*cfg.profile);
  const SolutionSpec spec = make_spec(profile, *cfg.solution);
  const int n = profile.params().n;
  const Grid grid = make_grid_for(*cfg.grid, n);
  EvolveConfig ecfg = *cfg.evolve;
  require(ecfg.t_end < spec.flow.valid_until(),
          "evolve.t_end: must be below valid_until = " + format_number(spec.flow.valid_until()));
  if (ecfg.snapshot_times.empty()) {
    for (int i = 1; i <= 10; ++i) ecfg.snapshot_times.push_back(ecfg.t_end * i / 10.0);
  }
  const VerifyConfig vcfg = cfg.verify ? *cfg.verify : VerifyConfig{};

  const WaveField psi0 = build_solution(spec, 0.0, grid);
  log("oracle run to t = " + format_number(ecfg.t_end));
  const auto res = evolve(psi0, ecfg);
  for (const auto& w : res.warnings) log("warning: " + w);
  const auto errors = compare([&](double t) { return build_solution(spec, t, grid); }, res.snapshots);

  json checks = json::array();
  checks.push_back(check("completed", res.reason == Termination::completed ? 1.0 : 0.0, 1.0,
                         res.reason == Termination::completed));
  const double max_err = errors.empty() ? 0.0 : *std::max_element(errors.begin(), errors.end());
  checks.push_back(check("max_l2_error", max_err, vcfg.l2_tolerance, max_err <= vcfg.l2_tolerance));
  const double N0 = functionals(psi0).N;
  FunctionalOptions loose;
  loose.containment = ecfg.containment_threshold;
  const double drift = std::abs(functionals(res.final_state, {}, loose).N - N0) / N0;
  checks.push_back(check("mass_drift", drift, vcfg.mass_tolerance, drift <= vcfg.mass_tolerance));

  json fits = json::object();
  if (vcfg.rate_fit) {
    const double T = spec.flow.valid_until();
    require(std::isfinite(T) && spec.flow.mode() == FlowMode::profile && spec.flow.k_or_k1() <= 0.0,
            "verify.rate_fit: needs a collapsing profile-mode flow (k <= 0, finite valid_until)");
    const bool k_zero = spec.flow.k_or_k1() == 0.0;
    const double amp_expected = k_zero ? n / 2.0 : n / 4.0;
    const double grad_expected = k_zero ? 2.0 : 1.0;
    const double rel = k_zero ? 0.02 : 0.05;
    const auto window = default_rate_window(T);
    const Grid fit_grid = vcfg.rate_grid ? make_grid_for(*vcfg.rate_grid, n) : grid;
    std::vector<std::pair<double, double>> amp, grad;
    for (double t : rate_sample_times(T, window)) {
      const auto r = functionals(build_solution(spec, t, fit_grid));
      amp.emplace_back(t, r.amp_max);
      grad.emplace_back(t, r.grad_norm_sq);
    }
    const auto fa = fit_rate(amp, T, window);
    const auto fg = fit_rate(grad, T, window);
    fits = {{"amplitude", to_json(fa)}, {"gradient", to_json(fg)}};
    const double ea = std::abs(fa.exponent - amp_expected) / amp_expected;
    const double eg = std::abs(fg.exponent - grad_expected) / grad_expected;
    checks.push_back(check("amplitude_exponent_rel_error", ea, rel, ea <= rel));
    checks.push_back(check("gradient_exponent_rel_error", eg, rel, eg <= rel));
  }

  bool pass = true;
  for (const auto& c : checks) pass = pass && c.at("pass").get<bool>();
  json verdict{{"verdict", pass ? "pass" : "fail"},
               {"checks", checks},
               {"termination", to_json(res)},
               {"rate_fits", fits}};
  write_json(opt.out_dir / "verdict.json", verdict);
  CsvWriter csv(opt.out_dir / "errors.csv", {"t", "l2_error"});
  Series err{"relative L2 error", {}};
  for (std::size_t i = 0; i < errors.size(); ++i) {
    csv.row({res.snapshots[i].time_tag(), errors[i]});
    err.points.emplace_back(res.snapshots[i].time_tag(), errors[i]);
  }
  write_svg_plot(opt.out_dir / "errors.svg", "constructed vs oracle", "t", "relative L2 error", {err});
  log(std::string("verdict ") + (pass ? "pass" : "fail"));
  json summary = base_summary("verify", cfg);
  summary["verdict"] = verdict.at("verdict");
  summary["max_l2_error"] = max_err;
  finish(opt, summary, {"verdict.json", "errors.csv", "errors.svg"});
  return {pass ? ok : verification_failure, summary};
}

RunResult run_sweep(const ScenarioConfig& cfg, const RunOptions& opt, const Logger& log) {
  const auto& s = *cfg.sweep;
  struct Triple {
    double H, M0, M0p;
  };
  std::vector<Triple> triples;
  for (double h : s.H) {
    for (double m : s.M0) {
      for (double mp : s.M0p) triples.push_back({h, m, mp});
    }
  }
  std::mt19937_64 rng(cfg.seed);
  auto draw = [&](const std::vector<double>& r) {
    return r[0] + (r[1] - r[0]) * std::generate_canonical<double, 53>(rng);
  };
  for (int i = 0; i < s.random_count; ++i) {
    const double h = draw(s.H_range);
    const double m = draw(s.M0_range);
    triples.push_back({h, m, draw(s.M0p_range)});
  }
  log("classifying " + std::to_string(triples.size()) + " triples on " + std::to_string(opt.threads) +
      " threads");

  std::vector<std::optional<BlowupReport>> reports(triples.size());
  std::vector<std::string> failures(triples.size());
  const auto workers = static_cast<std::size_t>(std::max(1, opt.threads));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < triples.size(); i += workers) {
        try {
          reports[i] = classify_blowup(virial_coefficients(triples[i].H, triples[i].M0, triples[i].M0p, 1.0), s.n);
        } catch (const std::exception& e) {
          failures[i] = e.what();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (!failures[i].empty()) throw SolverError("sweep: triple " + std::to_string(i) + ": " + failures[i]);
  }

  std::ofstream csv(opt.out_dir / "regime_map.csv");
  if (!csv) throw InvalidArgument("cannot write regime_map.csv");
  csv << "H,M0,M0p,K,k,regime,T,paper_T,paper_T_differs\n";
  std::map<std::string, int> counts;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& r = *reports[i];
    const auto opt_num = [](const std::optional<double>& v) { return v ? format_number(*v) : ""; };
    csv << format_number(triples[i].H) << ',' << format_number(triples[i].M0) << ','
        << format_number(triples[i].M0p) << ',' << format_number(r.K) << ',' << format_number(r.k) << ','
        << to_string(r.regime) << ',' << opt_num(r.T) << ',' << opt_num(r.paper_T) << ','
        << (r.paper_T_differs ? 1 : 0) << '\n';
    ++counts[to_string(r.regime)];
  }
  json summary = base_summary("sweep", cfg);
  summary["count"] = triples.size();
  summary["regimes"] = counts;
  finish(opt, summary, {"regime_map.csv"});
  return {ok, summary};
}

bool all_finite(const json& j) {
  if (j.is_number_float()) return std::isfinite(j.get<double>());
  if (j.is_structured()) {
    for (const auto& e : j) {
      if (!all_finite(e)) return false;
    }
  }
  return true;
}

}  // namespace

ScenarioConfig parse_config(const json& j) {
  check_keys(j, "config", {"schema", "seed", "profile", "grid", "solution", "virial", "evolve", "initial",
                           "verify", "sweep", "times", "lambda"});
  ScenarioConfig c;
  if (!j.contains("schema") || !j.at("schema").is_string()) {
    throw ConfigError("config.schema: required string");
  }
  c.schema = j.at("schema").get<std::string>();
  if (c.schema != kSchema) {
    throw ConfigError("config.schema: unsupported version '" + c.schema + "' (expected '" + kSchema + "')");
  }
  if (j.contains("seed")) {
    const auto& seed = j.at("seed");
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) throw ConfigError("config.seed: expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("profile")) c.profile = parse_profile(j.at("profile"));
  if (j.contains("grid")) c.grid = parse_grid(j.at("grid"));
  if (j.contains("solution")) c.solution = parse_solution(j.at("solution"));
  if (j.contains("virial")) c.virial = parse_virial(j.at("virial"));
  if (j.contains("evolve")) c.evolve = parse_evolve(j.at("evolve"));
  if (j.contains("initial")) c.initial = parse_initial(j.at("initial"));
  if (j.contains("verify")) c.verify = parse_verify(j.at("verify"));
  if (j.contains("sweep")) c.sweep = parse_sweep(j.at("sweep"));
  c.times = vector(j, "config", "times");
  c.lambda = vector(j, "config", "lambda");
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"profile", "classify", "construct", "evolve", "verify", "sweep"};
  return c;
}

void require_blocks(const ScenarioConfig& cfg, const std::string& command) {
  auto need = [&](bool present, const char* block) {
    if (!present) throw ConfigError(command + ": config block '" + block + "' is required");
  };
  if (command == "profile") {
    need(cfg.profile.has_value(), "profile");
  } else if (command == "classify") {
    need(cfg.virial.has_value(), "virial");
  } else if (command == "construct") {
    need(cfg.profile.has_value(), "profile");
    need(cfg.solution.has_value(), "solution");
    need(cfg.grid.has_value(), "grid");
  } else if (command == "evolve") {
    need(cfg.evolve.has_value(), "evolve");
    const std::string source = cfg.initial ? cfg.initial->source : "solution";
    if (source != "wfield") need(cfg.grid.has_value(), "grid");
    if (source == "solution") {
      need(cfg.profile.has_value(), "profile");
      need(cfg.solution.has_value(), "solution");
    }
  } else if (command == "verify") {
    need(cfg.profile.has_value(), "profile");
    need(cfg.solution.has_value(), "solution");
    need(cfg.grid.has_value(), "grid");
    need(cfg.evolve.has_value(), "evolve");
  } else if (command == "sweep") {
    need(cfg.sweep.has_value(), "sweep");
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
}

RunResult run_command(const std::string& command, const ScenarioConfig& cfg, const RunOptions& opt) {
  require_blocks(cfg, command);
  std::error_code ec;
  std::filesystem::create_directories(opt.out_dir, ec);
  if (ec || !std::filesystem::is_directory(opt.out_dir)) {
    throw ConfigError("cannot create output directory " + opt.out_dir.string());
  }
  const Logger log(opt);
  if (command == "profile") return run_profile(cfg, opt, log);
  if (command == "classify") return run_classify(cfg, opt, log);
  if (command == "construct") return run_construct(cfg, opt, log);
  if (command == "evolve") return run_evolve(cfg, opt, log);
  if (command == "verify") return run_verify(cfg, opt, log);
  return run_sweep(cfg, opt, log);
}

std::pair<int, std::string> classify_error(const std::exception& e) {
  if (dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const json::exception*>(&e)) {
    return {config_error, "config_error"};
  }
  if (dynamic_cast<const SolverError*>(&e)) return {solver_failure, "solver_failure"};
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return {config_error, "io_error"};
  return {solver_failure, "internal_error"};
}

void write_json(const std::filesystem::path& path, const json& j) {
  if (!all_finite(j)) throw SolverError("non-finite number in " + path.filename().string());
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
}

}  // namespace hydronls::cli
