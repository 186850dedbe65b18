#pragma once

// Configuration handling and command runners for the gravdec executable.
//
// Configuration is a flat file of `dotted.key = value` lines ('#' starts a
// comment). Layers, lowest to highest priority: built-in defaults, presets,
// the config file, GRAVDEC_OUTPUT_DIR (output_dir only), command-line flags.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gravdec/acceptance.hpp"
#include "gravdec/gravdec.hpp"

namespace gravdec::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kInvalidParameter = 3,
  kNonConvergence = 4,
  kIoError = 5,
  kSelftestFailed = 6,
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KeyType { number, integer, boolean, text };

struct KeySpec {
  const char* key;
  KeyType type;
  const char* fallback;  // "" = unset
  const char* help;
};

inline const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      {"seed", KeyType::integer, "1", "RNG seed"},
      {"output_dir", KeyType::text, "gravdec-out", "directory for outputs"},
      {"convention", KeyType::text, "penrose", "penrose (tau = hbar/Delta) or diosi (tau = 2 hbar/Delta)"},
      {"constants.G", KeyType::number, "6.674e-11", "m^3 kg^-1 s^-2"},
      {"constants.hbar", KeyType::number, "1.0546e-34", "J s"},
      {"constants.c", KeyType::number, "2.998e8", "m/s"},

      {"dp.preset", KeyType::text, "mirror", "mirror or none"},
      {"dp.side", KeyType::number, "", "cube side, in dp.length_unit"},
      {"dp.d", KeyType::number, "", "displacement, in dp.length_unit"},
      {"dp.mass", KeyType::number, "", "cube mass, in dp.mass_unit"},
      {"dp.length_unit", KeyType::text, "cm", "m or cm"},
      {"dp.mass_unit", KeyType::text, "kg", "kg or g"},
      {"dp.method", KeyType::text, "quadratic", "quadratic, surface, voxel or mc"},
      {"dp.voxel_n", KeyType::integer, "64", "voxel cells per characteristic length"},
      {"dp.mc_samples", KeyType::integer, "1000000", "Monte Carlo samples"},
      {"dp.grid_a", KeyType::text, "", "voxel grid file base (.hdr/.bin) for configuration A"},
      {"dp.grid_b", KeyType::text, "", "voxel grid file base for configuration B"},
      {"dp.sweep_points", KeyType::integer, "0", "log-spaced displacement sweep length (0 = off)"},
      {"dp.sweep_min", KeyType::number, "", "smallest swept d, in dp.length_unit"},
      {"dp.sweep_max", KeyType::number, "", "largest swept d, in dp.length_unit"},

      {"dec.tau_d", KeyType::number, "1", "s"},
      {"dec.dt", KeyType::number, "0.01", "s; at most tau_d/100"},
      {"dec.t_final", KeyType::number, "3", "s"},
      {"dec.trajectories", KeyType::integer, "1000", "ensemble size"},
      {"dec.population0", KeyType::number, "0.5", "initial population of branch 0"},

      {"sn.units", KeyType::text, "natural", "natural (hbar = m = G = 1) or si (constants.*, sn.m)"},
      {"sn.m", KeyType::number, "1", "particle mass"},
      {"sn.method", KeyType::text, "imaginary_time", "imaginary_time or radial_shooting"},
      {"sn.geometry", KeyType::text, "radial", "radial or cartesian (evolve only)"},
      {"sn.n", KeyType::integer, "", "grid intervals/points per axis (default 1024 radial ground state, 256 "
                                      "radial evolve, 32 cartesian)"},
      {"sn.extent", KeyType::number, "", "outer radius or box side (default 40 natural length units)"},
      {"sn.dtau", KeyType::number, "0.04", "imaginary-time step, natural units"},
      {"sn.tolerance", KeyType::number, "1e-10", "eigenvalue change per step, natural units"},
      {"sn.include_self", KeyType::boolean, "true", "self-interaction (SN) or none (free/Hartree N=1)"},
      {"sn.sigma", KeyType::number, "2", "initial Gaussian width, natural length units"},
      {"sn.dt", KeyType::number, "0.05", "time step, natural time units"},
      {"sn.steps", KeyType::integer, "1000", "evolution steps"},
      {"sn.output_every", KeyType::integer, "10", "time-series stride"},

      {"com.n", KeyType::integer, "256", "grid points per particle axis"},
      {"com.extent", KeyType::number, "32", "box length"},
      {"com.hbar", KeyType::number, "1", "hbar (dimensionless run)"},
      {"com.G", KeyType::number, "1", "amplified coupling"},
      {"com.m1", KeyType::number, "1", "mass of particle 1"},
      {"com.m2", KeyType::number, "1", "mass of particle 2"},
      {"com.eps_cells", KeyType::number, "4", "softening length in grid cells"},
      {"com.eps_cells_alt", KeyType::number, "3", "second softening length checked (0 = skip)"},
      {"com.separation", KeyType::number, "4", "initial CoM packet offsets ±separation"},
      {"com.momentum", KeyType::number, "6.283185307179586", "CoM momentum of each packet"},
      {"com.sigma_com", KeyType::number, "0.5", "CoM packet width"},
      {"com.sigma_rel", KeyType::number, "1", "relative-coordinate width"},
      {"com.steps", KeyType::integer, "256", "steps up to packet overlap"},
      {"com.output_every", KeyType::integer, "32", "marginal output stride"},
  };
  return specs;
}

inline const KeySpec* find_key(std::string_view key) {
  for (const auto& s : key_specs())
    if (key == s.key) return &s;
  return nullptr;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

/// Parses `key = value` lines. Rejects malformed lines, unknown and duplicate keys.
inline std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw InvalidInput("config line " + std::to_string(lineno) + ": empty key");
    if (!find_key(key)) throw InvalidInput("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (out.count(key)) throw InvalidInput("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    out[key] = value;
  }
  return out;
}

inline std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

inline double parse_number(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size() || !std::isfinite(x))
    throw InvalidInput("config key '" + key + "': expected a finite number, got '" + v + "'");
  return x;
}

inline long long parse_integer(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw InvalidInput("config key '" + key + "': expected an integer, got '" + v + "'");
  return x;
}

inline bool parse_boolean(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidInput("config key '" + key + "': expected true or false, got '" + v + "'");
}

/// Fully resolved configuration; every known key is present (possibly empty).
class Config {
 public:
  Config() {
    for (const auto& s : key_specs()) values_[s.key] = s.fallback;
  }

  void set(const std::string& key, const std::string& value) {
    const KeySpec* spec = find_key(key);
    if (!spec) throw InvalidInput("unknown configuration key '" + key + "'");
    check(*spec, value);
    values_[key] = value;
  }
  void merge(const std::map<std::string, std::string>& layer) {
    for (const auto& [k, v] : layer) set(k, v);
  }

  bool has(const std::string& key) const { return !values_.at(key).empty(); }
  const std::string& text(const std::string& key) const { return values_.at(key); }
  double number(const std::string& key) const { return parse_number(key, require_value(key)); }
  long long integer(const std::string& key) const { return parse_integer(key, require_value(key)); }
  bool boolean(const std::string& key) const { return parse_boolean(key, require_value(key)); }

  std::size_t count(const std::string& key, long long min_value = 0) const {
    const long long v = integer(key);
    if (v < min_value) throw InvalidInput("config key '" + key + "' must be >= " + std::to_string(min_value));
    return std::size_t(v);
  }

  PhysicalConstants constants() const {
    PhysicalConstants k{number("constants.G"), number("constants.hbar"), number("constants.c")};
    k.validate();
    return k;
  }
  Convention convention() const {
    const auto& c = text("convention");
    if (c == "penrose") return Convention::penrose;
    if (c == "diosi") return Convention::diosi;
    throw InvalidInput("convention must be 'penrose' or 'diosi', got '" + c + "'");
  }

  /// Typed JSON echo of every key, for manifests. Unset keys appear as null.
  json to_json() const {
    json j = json::object();
    for (const auto& s : key_specs()) {
      const auto& v = values_.at(s.key);
      if (v.empty()) {
        j[s.key] = nullptr;
        continue;
      }
      switch (s.type) {
        case KeyType::number: j[s.key] = parse_number(s.key, v); break;
        case KeyType::integer: j[s.key] = parse_integer(s.key, v); break;
        case KeyType::boolean: j[s.key] = parse_boolean(s.key, v); break;
        case KeyType::text: j[s.key] = v; break;
      }
    }
    return j;
  }

 private:
  const std::string& require_value(const std::string& key) const {
    const auto& v = values_.at(key);
    if (v.empty()) throw InvalidInput("config key '" + key + "' is required here");
    return v;
  }
  static void check(const KeySpec& s, const std::string& v) {
    if (v.empty()) return;
    switch (s.type) {
      case KeyType::number: parse_number(s.key, v); break;
      case KeyType::integer: parse_integer(s.key, v); break;
      case KeyType::boolean: parse_boolean(s.key, v); break;
      case KeyType::text: break;
    }
  }
  std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------------
// Output helpers

/// CSV number: 9 significant digits; infinities as +inf / -inf.
inline std::string csv_number(double x) {
  if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8e", x);
  return buf;
}

/// JSON has no infinity; +inf is written as the string "+inf".
inline json json_number(double x) {
  if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
  if (std::isnan(x)) return "nan";
  return x;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot write '" + path.string() + "'");
  }
  void header(const std::vector<std::string>& cols) { write_row(cols); }
  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(csv_number(v));
    write_row(cells);
  }
  ~CsvWriter() = default;
  void close() {
    out_.close();
    if (!out_) throw IoError("error writing '" + path_.string() + "'");
  }

 private:
  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }
  std::filesystem::path path_;
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << j.dump(2) << '\n';
  f.close();
  if (!f) throw IoError("error writing '" + path.string() + "'");
}

struct RunContext {
  std::string command;
  Config config;
  std::filesystem::path output_dir;
  std::FILE* log = stdout;

  void prepare() {
    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + output_dir.string() + "': " + ec.message());
  }
  void write_manifest() const {
    json m;
    m["command"] = command;
    m["config"] = config.to_json();
    m["config"]["output_dir"] = output_dir.string();
    write_json(output_dir / "manifest.json", m);
  }
  void write_summary(json summary) const {
    json s;
    s["command"] = command;
    for (auto& [k, v] : summary.items()) s[k] = v;
    write_json(output_dir / "summary.json", s);
  }
};

// ---------------------------------------------------------------------------
// dp-rate

inline Unit length_unit_of(const Config& c) {
  const Unit u = parse_unit(c.text("dp.length_unit"));
  if (u != Unit::m && u != Unit::cm) throw InvalidInput("dp.length_unit must be m or cm");
  return u;
}

inline Unit mass_unit_of(const Config& c) {
  const Unit u = parse_unit(c.text("dp.mass_unit"));
  if (u != Unit::kg && u != Unit::g) throw InvalidInput("dp.mass_unit must be kg or g");
  return u;
}

/// Fills dp.side / dp.d / dp.mass from the preset where they are unset.
inline void apply_dp_preset(Config& c) {
  const auto& preset = c.text("dp.preset");
  if (preset == "none") return;
  if (preset != "mirror") throw InvalidInput("dp.preset must be 'mirror' or 'none', got '" + preset + "'");
  const CubePreset p = mirror_preset();
  const Unit lu = length_unit_of(c), mu = mass_unit_of(c);
  auto fill = [&](const char* key, double si, Unit u) {
    if (c.has(key)) return;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", from_si(si, u).value);
    c.set(key, buf);
  };
  fill("dp.side", p.side, lu);
  fill("dp.d", p.d, lu);
  fill("dp.mass", p.mass, mu);
}

inline DeltaResult dp_evaluate(const Config& c, const SuperposedPair& pair, double side, double rho0, double d) {
  const auto k = c.constants();
  const auto conv = c.convention();
  const auto& method = c.text("dp.method");
  if (method == "quadratic") return delta_cube_quadratic(side, rho0, d, k, conv);
  if (method == "surface") return delta_surface_expansion(pair, k, conv);
  if (method == "voxel") return delta_full(pair, VoxelOptions{c.count("dp.voxel_n", 1)}, k, conv);
  if (method == "mc")
    return delta_full(pair, MonteCarloOptions{c.count("dp.mc_samples", 2), std::uint64_t(c.integer("seed"))}, k,
                      conv);
  throw InvalidInput("dp.method must be quadratic, surface, voxel or mc, got '" + method + "'");
}

inline json delta_json(const DeltaResult& r) {
  json j;
  j["method"] = to_string(r.method);
  j["convention"] = to_string(r.convention);
  j["delta_J"] = json_number(r.delta);
  j["delta_hbar_c_per_cm"] = json_number(r.delta_hbar_c_per_cm);
  j["tau_d_s"] = json_number(r.tau_d);
  if (r.method == DeltaMethod::mc) j["standard_error_J"] = json_number(r.standard_error);
  j["warning"] = r.warning ? json(*r.warning) : json(nullptr);
  return j;
}

inline int run_dp_rate(RunContext& ctx) {
  Config& c = ctx.config;
  apply_dp_preset(c);
  const bool grids = c.has("dp.grid_a") || c.has("dp.grid_b");
  json summary;
  DeltaResult result;
  if (grids) {
    if (!c.has("dp.grid_a") || !c.has("dp.grid_b"))
      throw InvalidInput("dp.grid_a and dp.grid_b must be given together");
    const auto& method = c.text("dp.method");
    if (method != "voxel" && method != "mc") throw InvalidInput("voxel-grid inputs need dp.method = voxel or mc");
    MassDistribution a, b;
    try {
      a = read_voxel_grid(c.text("dp.grid_a"));
      b = read_voxel_grid(c.text("dp.grid_b"));
    } catch (const InvalidInput&) {
      throw;
    } catch (const std::exception& e) {
      throw IoError(e.what());
    }
    const SuperposedPair pair(a, b);
    result = dp_evaluate(c, pair, 0, 0, 0);
    summary = delta_json(result);
  } else {
    const Unit lu = length_unit_of(c), mu = mass_unit_of(c);
    const double side = in_si(c.number("dp.side"), lu);
    const double d = in_si(c.number("dp.d"), lu);
    const double mass = in_si(c.number("dp.mass"), mu);
    require(side > 0, "dp.side must be positive");
    require(mass > 0, "dp.mass must be positive");
    require(d >= 0, "dp.d must be non-negative");
    const double rho0 = mass / (side * side * side);
    result = dp_evaluate(c, build_displaced_cube(side, rho0, d, Axis::z), side, rho0, d);
    summary = delta_json(result);
    summary["side_m"] = side;
    summary["d_m"] = d;
    summary["mass_kg"] = mass;
    summary["density_kg_m3"] = rho0;
    if (result.warning) std::fprintf(ctx.log, "warning: %s\n", result.warning->c_str());

    const auto points = c.count("dp.sweep_points");
    if (points > 0) {
      require(points >= 2, "dp.sweep_points must be 0 or at least 2");
      const double lo = in_si(c.number("dp.sweep_min"), lu), hi = in_si(c.number("dp.sweep_max"), lu);
      require(lo > 0 && hi > lo, "sweep needs 0 < dp.sweep_min < dp.sweep_max");
      CsvWriter csv(ctx.output_dir / "sweep.csv");
      csv.header({"d_m", "d_over_side", "delta_J", "delta_hbar_c_per_cm", "tau_d_s", "standard_error_J"});
      for (std::size_t i = 0; i < points; ++i) {
        const double di = lo * std::pow(hi / lo, double(i) / double(points - 1));
        const auto ri = dp_evaluate(c, build_displaced_cube(side, rho0, di, Axis::z), side, rho0, di);
        csv.row({di, di / side, ri.delta, ri.delta_hbar_c_per_cm, ri.tau_d, ri.standard_error});
      }
      csv.close();
      summary["sweep_csv"] = "sweep.csv";
    }
  }
  ctx.write_summary(summary);
  std::fprintf(ctx.log, "Delta = %s J = %s hbar c/cm, tau_d = %s s (%s, %s)\n", csv_number(result.delta).c_str(),
               csv_number(result.delta_hbar_c_per_cm).c_str(), csv_number(result.tau_d).c_str(),
               to_string(result.method), to_string(result.convention));
  return kOk;
}

// ---------------------------------------------------------------------------
// decohere

inline int run_decohere(RunContext& ctx) {
  const Config& c = ctx.config;
  NoiseSpec spec{c.number("dec.tau_d"), c.number("dec.dt"), std::uint64_t(c.integer("seed"))};
  spec.validate();
  const double p0 = c.number("dec.population0");
  require(p0 > 0 && p0 < 1, "dec.population0 must lie strictly between 0 and 1");
  const Amplitudes psi0{cplx(std::sqrt(p0)), cplx(std::sqrt(1 - p0))};
  const double t_final = c.number("dec.t_final");
  const auto count = c.count("dec.trajectories", 2);
  const auto ens = sample_ensemble(spec, psi0, t_final, count);
  const auto series = ensemble_offdiagonal(ens);
  double worst = 0;
  for (const auto& tr : ens)
    for (const auto& a : tr.psi)
      worst = std::max({worst, std::abs(std::norm(a[0]) - p0), std::abs(std::norm(a[1]) - (1 - p0))});
  const auto state0 = TwoBranchState::pure(psi0);
  CsvWriter csv(ctx.output_dir / "coherence.csv");
  csv.header({"t_s", "master_abs_rho01", "ensemble_re_rho01", "ensemble_im_rho01", "ensemble_abs_rho01",
              "standard_error"});
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    const auto m = evolve_master(state0, spec.tau_d, series.t[i]);
    csv.row({series.t[i], std::abs(m.rho[0][1]), series.mean[i].real(), series.mean[i].imag(),
             std::abs(series.mean[i]), series.standard_error[i]});
  }
  csv.close();
  const auto fit = fit_decay_rate(series);
  json s;
  s["tau_d_s"] = spec.tau_d;
  s["trajectories"] = count;
  s["fitted_rate_per_s"] = fit.rate;
  s["expected_rate_per_s"] = 1.0 / spec.tau_d;
  s["relative_deviation"] = std::abs(fit.rate * spec.tau_d - 1);
  s["fit_points"] = fit.points;
  s["max_population_drift"] = worst;
  s["coherence_csv"] = "coherence.csv";
  ctx.write_summary(s);
  std::fprintf(ctx.log, "fitted decoherence rate %.6g /s (1/tau_d = %.6g /s), max population drift %.1e\n", fit.rate,
               1.0 / spec.tau_d, worst);
  return kOk;
}

// ---------------------------------------------------------------------------
// sn

inline SNParams sn_params(const Config& c) {
  SNParams p;
  const auto& units = c.text("sn.units");
  if (units == "natural") {
    p.constants = PhysicalConstants::unit();
  } else if (units == "si") {
    p.constants = c.constants();
  } else {
    throw InvalidInput("sn.units must be 'natural' or 'si'");
  }
  p.m = c.number("sn.m");
  p.include_self = c.boolean("sn.include_self");
  p.validate(1);
  return p;
}

inline void write_radial_profile(const std::filesystem::path& path, const WaveField& f, const std::vector<double>& v,
                                 double m) {
  CsvWriter csv(path);
  csv.header({"r", "density", "phi"});
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = f.radius(i);
    csv.row({r, std::norm(f.values[i]) / (4 * std::numbers::pi * r * r), v[i] / m});
  }
  csv.close();
}

inline int run_sn_ground_state(RunContext& ctx) {
  const Config& c = ctx.config;
  const SNParams p = sn_params(c);
  GroundStateOptions o;
  o.n = c.has("sn.n") ? int(c.integer("sn.n")) : 1024;
  o.extent = c.has("sn.extent") ? c.number("sn.extent") * p.length_unit() : 0;
  o.dtau = c.number("sn.dtau");
  o.tolerance = c.number("sn.tolerance");
  require(o.dtau > 0 && o.tolerance > 0, "sn.dtau and sn.tolerance must be positive");
  const auto& method = c.text("sn.method");
  GroundStateMethod gm;
  if (method == "imaginary_time")
    gm = GroundStateMethod::imaginary_time;
  else if (method == "radial_shooting")
    gm = GroundStateMethod::radial_shooting;
  else
    throw InvalidInput("sn.method must be imaginary_time or radial_shooting");
  const auto g = ground_state(p, gm, o);
  write_radial_profile(ctx.output_dir / "profile.csv", g.profile, g.potential, p.m);
  json s;
  s["method"] = method;
  s["units"] = c.text("sn.units");
  s["E0"] = g.eigenvalue;
  s["E0_natural"] = g.eigenvalue / p.energy_unit();
  s["energy_functional"] = g.energy;
  s["rms_radius"] = std::sqrt(g.profile.second_moment());
  s["energy_unit"] = p.energy_unit();
  s["length_unit"] = p.length_unit();
  s["iterations"] = g.iterations;
  s["grid_n"] = g.profile.n;
  s["extent"] = g.profile.extent;
  s["profile_csv"] = "profile.csv";
  ctx.write_summary(s);
  std::fprintf(ctx.log, "E0 = %.9g (%s units) = %.9g G^2 m^5 / hbar^2 via %s\n", g.eigenvalue,
               c.text("sn.units").c_str(), g.eigenvalue / p.energy_unit(), method.c_str());
  return kOk;
}

inline int run_sn_evolve(RunContext& ctx) {
  const Config& c = ctx.config;
  const SNParams p = sn_params(c);
  const auto& geom = c.text("sn.geometry");
  Geometry g;
  if (geom == "radial")
    g = Geometry::radial;
  else if (geom == "cartesian")
    g = Geometry::cartesian;
  else
    throw InvalidInput("sn.geometry must be radial or cartesian");
  // Natural scales use G if available, else hbar and m alone.
  const double a0 = p.constants.G > 0 ? p.length_unit() : 1.0;
  const double t0 = p.constants.G > 0 ? p.time_unit() : p.m * a0 * a0 / p.constants.hbar;
  const int n = c.has("sn.n") ? int(c.integer("sn.n")) : (g == Geometry::radial ? 256 : 32);
  const double extent = (c.has("sn.extent") ? c.number("sn.extent") : 40.0) * a0;
  const double sigma = c.number("sn.sigma") * a0;
  const double dt = c.number("sn.dt") * t0;
  const auto steps = c.count("sn.steps", 1);
  const auto every = c.count("sn.output_every", 1);
  const auto start = gaussian_field(g, n, extent, sigma);
  const SpectralGrid grid(start);
  const double e0 = sn_energy(grid, {start}, p).total();
  CsvWriter ts(ctx.output_dir / "timeseries.csv");
  ts.header({"t", "norm", "energy", "width"});
  ts.row({0.0, start.norm2(), e0, std::sqrt(start.second_moment() / 3)});
  double drift = 0, norm_step = 0, prev_norm = start.norm2();
  const auto final = evolve_split_step(start, p, dt, steps, [&](std::size_t s, const std::vector<WaveField>& f) {
    const double nn = f.front().norm2();
    norm_step = std::max(norm_step, std::abs(nn - prev_norm));
    prev_norm = nn;
    if (s % every == 0 || s == steps) {
      const double e = sn_energy(grid, f, p).total();
      drift = std::max(drift, std::abs(e - e0));
      ts.row({f.front().t, nn, e, std::sqrt(f.front().second_moment() / 3)});
    }
  });
  ts.close();
  const auto v = effective_potential({final}, p, 0);
  if (g == Geometry::radial) {
    write_radial_profile(ctx.output_dir / "profile.csv", final, v, p.m);
  } else {
    CsvWriter csv(ctx.output_dir / "profile.csv");
    csv.header({"x", "density", "phi"});
    const int mid = n / 2;
    for (int i = 0; i < n; ++i) {
      const auto idx = final.index(i, mid, mid);
      csv.row({final.axis_coordinate(i), std::norm(final.values[idx]), v[idx] / p.m});
    }
    csv.close();
  }
  json s;
  s["units"] = c.text("sn.units");
  s["geometry"] = geom;
  s["steps"] = steps;
  s["dt"] = dt;
  s["t_final"] = final.t;
  s["energy_initial"] = e0;
  s["max_energy_drift"] = drift;
  s["max_norm_change_per_step"] = norm_step;
  s["width_initial"] = std::sqrt(start.second_moment() / 3);
  s["width_final"] = std::sqrt(final.second_moment() / 3);
  s["timeseries_csv"] = "timeseries.csv";
  s["profile_csv"] = "profile.csv";
  ctx.write_summary(s);
  std::fprintf(ctx.log, "evolved %zu steps: width %.6g -> %.6g, max energy drift %.3e\n", steps,
               s["width_initial"].get<double>(), s["width_final"].get<double>(), drift);
  return kOk;
}

// ---------------------------------------------------------------------------
// com-test

inline int run_com_test(RunContext& ctx) {
  const Config& c = ctx.config;
  const int n = int(c.integer("com.n"));
  const double L = c.number("com.extent"), hbar = c.number("com.hbar"), G = c.number("com.G");
  const double m1 = c.number("com.m1"), m2 = c.number("com.m2");
  require(hbar > 0, "com.hbar must be positive");
  require(G > 0, "com.G must be positive (the G = 0 run is always performed as the reference)");
  TwoPacketSpec spec;
  spec.separation = c.number("com.separation");
  spec.momentum = c.number("com.momentum");
  spec.sigma_com = c.number("com.sigma_com");
  spec.sigma_rel = c.number("com.sigma_rel");
  spec.hbar = hbar;
  require(spec.separation > 0 && spec.momentum > 0 && spec.sigma_com > 0 && spec.sigma_rel > 0,
          "com.separation, com.momentum and the widths must be positive");
  const auto f0 = make_two_packet_field(n, L, m1, m2, spec);
  const double h = f0.spacing();
  const auto steps = c.count("com.steps", 1);
  const auto every = c.count("com.output_every", 1);
  const double dt = spec.separation * f0.total_mass() / spec.momentum / double(steps);

  struct Series {
    std::vector<double> t;
    std::vector<Marginal> com, rel;
  };
  auto run = [&](double g, double eps) {
    Series s;
    evolve_two_particle(f0, g, eps, dt, steps, hbar, [&](std::size_t k, const TwoParticleField& f) {
      if (k % every == 0 || k == steps) {
        s.t.push_back(f.t);
        s.com.push_back(com_marginal(f));
        s.rel.push_back(relative_marginal(f));
      }
    });
    return s;
  };
  std::vector<double> eps_cells{c.number("com.eps_cells")};
  if (c.number("com.eps_cells_alt") > 0) eps_cells.push_back(c.number("com.eps_cells_alt"));
  for (double e : eps_cells) require(e > 0, "softening lengths must be positive");
  const Series free = run(0.0, eps_cells.front() * h);
  const double vis_free = visibility(free.com.back());
  json runs = json::array();
  double worst_com = 0, min_rel = std::numeric_limits<double>::infinity(), worst_vis = 0;
  for (std::size_t r = 0; r < eps_cells.size(); ++r) {
    const Series grav = run(G, eps_cells[r] * h);
    double com_l1 = 0, rel_l1 = 0;
    for (std::size_t i = 0; i < free.com.size(); ++i) {
      com_l1 = std::max(com_l1, l1_distance(free.com[i], grav.com[i]));
      rel_l1 = std::max(rel_l1, l1_distance(free.rel[i], grav.rel[i]));
    }
    const double vis = visibility(grav.com.back());
    worst_com = std::max(worst_com, com_l1);
    min_rel = std::min(min_rel, rel_l1);
    worst_vis = std::max(worst_vis, std::abs(vis - vis_free));
    json jr;
    jr["eps_cells"] = eps_cells[r];
    jr["eps"] = eps_cells[r] * h;
    jr["max_com_l1"] = com_l1;
    jr["max_relative_l1"] = rel_l1;
    jr["visibility"] = vis;
    runs.push_back(jr);
    if (r == 0) {
      CsvWriter csv(ctx.output_dir / "com_marginals.csv");
      csv.header({"t", "R", "density_G0", "density_G"});
      for (std::size_t i = 0; i < free.com.size(); ++i)
        for (std::size_t q = 0; q < free.com[i].x.size(); ++q)
          csv.row({free.t[i], free.com[i].x[q], free.com[i].density[q], grav.com[i].density[q]});
      csv.close();
    }
  }
  json s;
  s["G"] = G;
  s["overlap_time"] = dt * double(steps);
  s["visibility_G0"] = vis_free;
  s["runs"] = runs;
  s["max_com_l1"] = worst_com;
  s["max_visibility_gap"] = worst_vis;
  s["min_relative_l1"] = min_rel;
  s["decoupled"] = worst_com <= 1e-6 && worst_vis <= 1e-4;
  s["relative_sector_responds"] = min_rel > 1e-2;
  s["com_marginals_csv"] = "com_marginals.csv";
  ctx.write_summary(s);
  std::fprintf(ctx.log, "max CoM L1 %.2e, visibility G=0 %.6f (max gap %.1e), min relative L1 %.3f\n", worst_com,
               vis_free, worst_vis, min_rel);
  return kOk;
}

// ---------------------------------------------------------------------------
// selftest

inline int run_selftest(RunContext& ctx) {
  const auto results = acceptance::run_all(ctx.log);
  json arr = json::array();
  std::size_t passed = 0;
  for (const auto& r : results) {
    passed += r.passed;
    json j;
    j["id"] = r.id;
    j["title"] = r.title;
    j["passed"] = r.passed;
    j["detail"] = r.detail;
    j["seconds"] = r.seconds;
    arr.push_back(j);
  }
  json s;
  s["criteria"] = arr;
  s["passed"] = passed;
  s["total"] = results.size();
  ctx.write_summary(s);
  std::fprintf(ctx.log, "%zu/%zu criteria passed\n", passed, results.size());
  return passed == results.size() ? kOk : kSelftestFailed;
}

// ---------------------------------------------------------------------------

inline int dispatch(RunContext& ctx) {
  ctx.prepare();
  int code = kInternal;
  if (ctx.command == "dp-rate")
    code = run_dp_rate(ctx);
  else if (ctx.command == "decohere")
    code = run_decohere(ctx);
  else if (ctx.command == "sn ground-state")
    code = run_sn_ground_state(ctx);
  else if (ctx.command == "sn evolve")
    code = run_sn_evolve(ctx);
  else if (ctx.command == "com-test")
    code = run_com_test(ctx);
  else if (ctx.command == "selftest")
    code = run_selftest(ctx);
  else
    throw UsageError("unknown command '" + ctx.command + "'");
  // Written last so that it reflects preset expansion.
  ctx.write_manifest();
  return code;
}

inline json error_record(int code, const std::string& kind, const std::string& message) {
  json e;
  e["error"]["code"] = code;
  e["error"]["kind"] = kind;
  e["error"]["message"] = message;
  return e;
}

}  // namespace gravdec::cli
