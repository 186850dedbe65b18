// gravdec: reduction rates, two-branch decoherence, Schrodinger-Newton and
// centre-of-mass runs from a flat key = value configuration.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli.hpp"

namespace {

using namespace gravdec;
using namespace gravdec::cli;

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

// Subcommand flags; each one is shorthand for --set key=value.
const std::vector<Flag> kDpFlags = {
    {"--preset", "dp.preset", "mirror or none"},
    {"--side", "dp.side", "cube side (dp.length_unit)"},
    {"--d", "dp.d", "displacement (dp.length_unit)"},
    {"--mass", "dp.mass", "cube mass (dp.mass_unit)"},
    {"--length-unit", "dp.length_unit", "m or cm"},
    {"--mass-unit", "dp.mass_unit", "kg or g"},
    {"--method", "dp.method", "quadratic, surface, voxel or mc"},
    {"--voxel-n", "dp.voxel_n", "voxel cells per side"},
    {"--mc-samples", "dp.mc_samples", "Monte Carlo samples"},
    {"--grid-a", "dp.grid_a", "voxel grid base path, configuration A"},
    {"--grid-b", "dp.grid_b", "voxel grid base path, configuration B"},
    {"--sweep-points", "dp.sweep_points", "displacement sweep length"},
    {"--sweep-min", "dp.sweep_min", "sweep start (dp.length_unit)"},
    {"--sweep-max", "dp.sweep_max", "sweep end (dp.length_unit)"},
    {"--convention", "convention", "penrose or diosi"},
};
const std::vector<Flag> kDecFlags = {
    {"--tau-d", "dec.tau_d", "decoherence time (s)"},
    {"--dt", "dec.dt", "step (s)"},
    {"--t-final", "dec.t_final", "duration (s)"},
    {"--trajectories", "dec.trajectories", "ensemble size"},
    {"--population0", "dec.population0", "initial population of branch 0"},
};
const std::vector<Flag> kSnFlags = {
    {"--units", "sn.units", "natural or si"},
    {"--m", "sn.m", "particle mass"},
    {"--n", "sn.n", "grid size"},
    {"--extent", "sn.extent", "radius or box side (natural length units)"},
    {"--include-self", "sn.include_self", "true or false"},
};
const std::vector<Flag> kGroundFlags = {
    {"--method", "sn.method", "imaginary_time or radial_shooting"},
    {"--dtau", "sn.dtau", "imaginary-time step"},
    {"--tolerance", "sn.tolerance", "eigenvalue change per step"},
};
const std::vector<Flag> kEvolveFlags = {
    {"--geometry", "sn.geometry", "radial or cartesian"},
    {"--sigma", "sn.sigma", "initial width"},
    {"--dt", "sn.dt", "time step"},
    {"--steps", "sn.steps", "number of steps"},
    {"--output-every", "sn.output_every", "time-series stride"},
};
const std::vector<Flag> kComFlags = {
    {"--n", "com.n", "grid points per axis"},
    {"--extent", "com.extent", "box length"},
    {"--G", "com.G", "coupling"},
    {"--eps-cells", "com.eps_cells", "softening (cells)"},
    {"--eps-cells-alt", "com.eps_cells_alt", "second softening (cells), 0 = skip"},
    {"--steps", "com.steps", "steps to overlap"},
    {"--output-every", "com.output_every", "marginal output stride"},
    {"--m1", "com.m1", "mass 1"},
    {"--m2", "com.m2", "mass 2"},
};

void bind_flags(CLI::App* app, const std::vector<Flag>& flags, std::map<std::string, std::string>& out) {
  for (const auto& f : flags) {
    const std::string key = f.key;
    app->add_option_function<std::string>(f.name, [&out, key](const std::string& v) { out[key] = v; }, f.help);
  }
}

int report(int code, const std::string& kind, const std::string& message, const std::string& output_dir) {
  const auto rec = error_record(code, kind, message);
  std::cerr << rec.dump() << '\n';
  if (!output_dir.empty()) {
    try {
      std::filesystem::create_directories(output_dir);
      write_json(std::filesystem::path(output_dir) / "error.json", rec);
    } catch (...) {
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gravdec: gravitational reduction rates, decoherence and Schrodinger-Newton tools"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, output_dir_flag;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
  app.add_option("-c,--config", config_path, "key = value configuration file");
  app.add_option("-o,--output-dir", output_dir_flag, "output directory (overrides GRAVDEC_OUTPUT_DIR)");
  app.add_option("--set", sets, "override: key=value (repeatable)");
  app.add_option_function<std::string>("--seed", [&](const std::string& v) { flags["seed"] = v; }, "RNG seed");

  auto* dp = app.add_subcommand("dp-rate", "reduction energy Delta and time tau_d for a superposed pair");
  bind_flags(dp, kDpFlags, flags);
  auto* dec = app.add_subcommand("decohere", "two-branch master equation vs stochastic unravelling");
  bind_flags(dec, kDecFlags, flags);
  auto* sn = app.add_subcommand("sn", "Schrodinger-Newton solver");
  sn->require_subcommand(1);
  bind_flags(sn, kSnFlags, flags);
  auto* gs = sn->add_subcommand("ground-state", "nodeless ground state");
  bind_flags(gs, kGroundFlags, flags);
  auto* ev = sn->add_subcommand("evolve", "split-step evolution of a Gaussian");
  bind_flags(ev, kEvolveFlags, flags);
  auto* com = app.add_subcommand("com-test", "centre-of-mass decoupling demonstration");
  bind_flags(com, kComFlags, flags);
  auto* self = app.add_subcommand("selftest", "run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  RunContext ctx;
  if (*dp) ctx.command = "dp-rate";
  else if (*dec) ctx.command = "decohere";
  else if (*gs) ctx.command = "sn ground-state";
  else if (*ev) ctx.command = "sn evolve";
  else if (*com) ctx.command = "com-test";
  else if (*self) ctx.command = "selftest";

  std::string out_dir_for_errors = output_dir_flag;
  try {
    if (!config_path.empty()) ctx.config.merge(load_config_file(config_path));
    if (const char* env = std::getenv("GRAVDEC_OUTPUT_DIR"); env && *env) ctx.config.set("output_dir", env);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
      ctx.config.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    for (const auto& [k, v] : flags) ctx.config.set(k, v);
    if (!output_dir_flag.empty()) ctx.config.set("output_dir", output_dir_flag);
    out_dir_for_errors = ctx.config.text("output_dir");
    ctx.output_dir = out_dir_for_errors;
    return dispatch(ctx);
  } catch (const UsageError& e) {
    return report(kUsage, "usage", e.what(), out_dir_for_errors);
  } catch (const InvalidInput& e) {
    return report(kInvalidParameter, "invalid_parameter", e.what(), out_dir_for_errors);
  } catch (const ConvergenceError& e) {
    return report(kNonConvergence, "non_convergence",
                  std::string(e.what()) + " (best estimate " + csv_number(e.best_estimate()) + ")",
                  out_dir_for_errors);
  } catch (const IoError& e) {
    return report(kIoError, "io_error", e.what(), "");
  } catch (const std::exception& e) {
    return report(kInternal, "internal", e.what(), out_dir_for_errors);
  }
}
