// pingpong: command-line front end to the level, chain and dynamics stages.
//
// Exit codes: 0 success, 2 configuration/input error, 3 numerical failure.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pingpong/pipeline.hpp"

namespace fs = std::filesystem;
using namespace pingpong;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common {
  std::string config;
  std::string system;
  std::optional<std::string> output;
  std::optional<int> jobs;
};

void add_common(CLI::App* app, Common& c, bool with_system = true) {
  app->add_option("--config", c.config, "Run configuration file (flags override its keys)")->check(CLI::ExistingFile);
  if (with_system) app->add_option("--system", c.system, "System description file");
  app->add_option("-o,--output-dir", c.output, "Output directory (default: $PINGPONG_OUTPUT_DIR, then config, then ./out)");
  app->add_option("--jobs", c.jobs, "Maximum worker count")->check(CLI::PositiveNumber);
}

RunConfig base_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_run_config(c.config);
  if (!c.system.empty()) cfg.system_file = c.system;
  if (c.jobs) cfg.jobs = *c.jobs;
  return cfg;
}

fs::path output_dir(const Common& c, const RunConfig& cfg) {
  const fs::path out = c.output ? fs::path(*c.output) : resolve_output_dir(cfg);
  fs::create_directories(out);
  return out;
}

ElectronicSystem require_system(const RunConfig& cfg) {
  if (cfg.system_file.empty()) throw ConfigError("a system file is required (--system or [run] system)");
  return io::load_system(cfg.system_file);
}

std::vector<StateLabel> parse_states(const std::vector<std::string>& items) {
  std::vector<StateLabel> out;
  for (const auto& s : items) out.push_back(parse_state(s));
  return out;
}

io::Manifest start_manifest(const std::string& command, const Common& c, const RunConfig& cfg) {
  io::Manifest m(command);
  if (!c.config.empty()) m.add_input("config", c.config);
  if (!cfg.system_file.empty() && fs::exists(cfg.system_file)) m.add_input("system", cfg.system_file);
  return m;
}

void finish(io::Manifest& m, const fs::path& out, const std::string& command) {
  m.stage(command, "ok");
  m.set_complete(true);
  m.write(out / ("manifest_" + command + ".json"));
}

std::vector<Manifold> levels_from(const std::optional<std::string>& levels_file, const RunConfig& cfg,
                                  const ElectronicSystem& system) {
  if (levels_file) return io::read_levels_binary(*levels_file);
  return solve_manifolds(system, level_keys(cfg), cfg.eig_grid, cfg.n_levels, cfg.jobs);
}

struct GridFlags {
  std::optional<double> r_min, r_max;
  std::optional<int> points;
};

void add_grid(CLI::App* app, GridFlags& g) {
  app->add_option("--r-min", g.r_min, "Grid start (bohr)");
  app->add_option("--r-max", g.r_max, "Grid end (bohr)");
  app->add_option("--points", g.points, "Grid points");
}

RadialGrid apply_grid(const GridFlags& g, const RadialGrid& base) {
  return {g.r_min.value_or(base.r_min()), g.r_max.value_or(base.r_max()), g.points.value_or(base.size())};
}

struct PulseFlags {
  std::optional<double> sigma_ps, t0_ps, area, omega0, intensity, stagger_ps, window;
};

void add_pulse(CLI::App* app, PulseFlags& p) {
  app->add_option("--sigma-ps", p.sigma_ps, "Pulse width sigma (ps)");
  app->add_option("--t0-ps", p.t0_ps, "Pulse centre (ps)");
  app->add_option("--area", p.area, "Area of the common Rabi profile (default pi/2)");
  app->add_option("--omega0-peak", p.omega0, "Peak of the common Rabi profile (hartree)");
  app->add_option("--peak-intensity", p.intensity, "Peak intensity of the strongest pulse (W/cm^2)");
  app->add_option("--stagger-ps", p.stagger_ps, "Delay between consecutive pulses (ps)");
  app->add_option("--window-sigma", p.window, "Half-width of the simulation window in sigma");
}

void apply_pulse(const PulseFlags& p, RunConfig& cfg) {
  if (p.sigma_ps) cfg.design.sigma = units::picoseconds(*p.sigma_ps);
  if (p.t0_ps) cfg.design.t0 = units::picoseconds(*p.t0_ps);
  if (p.area) cfg.design.area = *p.area;
  if (p.omega0) cfg.design.omega0_peak = *p.omega0;
  if (p.intensity) cfg.peak_intensity = *p.intensity;
  if (p.stagger_ps) cfg.design.stagger = units::picoseconds(*p.stagger_ps);
  if (p.window) cfg.window_sigma = *p.window;
}

io::ChainFile chain_arg(const std::string& path, const Common& c) {
  if (!path.empty()) return io::read_chain_file(path);
  if (!c.config.empty()) {
    const auto cfg = load_run_config(c.config);
    const auto p = resolve_output_dir(cfg) / "chain.json";
    if (fs::exists(p)) return io::read_chain_file(p);
  }
  throw ConfigError("a chain file is required (--chain)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ping-pong rovibronic population transfer: levels, chains and three dynamics tiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::kVersion);

  // levels
  Common lv_c;
  GridFlags lv_g;
  std::optional<int> lv_jmax, lv_nlev;
  auto* lv = app.add_subcommand("levels", "Solve (e, J) manifolds with the DVR; writes levels.csv and levels.bin");
  add_common(lv, lv_c);
  add_grid(lv, lv_g);
  lv->add_option("--j-max", lv_jmax, "Solve J = 0..j_max for both electronic states");
  lv->add_option("--n-levels", lv_nlev, "Levels per manifold (default: all bound levels)");

  // dme-map
  Common dm_c;
  GridFlags dm_g;
  std::optional<int> dm_jmax;
  std::optional<std::string> dm_levels;
  bool dm_svg = false;
  auto* dm = app.add_subcommand("dme-map", "Squared DME maps between X(J) and A(J+-1) as CSV (and SVG)");
  add_common(dm, dm_c);
  add_grid(dm, dm_g);
  dm->add_option("--j-max", dm_jmax, "Highest J");
  dm->add_option("--levels", dm_levels, "Reuse a levels.bin dump")->check(CLI::ExistingFile);
  dm->add_flag("--svg", dm_svg, "Also write SVG heat maps");

  // design-chain
  Common dc_c;
  GridFlags dc_g;
  PulseFlags dc_p;
  std::optional<std::string> dc_init, dc_target, dc_levels;
  std::optional<int> dc_n, dc_maxc, dc_jmax;
  std::optional<double> dc_thr, dc_mind;
  std::vector<std::string> dc_states;
  auto* dc = app.add_subcommand("design-chain", "Select the chain and design its pulse train; writes chain.json");
  add_common(dc, dc_c);
  add_grid(dc, dc_g);
  add_pulse(dc, dc_p);
  dc->add_option("--initial", dc_init, "Initial state e:v:J");
  dc->add_option("--target", dc_target, "Target state e:v:J");
  dc->add_option("-n,--n-states", dc_n, "Number of chain states N");
  dc->add_option("--states", dc_states, "Explicit chain, e.g. X:5:4 A:1:3 ... (skips the search)");
  dc->add_option("--threshold", dc_thr, "Minimum |DME| per link (a.u.)");
  dc->add_option("--min-detuning", dc_mind, "Reject chains with spectral isolation below this (hartree)");
  dc->add_option("--max-candidates", dc_maxc, "Neighbours explored per link (0 = all)");
  dc->add_option("--j-max", dc_jmax, "Highest J solved");
  dc->add_option("--levels", dc_levels, "Reuse a levels.bin dump")->check(CLI::ExistingFile);

  // simulate-pseudospin
  Common ps_c;
  std::string ps_chain;
  int ps_samples = 401;
  auto* ps = app.add_subcommand("simulate-pseudospin", "Closed-form SU(N) populations; writes trace_pseudospin.csv");
  add_common(ps, ps_c, false);
  ps->add_option("--chain", ps_chain, "Chain file")->check(CLI::ExistingFile);
  ps->add_option("--samples", ps_samples, "Sample count")->check(CLI::Range(2, 10000000));

  // simulate-rwa
  Common rw_c;
  std::string rw_chain;
  std::optional<int> rw_samples;
  std::optional<double> rw_dt;
  bool rw_cross = false;
  auto* rw = app.add_subcommand("simulate-rwa", "Integrate the RWA chain equations; writes trace_rwa.csv");
  add_common(rw, rw_c, false);
  rw->add_option("--chain", rw_chain, "Chain file")->check(CLI::ExistingFile);
  rw->add_option("--samples", rw_samples, "Sample count");
  rw->add_option("--dt", rw_dt, "Time step (a.u.)");
  rw->add_flag("--crosstalk", rw_cross, "Drive every link with every pulse, keeping the detuning phases");

  // simulate-full
  Common fu_c;
  GridFlags fu_g;
  std::string fu_chain;
  std::optional<int> fu_samples, fu_extra;
  std::optional<double> fu_dt, fu_abs_frac, fu_abs_str;
  bool fu_opp = false;
  std::vector<std::string> fu_watch;
  auto* fu = app.add_subcommand("simulate-full", "Split-operator grid propagation; writes trace_full.csv");
  add_common(fu, fu_c);
  add_grid(fu, fu_g);
  fu->add_option("--chain", fu_chain, "Chain file")->check(CLI::ExistingFile);
  fu->add_option("--samples", fu_samples, "Sample count");
  fu->add_option("--dt", fu_dt, "Time step (a.u.)");
  fu->add_option("--extra-j", fu_extra, "Extra J channels beyond the chain's range, on each side");
  fu->add_flag("--opposite-block", fu_opp, "Also propagate the opposite J-parity block");
  fu->add_option("--absorber-fraction", fu_abs_frac, "Outer grid fraction covered by the absorber");
  fu->add_option("--absorber-strength", fu_abs_str, "Absorber strength");
  fu->add_option("--watch", fu_watch, "Extra states e:v:J to project on");

  // compare
  Common cm_c;
  std::vector<std::string> cm_traces;
  auto* cm = app.add_subcommand("compare", "Overlay traces; writes compare.json and compare.svg");
  add_common(cm, cm_c, false);
  cm->add_option("traces", cm_traces, "Trace CSV files; the first is the reference")->required()->check(CLI::ExistingFile);

  // pipeline
  Common pp_c;
  std::vector<std::string> pp_stages;
  auto* pp = app.add_subcommand("pipeline", "Run the configured stages end to end; writes manifest.json");
  add_common(pp, pp_c);
  pp->add_option("--stages", pp_stages, "Subset of stages to run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*lv) {
      auto cfg = base_config(lv_c);
      cfg.eig_grid = apply_grid(lv_g, cfg.eig_grid);
      if (lv_jmax) cfg.j_max = *lv_jmax;
      if (lv_nlev) cfg.n_levels = *lv_nlev;
      if (!cfg.j_max && cfg.states.empty() && !(cfg.initial && cfg.target)) cfg.j_max = 0;
      validate(cfg);
      const auto out = output_dir(lv_c, cfg);
      auto man = start_manifest("levels", lv_c, cfg);
      const auto ms = stage_levels(cfg, require_system(cfg), out);
      man.add_output(out / "levels.csv");
      man.add_output(out / "levels.bin");
      man.metrics()["manifolds"] = ms.size();
      finish(man, out, "levels");
      std::cout << "wrote " << (out / "levels.csv").string() << " (" << ms.size() << " manifolds)\n";
    } else if (*dm) {
      auto cfg = base_config(dm_c);
      cfg.eig_grid = apply_grid(dm_g, cfg.eig_grid);
      if (dm_jmax) cfg.j_max = *dm_jmax;
      validate(cfg);
      const auto out = output_dir(dm_c, cfg);
      auto man = start_manifest("dme-map", dm_c, cfg);
      const auto system = require_system(cfg);
      const auto ms = levels_from(dm_levels, cfg, system);
      const auto stems = stage_dme_map(ms, system.dipole(), out, dm_svg);
      for (const auto& s : stems) man.add_output(out / (s + ".csv"));
      finish(man, out, "dme-map");
      std::cout << "wrote " << stems.size() << " coupling maps to " << out.string() << "\n";
    } else if (*dc) {
      auto cfg = base_config(dc_c);
      cfg.eig_grid = apply_grid(dc_g, cfg.eig_grid);
      apply_pulse(dc_p, cfg);
      if (dc_init) cfg.initial = parse_state(*dc_init);
      if (dc_target) cfg.target = parse_state(*dc_target);
      if (dc_n) cfg.n_states = *dc_n;
      if (!dc_states.empty()) cfg.states = parse_states(dc_states);
      if (dc_thr) cfg.search.threshold = *dc_thr;
      if (dc_mind) cfg.search.min_detuning = *dc_mind;
      if (dc_maxc) cfg.search.max_candidates = *dc_maxc;
      if (dc_jmax) cfg.j_max = *dc_jmax;
      validate(cfg);
      const auto out = output_dir(dc_c, cfg);
      auto man = start_manifest("design-chain", dc_c, cfg);
      const auto system = require_system(cfg);
      const CouplingMaps maps(levels_from(dc_levels, cfg, system), system.dipole());
      const auto cf = stage_design_chain(cfg, maps, out);
      man.add_output(out / "chain.json");
      man.metrics()["spectral_isolation"] = spectral_isolation(cf.chain, maps);
      finish(man, out, "design-chain");
      for (int k = 0; k < cf.chain.size(); ++k) std::cout << (k ? " -> " : "") << to_string(cf.chain.states[k]);
      std::cout << "\nwrote " << (out / "chain.json").string() << "\n";
    } else if (*ps) {
      const auto cfg = base_config(ps_c);
      const auto cf = chain_arg(ps_chain, ps_c);
      const auto out = output_dir(ps_c, cfg);
      auto man = start_manifest("simulate-pseudospin", ps_c, cfg);
      if (!ps_chain.empty()) man.add_input("chain", ps_chain);
      const auto tr = stage_pseudospin(cf, ps_samples, out);
      man.add_output(out / "trace_pseudospin.csv");
      man.metrics()["final_target"] = tr.final_populations()[cf.chain.size() - 1];
      finish(man, out, "simulate-pseudospin");
      std::cout << "final target population " << tr.final_populations()[cf.chain.size() - 1] << "\n";
    } else if (*rw) {
      auto cfg = base_config(rw_c);
      if (rw_samples) cfg.rwa.samples = *rw_samples;
      if (rw_dt) cfg.rwa.dt = *rw_dt;
      if (rw_cross) cfg.rwa.crosstalk = true;
      validate(cfg);
      const auto cf = chain_arg(rw_chain, rw_c);
      const auto out = output_dir(rw_c, cfg);
      auto man = start_manifest("simulate-rwa", rw_c, cfg);
      if (!rw_chain.empty()) man.add_input("chain", rw_chain);
      const auto tr = stage_rwa(cf, cfg.rwa, out);
      man.add_output(out / (cfg.rwa.crosstalk ? "trace_rwa_crosstalk.csv" : "trace_rwa.csv"));
      man.metrics()["final_target"] = tr.final_populations()[cf.chain.size() - 1];
      man.metrics()["crosstalk"] = cfg.rwa.crosstalk;
      finish(man, out, "simulate-rwa");
      std::cout << "final target population " << tr.final_populations()[cf.chain.size() - 1] << "\n";
    } else if (*fu) {
      auto cfg = base_config(fu_c);
      cfg.full.grid = apply_grid(fu_g, cfg.full.grid);
      if (fu_samples) cfg.full.samples = *fu_samples;
      if (fu_dt) cfg.full.dt = *fu_dt;
      if (fu_extra) cfg.full.extra_j = *fu_extra;
      if (fu_opp) cfg.full.include_opposite_block = true;
      if (fu_abs_frac) cfg.full.absorber.fraction = *fu_abs_frac;
      if (fu_abs_str) cfg.full.absorber.strength = *fu_abs_str;
      if (!fu_watch.empty()) cfg.full.watch = parse_states(fu_watch);
      validate(cfg);
      const auto cf = chain_arg(fu_chain, fu_c);
      const auto system = require_system(cfg);
      const auto out = output_dir(fu_c, cfg);
      auto man = start_manifest("simulate-full", fu_c, cfg);
      if (!fu_chain.empty()) man.add_input("chain", fu_chain);
      const auto r = stage_full(system, cf, cfg.full, out);
      man.add_output(out / "trace_full.csv");
      man.doc()["full"] = grid_summary(r, cfg.full);
      const double target = r.trace.final_populations()[cf.chain.size() - 1];
      man.metrics()["final_target"] = target;
      man.metrics()["max_leakage"] = r.max_leakage;
      finish(man, out, "simulate-full");
      std::cout << "final target population " << target << ", max leakage " << r.max_leakage << ", absorbed "
                << r.absorbed << "\n";
    } else if (*cm) {
      const auto cfg = base_config(cm_c);
      const auto out = output_dir(cm_c, cfg);
      auto man = start_manifest("compare", cm_c, cfg);
      std::vector<NamedTrace> traces;
      for (const auto& t : cm_traces) {
        traces.push_back({fs::path(t).stem().string(), read_trace_csv(t)});
        man.add_input(fs::path(t).stem().string(), t);
      }
      const auto j = stage_compare(traces, out);
      man.add_output(out / "compare.json");
      man.add_output(out / "compare.svg");
      man.metrics()["comparisons"] = j["comparisons"];
      finish(man, out, "compare");
      for (const auto& p : j["comparisons"]) {
        std::cout << p["trace"].get<std::string>() << " vs " << traces.front().name << ": max |dp| = "
                  << p["max_abs_deviation"].get<double>() << " (" << p["state"].get<std::string>() << ")\n";
      }
    } else if (*pp) {
      auto cfg = base_config(pp_c);
      if (!pp_stages.empty()) cfg.stages = pp_stages;
      std::optional<fs::path> out;
      if (pp_c.output) out = fs::path(*pp_c.output);
      auto res = run_pipeline(cfg, pp_c.config, out);
      const auto& doc = res.manifest.doc();
      std::cout << doc["metrics"].dump(2) << "\n";
      if (res.error) std::rethrow_exception(res.error);
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
