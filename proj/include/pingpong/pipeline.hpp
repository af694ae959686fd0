#pragma once

// Run configuration and the stages of the end-to-end pipeline:
// levels -> dme-map -> design-chain -> simulate-{pseudospin,rwa,full} -> compare.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pingpong/chain.hpp"
#include "pingpong/coupling.hpp"
#include "pingpong/dvr.hpp"
#include "pingpong/grid_dynamics.hpp"
#include "pingpong/io/chain_file.hpp"
#include "pingpong/io/ini.hpp"
#include "pingpong/io/levels_file.hpp"
#include "pingpong/io/manifest.hpp"
#include "pingpong/io/svg.hpp"
#include "pingpong/io/system_file.hpp"
#include "pingpong/pseudospin.hpp"
#include "pingpong/rwa_dynamics.hpp"
#include "pingpong/trace.hpp"
#include "pingpong/units.hpp"

namespace pingpong {

inline constexpr const char* kOutputDirEnv = "PINGPONG_OUTPUT_DIR";

inline const std::vector<std::string>& pipeline_stages() {
  static const std::vector<std::string> s{"levels",           "dme-map",      "design-chain", "simulate-pseudospin",
                                          "simulate-rwa",     "simulate-full", "compare"};
  return s;
}

struct RunConfig {
  std::filesystem::path system_file;
  std::filesystem::path output_dir = "out";
  std::vector<std::string> stages = pipeline_stages();
  int jobs = 1;

  // levels
  RadialGrid eig_grid = RadialGrid::eigensolver_default();
  std::optional<int> j_max;  // default: highest J any chain between the endpoints can visit
  std::optional<int> n_levels;

  // chain
  std::optional<StateLabel> initial;
  std::optional<StateLabel> target;
  int n_states = 0;
  std::vector<StateLabel> states;  // explicit chain; skips the search
  ChainSearchOptions search;

  // pulses
  PulseDesign design;
  std::optional<double> peak_intensity;  // W/cm^2 of the strongest pulse; overrides area
  std::optional<double> window_sigma;    // half-width of the simulation window in sigma

  // dynamics
  RwaOptions rwa;
  PropagationConfig full;
  int analytic_samples = 401;
};

/// Parses a run file. Relative paths resolve against the file's directory.
inline RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file '" + path.string() + "' does not exist");
  const auto f = io::IniFile::load(path);
  f.check_sections({"run", "levels", "chain", "pulses", "rwa", "full"});
  f.check_keys("run", {"system", "output_dir", "stages", "jobs"});
  f.check_keys("levels", {"r_min", "r_max", "points", "j_max", "n_levels"});
  f.check_keys("chain", {"initial", "target", "n", "states", "threshold", "min_detuning", "max_candidates"});
  f.check_keys("pulses", {"sigma_ps", "t0_ps", "area", "omega0_peak", "peak_intensity_wcm2", "stagger_ps",
                          "window_sigma", "samples"});
  f.check_keys("rwa", {"samples", "dt", "crosstalk"});
  f.check_keys("full", {"r_min", "r_max", "points", "dt", "samples", "extra_j", "opposite_block",
                        "absorber_fraction", "absorber_strength", "watch"});

  RunConfig c;
  auto wrap = [&](auto&& fn) {
    try {
      return fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  };
  if (auto p = f.get_path("run", "system")) c.system_file = *p;
  if (auto p = f.get_path("run", "output_dir")) c.output_dir = *p;
  if (auto s = f.get_list("run", "stages"); !s.empty()) c.stages = s;
  c.jobs = f.get_int("run", "jobs", 1);

  const auto def = RadialGrid::eigensolver_default();
  c.eig_grid = wrap([&] {
    return RadialGrid(f.get_double("levels", "r_min", def.r_min()), f.get_double("levels", "r_max", def.r_max()),
                      f.get_int("levels", "points", def.size()));
  });
  c.j_max = f.get_int("levels", "j_max");
  c.n_levels = f.get_int("levels", "n_levels");

  wrap([&] {
    if (auto s = f.raw("chain", "initial")) c.initial = parse_state(*s);
    if (auto s = f.raw("chain", "target")) c.target = parse_state(*s);
    for (const auto& s : f.get_list("chain", "states")) c.states.push_back(parse_state(s));
    return 0;
  });
  c.n_states = f.get_int("chain", "n", 0);
  c.search.threshold = f.get_double("chain", "threshold", c.search.threshold);
  c.search.min_detuning = f.get_double("chain", "min_detuning", c.search.min_detuning);
  c.search.max_candidates = f.get_int("chain", "max_candidates", c.search.max_candidates);

  if (auto v = f.get_double("pulses", "sigma_ps")) c.design.sigma = units::picoseconds(*v);
  if (auto v = f.get_double("pulses", "t0_ps")) c.design.t0 = units::picoseconds(*v);
  if (auto v = f.get_double("pulses", "area")) c.design.area = *v;
  if (auto v = f.get_double("pulses", "omega0_peak")) c.design.omega0_peak = *v;
  if (auto v = f.get_double("pulses", "stagger_ps")) c.design.stagger = units::picoseconds(*v);
  c.peak_intensity = f.get_double("pulses", "peak_intensity_wcm2");
  c.window_sigma = f.get_double("pulses", "window_sigma");
  c.analytic_samples = f.get_int("pulses", "samples", c.analytic_samples);

  c.rwa.samples = f.get_int("rwa", "samples", c.rwa.samples);
  c.rwa.dt = f.get_double("rwa", "dt");
  c.rwa.crosstalk = f.get_bool("rwa", "crosstalk", false);

  const auto pdef = RadialGrid::propagation_default();
  c.full.grid = wrap([&] {
    return RadialGrid(f.get_double("full", "r_min", pdef.r_min()), f.get_double("full", "r_max", pdef.r_max()),
                      f.get_int("full", "points", pdef.size()));
  });
  c.full.dt = f.get_double("full", "dt");
  c.full.samples = f.get_int("full", "samples", c.full.samples);
  c.full.extra_j = f.get_int("full", "extra_j", 0);
  c.full.include_opposite_block = f.get_bool("full", "opposite_block", false);
  c.full.absorber.fraction = f.get_double("full", "absorber_fraction", c.full.absorber.fraction);
  c.full.absorber.strength = f.get_double("full", "absorber_strength", c.full.absorber.strength);
  wrap([&] {
    for (const auto& s : f.get_list("full", "watch")) c.full.watch.push_back(parse_state(s));
    return 0;
  });
  return c;
}

/// Output directory: the environment override wins over the config value.
inline std::filesystem::path resolve_output_dir(const RunConfig& c) {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return c.output_dir;
}

/// Checks parameter ranges before any computation.
inline void validate(const RunConfig& c) {
  if (c.jobs < 1) throw ConfigError("jobs must be at least 1");
  if (c.n_levels && *c.n_levels <= 0) throw ConfigError("n_levels must be positive");
  if (c.j_max && *c.j_max < 0) throw ConfigError("j_max must be non-negative");
  if (!(c.design.sigma > 0.0)) throw ConfigError("pulse sigma must be positive");
  if (c.design.omega0_peak && !(*c.design.omega0_peak > 0.0)) throw ConfigError("omega0_peak must be positive");
  if (c.peak_intensity && !(*c.peak_intensity > 0.0)) throw ConfigError("peak intensity must be positive");
  if (c.window_sigma && !(*c.window_sigma > 0.0)) throw ConfigError("window_sigma must be positive");
  if (c.rwa.samples < 2 || c.full.samples < 2 || c.analytic_samples < 2) throw ConfigError("need at least two samples");
  if (c.full.absorber.fraction < 0.0 || c.full.absorber.fraction >= 1.0) {
    throw ConfigError("absorber fraction must lie in [0, 1)");
  }
  if (c.full.absorber.strength < 0.0) throw ConfigError("absorber strength must be non-negative");
  for (const auto& s : c.stages) {
    if (std::find(pipeline_stages().begin(), pipeline_stages().end(), s) == pipeline_stages().end()) {
      throw ConfigError("unknown stage '" + s + "'");
    }
  }
  if (!c.states.empty()) {
    if (c.states.size() < 2) throw ConfigError("an explicit chain needs at least two states");
    if (c.n_states != 0 && c.n_states != static_cast<int>(c.states.size())) {
      throw ConfigError("n does not match the number of listed chain states");
    }
  }
  if (!c.system_file.empty() && !std::filesystem::exists(c.system_file)) {
    throw ConfigError("system file '" + c.system_file.string() + "' does not exist");
  }
}

// ---------------------------------------------------------------------------
// Stages

/// Manifolds solved by the levels stage: X and A for J = 0..j_max.
inline std::vector<std::pair<Electronic, int>> level_keys(const RunConfig& c) {
  int jmax = 0;
  if (c.j_max) {
    jmax = *c.j_max;
  } else if (!c.states.empty()) {
    for (const auto& s : c.states) jmax = std::max(jmax, s.J + 1);
  } else if (c.initial && c.target && c.n_states >= 2) {
    jmax = (c.initial->J + c.target->J + c.n_states - 1) / 2;
  } else {
    throw ConfigError("cannot infer j_max: give j_max, an explicit chain, or endpoints and N");
  }
  std::vector<std::pair<Electronic, int>> keys;
  for (int J = 0; J <= jmax; ++J) {
    keys.emplace_back(Electronic::X, J);
    keys.emplace_back(Electronic::A, J);
  }
  return keys;
}

inline std::vector<Manifold> stage_levels(const RunConfig& c, const ElectronicSystem& system,
                                          const std::filesystem::path& out) {
  auto ms = solve_manifolds(system, level_keys(c), c.eig_grid, c.n_levels, c.jobs);
  io::write_levels_csv(out / "levels.csv", ms);
  io::write_levels_binary(out / "levels.bin", ms);
  return ms;
}

inline std::string map_name(const CouplingMap& m) {
  return "dme_" + std::string(to_string(m.e1)) + std::to_string(m.J1) + "_" + std::string(to_string(m.e2)) + std::to_string(m.J2);
}

/// Squared-DME matrix: header v', one row per v.
inline void write_map_csv(const std::filesystem::path& path, const CouplingMap& m) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  const auto sq = m.squared();
  out << "v\\v'";
  for (Eigen::Index j = 0; j < sq.cols(); ++j) out << ',' << j;
  out << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < sq.rows(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < sq.cols(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.10e", sq(i, j));
      out << buf;
    }
    out << '\n';
  }
}

/// Maps between X(J) and A(J +- 1) for every solved pair; returns the file stems written.
inline std::vector<std::string> stage_dme_map(const std::vector<Manifold>& manifolds, const DipoleFunction& d,
                                              const std::filesystem::path& out, bool svg) {
  std::vector<std::string> written;
  for (const auto& mx : manifolds) {
    if (mx.e != Electronic::X) continue;
    for (const auto& ma : manifolds) {
      if (ma.e != Electronic::A || std::abs(ma.J - mx.J) != 1) continue;
      const auto map = coupling_map(mx, ma, d);
      const auto stem = map_name(map);
      write_map_csv(out / (stem + ".csv"), map);
      if (svg) {
        io::write_svg(out / (stem + ".svg"),
                      io::heatmap_svg(map.squared(),
                                      "|d|^2 X(J=" + std::to_string(mx.J) + ") - A(J=" + std::to_string(ma.J) + ")",
                                      "v (X)", "v' (A)"));
      }
      written.push_back(stem);
    }
  }
  return written;
}

inline PulseDesign effective_design(const RunConfig& c, const ChainSpec& chain) {
  PulseDesign d = c.design;
  if (c.peak_intensity) d.omega0_peak = omega0_for_peak_intensity(chain, *c.peak_intensity);
  if (c.window_sigma) {
    const double t0 = d.t0.value_or(2.5 * d.sigma);
    d.t0 = t0;
    d.t_start = t0 - *c.window_sigma * d.sigma;
    d.t_end = t0 + *c.window_sigma * d.sigma + std::max(0, chain.links() - 1) * d.stagger;
  }
  return d;
}

inline io::ChainFile make_chain_file(const ChainSpec& chain, const PulseDesign& d) {
  io::ChainFile cf;
  cf.chain = chain;
  cf.train = build_pulse_train(chain, d);
  cf.omega0_peak = design_omega0(d);
  cf.area = cf.omega0_peak * d.sigma * gaussian4_integral();
  return cf;
}

inline io::ChainFile stage_design_chain(const RunConfig& c, const CouplingMaps& maps,
                                        const std::filesystem::path& out) {
  ChainSpec chain;
  if (!c.states.empty()) {
    chain = chain_from_states(maps, c.states, c.search.threshold);
  } else {
    if (!c.initial || !c.target || c.n_states < 2) {
      throw ConfigError("design-chain needs initial, target and N >= 2, or an explicit state list");
    }
    chain = design_chain(maps, *c.initial, *c.target, c.n_states, c.search);
  }
  auto cf = make_chain_file(chain, effective_design(c, chain));
  io::write_chain_file(out / "chain.json", cf);
  return cf;
}

inline PopulationTrace stage_pseudospin(const io::ChainFile& cf, int samples, const std::filesystem::path& out) {
  const auto times = sample_times(cf.train, samples);
  auto tr = trace_analytic(cf.chain, cf.train, times);
  write_trace_csv((out / "trace_pseudospin.csv").string(), tr);
  return tr;
}

inline PopulationTrace stage_rwa(const io::ChainFile& cf, const RwaOptions& opt, const std::filesystem::path& out) {
  auto tr = integrate_rwa(cf.chain, cf.train, opt);
  write_trace_csv((out / (opt.crosstalk ? "trace_rwa_crosstalk.csv" : "trace_rwa.csv")).string(), tr);
  return tr;
}

inline nlohmann::json grid_summary(const GridResult& r, const PropagationConfig& cfg) {
  nlohmann::json ch = nlohmann::json::array();
  for (const auto& c : r.channels) ch.push_back(to_string(c));
  return {{"grid", {{"r_min", cfg.grid.r_min()}, {"r_max", cfg.grid.r_max()}, {"points", cfg.grid.size()}}},
          {"dt_au", r.dt},
          {"steps", r.steps},
          {"channels", ch},
          {"absorber", {{"fraction", cfg.absorber.fraction}, {"strength", cfg.absorber.strength}}},
          {"norm_budget",
           {{"final_norm", r.final_norm}, {"absorbed", r.absorbed}, {"max_error", r.max_budget_error}}},
          {"max_leakage", r.max_leakage}};
}

inline GridResult stage_full(const ElectronicSystem& system, const io::ChainFile& cf, const PropagationConfig& cfg,
                             const std::filesystem::path& out) {
  auto r = propagate(system, cf.chain, cf.train, cfg);
  write_trace_csv((out / "trace_full.csv").string(), r.trace);
  return r;
}

// ---------------------------------------------------------------------------
// Cross-tier comparison

/// Linear interpolation of column `col` of `tr` at time t (clamped to the ends).
inline double interpolate(const PopulationTrace& tr, Eigen::Index col, double t) {
  const auto& ts = tr.times;
  if (t <= ts.front()) return tr.populations(0, col);
  if (t >= ts.back()) return tr.populations(tr.samples() - 1, col);
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const auto i = static_cast<Eigen::Index>(it - ts.begin());
  const double f = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
  return (1.0 - f) * tr.populations(i - 1, col) + f * tr.populations(i, col);
}

struct Deviation {
  double max_abs = 0.0;
  double at_time = 0.0;
  std::string state;
};

/// Largest |p_ref - p_other| over the reference samples and the states both traces carry.
inline Deviation max_deviation(const PopulationTrace& ref, const PopulationTrace& other) {
  Deviation d;
  bool any = false;
  for (std::size_t a = 0; a < ref.states.size(); ++a) {
    auto it = std::find(other.states.begin(), other.states.end(), ref.states[a]);
    if (it == other.states.end()) continue;
    any = true;
    const auto b = static_cast<Eigen::Index>(it - other.states.begin());
    for (int i = 0; i < ref.samples(); ++i) {
      const double dev = std::abs(ref.populations(i, static_cast<Eigen::Index>(a)) - interpolate(other, b, ref.times[i]));
      if (dev > d.max_abs) d = {dev, ref.times[i], to_string(ref.states[a])};
    }
  }
  if (!any) throw DomainError("traces share no states");
  return d;
}

struct NamedTrace {
  std::string name;
  PopulationTrace trace;
};

/// Pairwise deviations against the first trace plus an overlay plot.
inline nlohmann::json stage_compare(const std::vector<NamedTrace>& traces, const std::filesystem::path& out) {
  if (traces.size() < 2) throw ConfigError("compare needs at least two traces");
  nlohmann::json j;
  j["reference"] = traces.front().name;
  nlohmann::json pairs = nlohmann::json::array();
  for (std::size_t k = 1; k < traces.size(); ++k) {
    const auto d = max_deviation(traces.front().trace, traces[k].trace);
    const Eigen::VectorXd fin = traces[k].trace.final_populations();
    pairs.push_back({{"trace", traces[k].name},
                     {"max_abs_deviation", d.max_abs},
                     {"state", d.state},
                     {"t_ps", units::to_picoseconds(d.at_time)},
                     {"final_populations", std::vector<double>(fin.data(), fin.data() + fin.size())}});
  }
  j["comparisons"] = pairs;
  std::vector<io::Series> series;
  for (std::size_t k = 0; k < traces.size(); ++k) {
    const auto& tr = traces[k].trace;
    std::vector<double> tps;
    for (double t : tr.times) tps.push_back(units::to_picoseconds(t));
    for (std::size_t s = 0; s < tr.states.size() && s < traces.front().trace.states.size(); ++s) {
      io::Series ser{traces[k].name + " " + to_string(tr.states[s]), tps, {}, k > 0};
      for (int i = 0; i < tr.samples(); ++i) ser.y.push_back(tr.populations(i, static_cast<Eigen::Index>(s)));
      series.push_back(std::move(ser));
    }
  }
  io::write_svg(out / "compare.svg", io::line_plot_svg(series, "Chain populations", "t (ps)", "population"));
  std::ofstream(out / "compare.json") << j.dump(2) << '\n';
  return j;
}

// ---------------------------------------------------------------------------
// Whole pipeline

struct PipelineResult {
  io::Manifest manifest{"pipeline"};
  std::exception_ptr error;
};

/// Runs the configured stages in order. A failing stage stops the run; the
/// manifest records what completed and the diagnostic.
inline PipelineResult run_pipeline(const RunConfig& cfg, const std::filesystem::path& config_file = {},
                                   const std::optional<std::filesystem::path>& output_dir = std::nullopt) {
  PipelineResult res;
  auto& man = res.manifest;
  const auto out = output_dir.value_or(resolve_output_dir(cfg));
  std::string current = "configure";
  try {
    validate(cfg);
    std::filesystem::create_directories(out);
    if (!config_file.empty()) man.add_input("config", config_file);
    man.doc()["output_dir"] = out.string();
    man.doc()["stages_requested"] = cfg.stages;
    auto wants = [&](const char* s) { return std::find(cfg.stages.begin(), cfg.stages.end(), s) != cfg.stages.end(); };

    std::optional<ElectronicSystem> system;
    if (!cfg.system_file.empty()) {
      man.add_input("system", cfg.system_file);
      system = io::load_system(cfg.system_file);
    }
    auto need_system = [&]() -> const ElectronicSystem& {
      if (!system) throw ConfigError("stage '" + current + "' needs a system file");
      return *system;
    };
    man.stage("configure", "ok");

    std::vector<Manifold> manifolds;
    std::optional<io::ChainFile> chain;
    std::vector<NamedTrace> traces;

    if (wants("levels") || wants("dme-map") || wants("design-chain")) {
      current = "levels";
      manifolds = stage_levels(cfg, need_system(), out);
      man.add_output(out / "levels.csv");
      man.metrics()["manifolds"] = manifolds.size();
      man.stage(current, "ok");
    }
    if (wants("dme-map")) {
      current = "dme-map";
      for (const auto& stem : stage_dme_map(manifolds, need_system().dipole(), out, true)) {
        man.add_output(out / (stem + ".csv"));
      }
      man.stage(current, "ok");
    }
    if (wants("design-chain")) {
      current = "design-chain";
      const CouplingMaps maps(manifolds, need_system().dipole());
      chain = stage_design_chain(cfg, maps, out);
      man.add_output(out / "chain.json");
      std::vector<std::string> labels;
      for (const auto& s : chain->chain.states) labels.push_back(to_string(s));
      man.metrics()["chain"] = labels;
      man.metrics()["spectral_isolation"] = spectral_isolation(chain->chain, maps);
      man.stage(current, "ok");
    } else if (std::filesystem::exists(out / "chain.json")) {
      chain = io::read_chain_file(out / "chain.json");
      man.add_input("chain", out / "chain.json");
    }
    auto need_chain = [&]() -> const io::ChainFile& {
      if (!chain) throw ConfigError("stage '" + current + "' needs a designed chain");
      return *chain;
    };
    if (wants("simulate-pseudospin")) {
      current = "simulate-pseudospin";
      auto tr = stage_pseudospin(need_chain(), cfg.analytic_samples, out);
      man.add_output(out / "trace_pseudospin.csv");
      man.metrics()["pseudospin_final_target"] = tr.final_populations()[tr.states.size() - 1];
      traces.push_back({"pseudospin", std::move(tr)});
      man.stage(current, "ok");
    }
    if (wants("simulate-rwa")) {
      current = "simulate-rwa";
      auto tr = stage_rwa(need_chain(), cfg.rwa, out);
      man.add_output(out / (cfg.rwa.crosstalk ? "trace_rwa_crosstalk.csv" : "trace_rwa.csv"));
      man.metrics()["rwa_final_target"] = tr.final_populations()[tr.states.size() - 1];
      traces.push_back({"rwa", std::move(tr)});
      man.stage(current, "ok");
    }
    if (wants("simulate-full")) {
      current = "simulate-full";
      const auto& cf = need_chain();
      auto r = stage_full(need_system(), cf, cfg.full, out);
      man.add_output(out / "trace_full.csv");
      const auto n = static_cast<Eigen::Index>(cf.chain.size());
      auto summary = grid_summary(r, cfg.full);
      summary["final_target_population"] = r.trace.final_populations()[n - 1];
      man.doc()["full"] = summary;
      man.metrics()["full_final_target"] = r.trace.final_populations()[n - 1];
      man.metrics()["full_max_leakage"] = r.max_leakage;
      double inter = 0.0;
      for (Eigen::Index s = 1; s + 1 < n; ++s) inter = std::max(inter, r.trace.populations.col(s).maxCoeff());
      man.metrics()["full_max_intermediate"] = inter;
      traces.push_back({"full", std::move(r.trace)});
      man.stage(current, "ok");
    }
    if (wants("compare")) {
      current = "compare";
      if (traces.size() < 2) throw ConfigError("compare needs at least two simulated tiers in this run");
      auto j = stage_compare(traces, out);
      man.add_output(out / "compare.json");
      for (const auto& p : j["comparisons"]) {
        man.metrics()["max_deviation_" + p["trace"].get<std::string>() + "_vs_" + traces.front().name] =
            p["max_abs_deviation"];
      }
      man.stage(current, "ok");
    }
    man.set_complete(true);
  } catch (const std::exception& e) {
    man.stage(current, "failed", e.what());
    res.error = std::current_exception();
  }
  try {
    if (std::filesystem::exists(out)) man.write(out / "manifest.json");
  } catch (const std::exception&) {
    if (!res.error) res.error = std::current_exception();
  }
  return res;
}

}  // namespace pingpong
