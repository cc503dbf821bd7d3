#include "prhf/runner.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "prhf/diagnostics.hpp"
#include "prhf/snapshot.hpp"

namespace prhf {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Object view that tracks which keys were consumed, so leftovers are errors.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "must be an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    if (!has(key)) throw ConfigError(at(key), "missing required field");
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(at(key), "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(at(key), "must be finite");
    return d;
  }
  std::optional<double> number_opt(const std::string& key) {
    return has(key) ? std::optional<double>(number(key)) : std::nullopt;
  }

  long long integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(at(key), "must be an integer");
    return v.get<long long>();
  }

  std::uint64_t unsigned_integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError(at(key), "must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(at(key), "must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(at(key), "must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "must be a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) throw ConfigError(path, message);
}

}  // namespace

RunConfig parse_config(const json& j) {
  RunConfig cfg;
  cfg.source = j;
  Section root(j, "");

  if (root.has("grid")) {
    Section s(root.raw("grid"), "grid");
    const long long n = s.integer("n");
    const double L = s.number("L");
    require(n >= 8 && n <= kMaxGridPoints && n % 2 == 0, s.at("n"),
            "must be an even integer in [8, " + std::to_string(kMaxGridPoints) + "]");
    require(L > 0.0, s.at("L"), "must be positive");
    cfg.grid = make_grid(int(n), L);
    s.finish();
  }

  if (root.has("physics")) {
    Section s(root.raw("physics"), "physics");
    cfg.has_physics = true;
    if (s.has("model")) {
      try {
        cfg.model = parse_model(s.string("model"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(s.at("model"), e.what());
      }
    }
    if (s.has("m")) cfg.mass = s.number("m");
    require(cfg.mass >= 0.0, s.at("m"), "must be >= 0");
    cfg.kappa = s.number_opt("kappa");
    cfg.negative_energy_margin = s.number_opt("negative_energy_margin");
    require(!(cfg.kappa && cfg.negative_energy_margin), s.at("kappa"),
            "give either kappa or negative_energy_margin, not both");
    if (cfg.kappa) require(*cfg.kappa > 0.0, s.at("kappa"), "must be positive");
    if (cfg.negative_energy_margin)
      require(*cfg.negative_energy_margin >= 0.0 && *cfg.negative_energy_margin < 1.0,
              s.at("negative_energy_margin"), "must lie in [0, 1)");
    if (s.has("N")) cfg.particles = int(s.integer("N"));
    require(cfg.particles >= 1, s.at("N"), "must be >= 1");
    s.finish();
  }

  if (root.has("initial_data")) {
    Section s(root.raw("initial_data"), "initial_data");
    InitialDataConfig id;
    id.kind = s.string("kind");
    if (s.has("seed")) id.seed = s.unsigned_integer("seed");
    if (id.kind == "ball_shells") {
      id.r_ball = s.number("r_ball");
      require(id.r_ball > 0.0, s.at("r_ball"), "must be positive");
      id.epsilon = s.number_opt("epsilon");
      if (id.epsilon) require(*id.epsilon > 0.0, s.at("epsilon"), "must be positive");
    } else if (id.kind == "gaussians") {
      const json& arr = s.raw("orbitals");
      require(arr.is_array() && !arr.empty(), s.at("orbitals"), "must be a non-empty array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Section o(arr[i], s.at("orbitals") + "[" + std::to_string(i) + "]");
        GaussianSpec g;
        const auto c = o.numbers("center");
        require(c.size() == 3, o.at("center"), "must have three components");
        g.center = {c[0], c[1], c[2]};
        g.width = o.number("width");
        require(g.width > 0.0, o.at("width"), "must be positive");
        o.finish();
        id.gaussians.push_back(g);
      }
    } else if (id.kind == "random_bumps") {
      require(id.seed.has_value(), s.at("seed"), "required for random_bumps");
    } else if (id.kind == "snapshot_file") {
      id.path = s.string("path");
    } else {
      throw ConfigError(s.at("kind"), "unknown kind '" + id.kind +
                                          "' (expected ball_shells, gaussians, random_bumps or snapshot_file)");
    }
    s.finish();
    cfg.initial = id;
  }

  if (root.has("integrator")) {
    Section s(root.raw("integrator"), "integrator");
    cfg.has_integrator = true;
    if (s.has("scheme")) {
      try {
        cfg.scheme = parse_scheme(s.string("scheme"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(s.at("scheme"), e.what());
      }
    }
    cfg.dt = s.number("dt");
    require(cfg.dt > 0.0, s.at("dt"), "must be positive");
    cfg.t_end = s.number("T_end");
    require(cfg.t_end >= 0.0, s.at("T_end"), "must be >= 0");
    s.finish();
  }

  if (root.has("diagnostics")) {
    Section s(root.raw("diagnostics"), "diagnostics");
    cfg.interval = s.number_opt("interval");
    if (cfg.interval) require(*cfg.interval > 0.0, s.at("interval"), "must be positive");
    if (s.has("radii")) {
      cfg.radii = s.numbers("radii");
      require(!cfg.radii.empty(), s.at("radii"), "must not be empty");
      for (double r : cfg.radii) {
        require(r > 0.0, s.at("radii"), "radii must be positive");
        if (cfg.grid) require(r < 0.5 * cfg.grid->length(), s.at("radii"), "radii must be below L/2");
      }
    }
    s.finish();
  }
  if (cfg.interval && cfg.has_integrator) {
    const double ratio = *cfg.interval / cfg.dt;
    require(ratio >= 1.0 - 1e-12 && std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio, "diagnostics.interval",
            "must be a positive integer multiple of integrator.dt");
  }

  if (root.has("policy")) {
    Section s(root.raw("policy"), "policy");
    if (s.has("sigma_factor")) cfg.policy.sigma_factor = s.number("sigma_factor");
    if (s.has("tail_max")) cfg.policy.tail_max = s.number("tail_max");
    if (s.has("boundary_max")) cfg.policy.boundary_max = s.number("boundary_max");
    require(cfg.policy.sigma_factor > 1.0, s.at("sigma_factor"), "must exceed 1");
    require(cfg.policy.tail_max > 0.0 && cfg.policy.tail_max < 1.0, s.at("tail_max"), "must lie in (0, 1)");
    require(cfg.policy.boundary_max > 0.0 && cfg.policy.boundary_max < 1.0, s.at("boundary_max"),
            "must lie in (0, 1)");
    s.finish();
  }

  if (root.has("output")) {
    Section s(root.raw("output"), "output");
    if (s.has("directory")) cfg.output_directory = s.string("directory");
    if (s.has("snapshot_every")) cfg.snapshot_every = int(s.integer("snapshot_every"));
    require(cfg.snapshot_every >= 0, s.at("snapshot_every"), "must be >= 0");
    s.finish();
  }

  auto parse_flow = [](Section& s, FlowParams& f) {
    if (s.has("tau")) f.tau = s.number("tau");
    if (s.has("tolerance")) f.tolerance = s.number("tolerance");
    if (s.has("max_iterations")) f.max_iterations = int(s.integer("max_iterations"));
    require(f.tau > 0.0, s.at("tau"), "must be positive");
    require(f.tolerance > 0.0, s.at("tolerance"), "must be positive");
    require(f.max_iterations >= 1, s.at("max_iterations"), "must be >= 1");
  };

  if (root.has("groundstate")) {
    Section s(root.raw("groundstate"), "groundstate");
    parse_flow(s, cfg.flow);
    s.finish();
  }
  cfg.flow.model = cfg.model;

  if (root.has("critical")) {
    Section s(root.raw("critical"), "critical");
    if (s.has("particles")) {
      cfg.critical_particles.clear();
      for (double p : s.numbers("particles")) {
        require(p >= 1 && p == std::floor(p), s.at("particles"), "entries must be positive integers");
        cfg.critical_particles.push_back(int(p));
      }
      require(!cfg.critical_particles.empty(), s.at("particles"), "must not be empty");
    }
    auto& b = cfg.bisection;
    if (s.has("lower")) b.lower = s.number("lower");
    if (s.has("upper")) b.upper = s.number("upper");
    if (s.has("relative_width")) b.relative_width = s.number("relative_width");
    if (s.has("max_bisections")) b.max_bisections = int(s.integer("max_bisections"));
    require(b.lower > 0.0 && b.upper > b.lower, s.at("upper"), "need 0 < lower < upper");
    require(b.relative_width > 0.0, s.at("relative_width"), "must be positive");
    parse_flow(s, b.flow);
    s.finish();
  }
  cfg.bisection.flow.model = Model::Hartree;

  if (root.has("checks")) {
    Section s(root.raw("checks"), "checks");
    auto& c = cfg.checks;
    if (s.has("corpus")) {
      const json& arr = s.raw("corpus");
      require(arr.is_array(), s.at("corpus"), "must be an array of strings");
      c.corpus.clear();
      for (const auto& v : arr) {
        require(v.is_string(), s.at("corpus"), "must be an array of strings");
        const auto name = v.get<std::string>();
        require(name == "gaussians" || name == "shells" || name == "random_bumps", s.at("corpus"),
                "unknown corpus family '" + name + "'");
        c.corpus.push_back(name);
      }
      require(!c.corpus.empty(), s.at("corpus"), "corpus must not be empty");
    }
    if (s.has("random_families")) c.random_families = int(s.integer("random_families"));
    require(c.random_families >= 0, s.at("random_families"), "must be >= 0");
    if (s.has("heuristic_kappas")) c.heuristic_kappas = s.numbers("heuristic_kappas");
    for (double k : c.heuristic_kappas) require(k > 0.0, s.at("heuristic_kappas"), "entries must be positive");
    if (s.has("seed")) c.seed = s.unsigned_integer("seed");
    if (s.has("hls_threshold")) c.hls_threshold = s.number("hls_threshold");
    if (s.has("conservation_steps")) c.conservation_steps = int(s.integer("conservation_steps"));
    require(c.conservation_steps >= 1, s.at("conservation_steps"), "must be >= 1");
    s.finish();
  }

  root.finish();
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("parse error: ") + e.what());
  }
  return parse_config(j);
}

namespace {

void need(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path, what);
}

const Grid& need_grid(const RunConfig& cfg) {
  need(cfg.grid.has_value(), "grid", "missing required section");
  return *cfg.grid;
}

std::uint64_t resolved_seed(const std::optional<std::uint64_t>& cfg_seed, const CliOverrides& cli) {
  if (cli.seed) return *cli.seed;
  return cfg_seed.value_or(0);
}

}  // namespace

SimState build_initial_state(const RunConfig& cfg, const CliOverrides& cli) {
  const Grid& g = need_grid(cfg);
  need(cfg.has_physics, "physics", "missing required section");
  need(cfg.initial.has_value(), "initial_data", "missing required section");
  const InitialDataConfig& id = *cfg.initial;
  const double kappa0 = cfg.kappa.value_or(1.0);

  SimState s;
  s.model = cfg.model;
  try {
    if (id.kind == "ball_shells") {
      s.psi = ball_shell_eigenstates(BallShellSpec{cfg.particles, id.r_ball, id.epsilon}, g, cfg.mass, kappa0);
    } else if (id.kind == "gaussians") {
      need(int(id.gaussians.size()) == cfg.particles, "initial_data.orbitals",
           "count must equal physics.N (" + std::to_string(cfg.particles) + ")");
      s.psi = gaussian_family(id.gaussians, g, cfg.mass, kappa0);
    } else if (id.kind == "random_bumps") {
      s.psi = random_bump_family(cfg.particles, g, resolved_seed(id.seed, cli), cfg.mass, kappa0);
    } else {
      LoadedSnapshot snap = load_snapshot(id.path);
      const OrbitalSet& p = snap.state.psi;
      need(p.grid() == g, "initial_data.path", "snapshot grid does not match grid section");
      need(int(p.count()) == cfg.particles, "initial_data.path", "snapshot N does not match physics.N");
      need(p.mass == cfg.mass, "initial_data.path", "snapshot mass does not match physics.m");
      s.psi = p;
      s.psi.kappa = cfg.kappa.value_or(p.kappa);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("initial_data", e.what());
  } catch (const SnapshotError& e) {
    throw ConfigError("initial_data.path", e.what());
  }
  if (cfg.negative_energy_margin) s.psi.kappa = choose_kappa_negative_energy(s.psi, *cfg.negative_energy_margin);
  return s;
}

std::string csv_header(std::size_t radii_count) {
  std::string h = "t,E,N_total,sigma,a_dilation,m_moment,gram_offdiag_max,gram_diag_dev_max";
  for (std::size_t i = 0; i < radii_count; ++i) h += ",mass_R" + std::to_string(i + 1);
  h += ",boundary_mass_fraction,spectral_tail_fraction";
  return h;
}

std::string csv_row(const TimeSeriesRecord& r) {
  std::string out;
  char buf[40];
  auto add = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (!out.empty()) out += ',';
    out += buf;
  };
  add(r.t);
  add(r.energy);
  add(r.particle_number);
  add(r.sigma);
  add(r.a_dilation);
  add(r.m_moment);
  add(r.gram_offdiag_max);
  add(r.gram_diag_dev_max);
  for (double m : r.mass_in_ball) add(m);
  add(r.boundary_mass_fraction);
  add(r.spectral_tail_fraction);
  return out;
}

namespace {

fs::path output_dir(const RunConfig& cfg, const CliOverrides& cli) {
  fs::path dir = cli.output ? fs::path(*cli.output) : fs::path(cfg.output_directory);
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json base_manifest(const RunConfig& cfg, const std::string& command) {
  json m;
  m["command"] = command;
  m["code_version"] = PRHF_VERSION;
  m["config"] = cfg.source;
  m["worker_threads"] = omp_get_max_threads();
  return m;
}

std::string snapshot_name(long step) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snapshot_%010ld.bin", step);
  return buf;
}

}  // namespace

int run_evolve(const RunConfig& cfg, const CliOverrides& cli) {
  const Grid& g = need_grid(cfg);
  need(cfg.has_integrator, "integrator", "missing required section");
  need(cfg.has_physics, "physics", "missing required section");

  SimState s0;
  std::optional<double> sigma_ref;
  json resume_info;
  if (cli.resume) {
    LoadedSnapshot snap;
    try {
      snap = load_snapshot(*cli.resume);
    } catch (const SnapshotError& e) {
      throw ConfigError("--resume", e.what());
    }
    const OrbitalSet& p = snap.state.psi;
    if (!cli.override_header) {
      need(p.grid() == g, "--resume", "snapshot grid does not match the config");
      need(snap.state.model == cfg.model, "--resume", "snapshot model does not match the config");
      need(int(p.count()) == cfg.particles, "--resume", "snapshot N does not match the config");
      need(p.mass == cfg.mass, "--resume", "snapshot mass does not match the config");
      if (cfg.kappa) need(p.kappa == *cfg.kappa, "--resume", "snapshot kappa does not match the config");
    }
    s0 = snap.state;
    if (snap.meta.sigma_reference > 0.0) sigma_ref = snap.meta.sigma_reference;
    resume_info["snapshot"] = *cli.resume;
    resume_info["t"] = snap.state.t;
    resume_info["step_index"] = snap.state.step_index;
    resume_info["previous_dt"] = snap.meta.dt;
    resume_info["dt_changed"] = snap.meta.dt != cfg.dt;
  } else {
    s0 = build_initial_state(cfg, cli);
  }

  const double interval = cfg.interval.value_or(cfg.dt);
  std::vector<double> radii = cfg.radii.empty() ? default_radii(g) : cfg.radii;
  const fs::path dir = output_dir(cfg, cli);

  std::ofstream csv(dir / "timeseries.csv", std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot write " + (dir / "timeseries.csv").string());
  csv << csv_header(radii.size()) << '\n';

  std::vector<std::string> snapshots;
  long record_count = 0;
  double sigma_for_snapshots = sigma_ref.value_or(0.0);

  EvolveOptions opt;
  opt.scheme = cfg.scheme;
  opt.radii = radii;
  opt.sigma_reference = sigma_ref;
  opt.on_record = [&](const SimState& s, const TimeSeriesRecord& r) {
    if (record_count == 0 && !sigma_ref) sigma_for_snapshots = r.sigma;
    csv << csv_row(r) << '\n';
    csv.flush();
    if (cfg.snapshot_every > 0 && record_count % cfg.snapshot_every == 0) {
      const std::string name = snapshot_name(s.step_index);
      save_snapshot((dir / name).string(), s, {cfg.dt, sigma_for_snapshots});
      snapshots.push_back(name);
    }
    ++record_count;
  };

  json manifest = base_manifest(cfg, "evolve");
  manifest["kappa"] = s0.psi.kappa;
  manifest["detector"] = {
      {"rule",
       "BlowUpDetected if sigma > sigma_factor * sigma_ref and spectral tail > tail_max; ResolutionLoss if spectral "
       "tail > tail_max; BoundaryLeak if boundary shell mass fraction > boundary_max"},
      {"spectral_tail", "fraction of sigma carried by |k| > k_nyquist/2"},
      {"boundary_shell", "cells with max_j |x_j| >= 0.4 L"},
      {"sigma_factor", cfg.policy.sigma_factor},
      {"tail_max", cfg.policy.tail_max},
      {"boundary_max", cfg.policy.boundary_max}};
  if (!resume_info.is_null()) manifest["resumed_from"] = resume_info;
  if (cli.seed) manifest["seed_override"] = *cli.seed;

  EvolveResult res;
  try {
    res = evolve(s0, cfg.t_end, cfg.dt, interval, cfg.policy, opt);
  } catch (const std::exception& e) {
    manifest["error"] = e.what();
    write_json(dir / "manifest.json", manifest);
    throw;
  }
  save_snapshot((dir / "final.bin").string(), res.final_state, {cfg.dt, res.sigma_reference});

  manifest["sigma_reference"] = res.sigma_reference;
  manifest["termination"] = {{"reason", termination_name(res.reason.kind)},
                             {"value", res.reason.value},
                             {"t", res.reason.t},
                             {"exit_code", exit_code(res.reason.kind)}};
  manifest["records"] = res.records.size();
  manifest["final_state"] = {{"t", res.final_state.t}, {"step_index", res.final_state.step_index}};
  manifest["artifacts"] = {{"timeseries", "timeseries.csv"}, {"final_snapshot", "final.bin"}, {"snapshots", snapshots}};
  write_json(dir / "manifest.json", manifest);
  std::cout << "evolve: " << termination_name(res.reason.kind) << " at t=" << res.reason.t << " ("
            << res.records.size() << " records)\n";
  return exit_code(res.reason.kind);
}

int run_initdata(const RunConfig& cfg, const CliOverrides& cli) {
  const SimState s = build_initial_state(cfg, cli);
  const fs::path dir = output_dir(cfg, cli);
  save_snapshot((dir / "initial.bin").string(), s);
  const RealDensity rho = density(s.psi);
  json report = base_manifest(cfg, "initdata");
  report["N"] = s.psi.count();
  report["kappa"] = s.psi.kappa;
  report["m"] = s.psi.mass;
  report["kinetic_energy"] = kinetic_energy(s.psi);
  report["direct_energy"] = direct_energy(rho, rho);
  report["hartree_energy"] = hartree_energy(s.psi);
  report["hartree_fock_energy"] = hartree_fock_energy(s.psi);
  report["sigma"] = sigma(s.psi);
  report["boundary_mass_fraction"] = boundary_mass_fraction(s.psi);
  report["artifacts"] = {{"snapshot", "initial.bin"}};
  write_json(dir / "initdata.json", report);
  std::cout << "initdata: N=" << s.psi.count() << " kappa=" << s.psi.kappa << " E_H=" << report["hartree_energy"]
            << "\n";
  return 0;
}

int run_groundstate(const RunConfig& cfg, const CliOverrides& cli) {
  const SimState s = build_initial_state(cfg, cli);
  FlowParams flow = cfg.flow;
  flow.model = cfg.model;
  const FlowResult fr = gradient_flow_ground_state(s.psi, flow);
  const fs::path dir = output_dir(cfg, cli);
  SimState out = s;
  out.psi = fr.psi;
  save_snapshot((dir / "groundstate.bin").string(), out);
  json report = base_manifest(cfg, "groundstate");
  report["outcome"] = flow_outcome_name(fr.outcome);
  report["converged"] = fr.converged;
  report["energy"] = fr.energy;
  report["iterations"] = fr.iterations;
  report["residual"] = fr.residual;
  report["kappa"] = s.psi.kappa;
  report["energies"] = fr.energies;
  report["artifacts"] = {{"snapshot", "groundstate.bin"}};
  write_json(dir / "groundstate.json", report);
  std::cout << "groundstate: " << flow_outcome_name(fr.outcome) << " E=" << fr.energy << " after " << fr.iterations
            << " iterations\n";
  return 0;
}

int run_critical(const RunConfig& cfg, const CliOverrides& cli) {
  const Grid& g = need_grid(cfg);
  for (int p : cfg.critical_particles) {
    try {
      shell_plan(p);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("critical.particles", e.what());
    }
  }
  json report = base_manifest(cfg, "critical");
  json results = json::array();
  for (int p : cfg.critical_particles) {
    const CriticalCouplingResult r = critical_coupling(p, cfg.mass, g, cfg.bisection);
    json hist = json::array();
    for (const auto& h : r.history)
      hist.push_back({{"coupling", h.coupling},
                      {"outcome", flow_outcome_name(h.outcome)},
                      {"iterations", h.iterations},
                      {"energy", h.energy}});
    results.push_back({{"N", p},
                       {"kappa_cr_measured", r.kappa_cr_measured},
                       {"bracket", {r.stable_side, r.collapse_side}},
                       {"monotone", r.monotone},
                       {"grid", {{"n", r.n}, {"L", r.box_length}}},
                       {"m", r.mass},
                       {"flow", {{"tau", cfg.bisection.flow.tau}, {"tolerance", cfg.bisection.flow.tolerance}}},
                       {"history", hist}});
    std::cout << "critical: N=" << p << " kappa_cr_measured=" << r.kappa_cr_measured << " bracket [" << r.stable_side
              << ", " << r.collapse_side << "]\n";
  }
  report["results"] = results;
  write_json(output_dir(cfg, cli) / "critical.json", report);
  return 0;
}

int run_checks(const RunConfig& cfg, const CliOverrides& cli) {
  const Grid g = cfg.grid.value_or(make_grid(32, 16.0));
  const ChecksConfig& c = cfg.checks;
  if (c.corpus.empty()) throw ConfigError("checks.corpus", "corpus must not be empty");
  const std::uint64_t seed = cli.seed.value_or(c.seed);

  json rows = json::array();
  bool all_pass = true;
  std::ostringstream table;
  char line[256];
  auto add = [&](const std::string& check, const std::string& witness, double lhs, double rhs, double ratio,
                 bool pass) {
    rows.push_back({{"check", check}, {"witness", witness}, {"lhs", lhs}, {"rhs", rhs}, {"ratio", ratio},
                    {"pass", pass}});
    std::snprintf(line, sizeof line, "%-14s %-36s %14.6g %14.6g %10.4f  %s\n", check.c_str(), witness.c_str(), lhs,
                  rhs, ratio, pass ? "PASS" : "FAIL");
    table << line;
    all_pass = all_pass && pass;
  };
  auto add_report = [&](const InequalityReport& r) { add(r.name, r.witness, r.lhs, r.rhs, r.ratio, r.pass); };

  // Daubechies: Gaussian, then seeded random families (orthonormal and scaled below 1).
  const double w = std::max(1.0, 3.0 * g.dx());
  const OrbitalSet gauss = gaussian_family({GaussianSpec{{0, 0, 0}, w}}, g, 0.0, 1.0);
  add_report(daubechies_check(gauss, "gaussian"));
  std::mt19937_64 rng(seed);
  for (int f = 0; f < c.random_families; ++f) {
    const int count = 1 + int(rng() % 4);
    OrbitalSet psi = random_bump_family(count, g, rng(), 0.0, 1.0);
    std::string witness = "random N=" + std::to_string(count);
    if (f % 2 == 1) {
      for (auto& orb : psi.orbitals) {
        const double scale = 0.3 + 0.7 * double(rng() % 1000) / 1000.0;
        for (auto& z : orb.values) z *= scale;
      }
      witness += " scaled";
    }
    add_report(daubechies_check(psi, witness));
  }

  // HLS corpus.
  double hls_max = 0.0;
  auto hls = [&](const RealDensity& rho, const std::string& witness) {
    const InequalityReport r = hls_check(rho, witness, c.hls_threshold);
    hls_max = std::max(hls_max, r.ratio);
    add_report(r);
  };
  for (const auto& family : c.corpus) {
    if (family == "gaussians") {
      for (double width : {1.0, 1.5}) {
        if (width < 3.0 * g.dx()) continue;
        hls(density(gaussian_family({GaussianSpec{{0, 0, 0}, width}}, g, 0.0, 1.0)), "gaussian w=" + std::to_string(width));
      }
    } else if (family == "shells") {
      for (int n : {1, 4, 9}) {
        const double R = 0.25 * g.length();
        hls(density(ball_shell_eigenstates(BallShellSpec{n, R, std::nullopt}, g, 0.0, 1.0)),
            "shells N=" + std::to_string(n));
      }
    } else {
      for (int k = 0; k < 5; ++k) {
        const int count = 1 + k % 3;
        hls(density(random_bump_family(count, g, seed + 1000 + k, 0.0, 1.0)), "random N=" + std::to_string(count));
      }
    }
  }

  // Heuristic thresholds.
  json heuristic = json::array();
  for (double kappa : c.heuristic_kappas) {
    const auto h = chandrasekhar_heuristic_kappa(kappa, 1.0, 1.0);
    heuristic.push_back({{"kappa", kappa}, {"N_cr", h.N_cr}});
    const double expected = std::pow(2.0 / kappa, 1.5);
    add("heuristic", "kappa=" + std::to_string(kappa), h.N_cr, expected, h.N_cr / expected,
        std::abs(h.N_cr - expected) <= 1e-12 * expected);
  }

  // Conservation under Strang splitting.
  {
    SimState s;
    s.psi = gaussian_family({GaussianSpec{{-0.1 * g.length(), 0, 0}, w}, GaussianSpec{{0.1 * g.length(), 0, 0}, w}},
                            g, 1.0, 0.2);
    const double n0 = particle_number(s.psi);
    const double e0 = hartree_energy(s.psi);
    const double dt = 0.25 * g.dx();
    for (int i = 0; i < c.conservation_steps; ++i) s = step_strang(s, dt);
    const Eigen::MatrixXcd G = gram(s.psi);
    const double off = std::abs(G(0, 1));
    add("charge", "strang gaussian pair", particle_number(s.psi), n0, particle_number(s.psi) / n0,
        std::abs(particle_number(s.psi) - n0) <= 1e-10 * n0);
    add("gram", "strang gaussian pair", off, 1e-10, off / 1e-10, off <= 1e-10);
    const double e1 = hartree_energy(s.psi);
    add("energy", "strang gaussian pair", e1, e0, e1 / e0, std::abs(e1 - e0) <= 1e-4 * std::abs(e0));
  }

  json report = base_manifest(cfg, "checks");
  report["grid"] = {{"n", g.n()}, {"L", g.length()}};
  report["seed"] = seed;
  report["rows"] = rows;
  report["hls_max_ratio"] = hls_max;
  report["hls_threshold"] = c.hls_threshold;
  report["heuristic"] = heuristic;
  report["all_pass"] = all_pass;
  const fs::path dir = output_dir(cfg, cli);
  write_json(dir / "checks.json", report);
  std::ofstream(dir / "checks.txt") << table.str();
  std::cout << table.str() << "hls max ratio " << hls_max << "\n" << (all_pass ? "all checks pass" : "some checks FAILED")
            << "\n";
  return all_pass ? 0 : kChecksFailedExit;
}

}  // namespace prhf
