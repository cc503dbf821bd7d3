// Configuration, scenario execution and persistence for the command line tool.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "prhf/dynamics.hpp"
#include "prhf/initial_data.hpp"
#include "prhf/variational.hpp"

namespace prhf {

/// A configuration problem, carrying the dotted path of the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::invalid_argument(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct InitialDataConfig {
  std::string kind;  // ball_shells, gaussians, random_bumps, snapshot_file
  double r_ball = 0.0;
  std::optional<double> epsilon;
  std::vector<GaussianSpec> gaussians;
  std::string path;
  std::optional<std::uint64_t> seed;
};

struct ChecksConfig {
  std::vector<std::string> corpus{"gaussians", "shells", "random_bumps"};
  int random_families = 100;
  std::vector<double> heuristic_kappas{2.0, 0.02};
  std::uint64_t seed = 1;
  double hls_threshold = kHlsThreshold;
  int conservation_steps = 20;
};

struct RunConfig {
  nlohmann::json source;

  std::optional<Grid> grid;

  bool has_physics = false;
  Model model = Model::Hartree;
  double mass = 1.0;
  std::optional<double> kappa;
  std::optional<double> negative_energy_margin;
  int particles = 1;

  std::optional<InitialDataConfig> initial;

  bool has_integrator = false;
  Scheme scheme = Scheme::Strang;
  double dt = 0.0;
  double t_end = 0.0;

  std::optional<double> interval;
  std::vector<double> radii;

  BlowUpPolicy policy;

  std::string output_directory = "prhf_out";
  /// Snapshot every k-th record; 0 writes only the final snapshot.
  int snapshot_every = 0;

  FlowParams flow;
  std::vector<int> critical_particles{1};
  BisectionParams bisection;
  ChecksConfig checks;
};

/// Parses and validates; unknown keys and out-of-range values throw ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

struct CliOverrides {
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> resume;
  /// Accept a resume snapshot whose header disagrees with the config.
  bool override_header = false;
};

/// Builds the initial state described by the config (no I/O besides snapshot_file).
SimState build_initial_state(const RunConfig& cfg, const CliOverrides& cli = {});

std::string csv_header(std::size_t radii_count);
std::string csv_row(const TimeSeriesRecord& r);

// Subcommands. Each returns the process exit status.
int run_evolve(const RunConfig& cfg, const CliOverrides& cli);
int run_groundstate(const RunConfig& cfg, const CliOverrides& cli);
int run_critical(const RunConfig& cfg, const CliOverrides& cli);
int run_checks(const RunConfig& cfg, const CliOverrides& cli);
int run_initdata(const RunConfig& cfg, const CliOverrides& cli);

/// Exit status of run_checks when any check fails.
inline constexpr int kChecksFailedExit = 5;

}  // namespace prhf
