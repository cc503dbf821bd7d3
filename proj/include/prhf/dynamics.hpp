// Time stepping for the Hartree and Hartree-Fock flows.
//
//   i d/dt psi_k = sqrt(-Lap + m^2) psi_k - V psi_k [+ kappa sum_l psi_l C_lk]
//
// Strang splitting (kinetic half step, potential step, kinetic half step)
// keeps every substep unitary; RK4 integrates the full right side and is
// used as an independent cross-check.
#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "prhf/diagnostics.hpp"
#include "prhf/state.hpp"

namespace prhf {

enum class Scheme { Strang, RK4 };
std::string_view scheme_name(Scheme s);
Scheme parse_scheme(std::string_view name);

class StepSizeError : public std::invalid_argument {
 public:
  StepSizeError(const std::string& what, double dt, double dt_max)
      : std::invalid_argument(what), dt_(dt), dt_max_(dt_max) {}
  double dt() const { return dt_; }
  double dt_max() const { return dt_max_; }

 private:
  double dt_, dt_max_;
};

struct StepOptions {
  /// Drop the mean-field generator (free evolution); used to test the kinetic flow.
  bool zero_potential = false;
  /// c_stab in dt <= c_stab / (sqrt(k_max^2 + m^2) + max|V|).
  double rk4_stability = 2.8;
};

/// Largest dt accepted by step_strang: the potential phase per step stays below pi.
double strang_dt_max(const SimState& s, const StepOptions& opt = {});
double rk4_dt_max(const SimState& s, const StepOptions& opt = {});

SimState step_strang(const SimState& s, double dt, const StepOptions& opt = {});
SimState step_rk4(const SimState& s, double dt, const StepOptions& opt = {});
SimState step(Scheme scheme, const SimState& s, double dt, const StepOptions& opt = {});

struct BlowUpPolicy {
  double sigma_factor = 10.0;
  double tail_max = 0.1;
  double boundary_max = 1e-3;
};

struct TerminationReason {
  enum class Kind { Completed, BlowUpDetected, ResolutionLoss, BoundaryLeak };
  Kind kind = Kind::Completed;
  /// sigma for BlowUpDetected, tail fraction for ResolutionLoss, shell mass fraction for BoundaryLeak.
  double value = 0.0;
  double t = 0.0;
};

std::string_view termination_name(TerminationReason::Kind k);
/// 0 Completed, 2 BlowUpDetected, 3 ResolutionLoss, 4 BoundaryLeak.
int exit_code(TerminationReason::Kind k);

/// Shared collapse classification: returns Completed when no detector fires.
TerminationReason classify(const TimeSeriesRecord& r, double sigma_reference, const BlowUpPolicy& policy);

struct EvolveOptions {
  Scheme scheme = Scheme::Strang;
  /// Mass-in-ball radii; default_radii(grid) when empty.
  std::vector<double> radii;
  /// sigma(0) of the original run, so restarts use the same blow-up reference.
  std::optional<double> sigma_reference;
  StepOptions step;
  /// Called after every record, with the state it was taken from.
  std::function<void(const SimState&, const TimeSeriesRecord&)> on_record;
};

struct EvolveResult {
  std::vector<TimeSeriesRecord> records;
  SimState final_state;
  TerminationReason reason;
  double sigma_reference = 0.0;
};

/// Advances until t >= T_end or a detector fires. Records are taken at the
/// initial state, whenever step_index is a multiple of interval/dt, and at
/// the final state.
EvolveResult evolve(const SimState& s0, double T_end, double dt, double interval,
                    const BlowUpPolicy& policy = {}, const EvolveOptions& opt = {});

}  // namespace prhf
