#pragma once

// End-to-end evaluation of a link configuration (PEP -> AoI/PAoI -> EE -> eta)
// plus one-dimensional sweeps and a grid-then-golden-section minimizer.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "aoi/aoi_metrics.hpp"
#include "aoi/energy.hpp"
#include "aoi/pep.hpp"

namespace aoi::sweep {

struct LinkConfig {
  int n_antennas = 1;
  double rician_k = 0.0;
  double avg_snr = 10.0;  ///< per-branch, linear
  double doppler_hz = 0.0;
  double t_packet_s = 1e-3;
  double rate_bps_hz = 1.0;
};

struct ProtocolConfig {
  MaxTx max_tx = MaxTx::unbounded();
  double a = 0.0;
  /// Recompute a = 1 - p at every evaluation (a equals the generation rate
  /// per slot under stop-and-wait).
  bool couple_a_to_p = false;
};

struct Scenario {
  LinkConfig link;
  ProtocolConfig protocol;
  energy::PowerProfile power;

  void validate() const;
  channel::FadingParams fading() const;
};

/// Computes p, C, C_p, EE, eta and eta_p. A cache, when given, memoizes p.
MetricsReport evaluate(const Scenario& scenario, pep::PepCache* cache = nullptr);

enum class Variable { rate, snr_db, max_tx, n_antennas };
enum class Output { p, avg_aoi, avg_paoi, ee, eta, eta_p };

std::string_view to_string(Variable v);
std::string_view to_string(Output o);
/// Throw DomainError on unknown names.
Variable parse_variable(std::string_view name);
Output parse_output(std::string_view name);

inline const std::vector<Output> kAllOutputs{Output::p,  Output::avg_aoi, Output::avg_paoi,
                                             Output::ee, Output::eta,     Output::eta_p};

bool is_integer_variable(Variable v);

/// Copy of `base` with `variable` set to `value` (dB for snr_db).
Scenario with_variable(const Scenario& base, Variable variable, double value);

struct SweepSpec {
  Variable variable = Variable::rate;
  std::vector<double> grid;
  Scenario fixed;
  std::vector<Output> outputs = kAllOutputs;
  unsigned workers = 0;

  /// Strict form used for user-supplied specs: grid strictly increasing
  /// with at least two points, integer variables on integer values.
  void validate() const;
};

struct SweepRow {
  double value;
  MetricsReport report;
};

/// One row per grid value, in grid order. Divergent points are kept and
/// flagged. Accepts any non-empty grid of admissible values.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// The requested objective of a report, +inf when divergent.
enum class Objective { eta, eta_p };
std::string_view to_string(Objective o);
Objective parse_objective(std::string_view name);
double objective_value(const MetricsReport& report, Objective objective);

struct OptimResult {
  double argmin = 0.0;
  double min_value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t evaluations = 0;
};

struct MinimizeOptions {
  int grid_points = 64;
  double x_tolerance = 1e-4;
  unsigned workers = 0;
};

/// Heuristic global search for a possibly non-convex objective: scan a
/// uniform grid, then golden-section refine inside the cells adjacent to the
/// best grid point. Integer variables are scanned exhaustively. Throws
/// NoMinimumError if every evaluation is divergent.
OptimResult minimize_eta(Objective objective, Variable variable, double lo, double hi, const Scenario& fixed,
                         const MinimizeOptions& options = {});

/// Golden-section search for a minimum of f on [lo, hi]; stops when the
/// bracket is narrower than tol. Returns the best point evaluated.
struct LineMinimum {
  double x;
  double fx;
  std::size_t evaluations;
};

template <typename F>
LineMinimum golden_section(F&& f, double lo, double hi, double tol);

}  // namespace aoi::sweep

#include "aoi/detail/golden_section.inl"
