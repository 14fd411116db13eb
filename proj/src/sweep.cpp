#include "aoi/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aoi/errors.hpp"
#include "aoi/parallel.hpp"

namespace aoi::sweep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_whole(double v) { return std::isfinite(v) && v == std::floor(v); }

}  // namespace

void Scenario::validate() const {
  fading().validate();
  pep::PacketParams{link.t_packet_s}.validate();
  if (!(link.rate_bps_hz > 0.0) || !std::isfinite(link.rate_bps_hz)) throw DomainError("rate must be finite and > 0");
  if (!std::isfinite(protocol.a)) throw DomainError("a must be finite");
  power.validate();
}

channel::FadingParams Scenario::fading() const {
  return {link.n_antennas, link.rician_k, link.avg_snr, link.doppler_hz};
}

MetricsReport evaluate(const Scenario& scenario, pep::PepCache* cache) {
  scenario.validate();
  const auto fp = scenario.fading();
  const pep::PacketParams pp{scenario.link.t_packet_s};
  const double gamma_th = channel::RateThreshold(scenario.link.rate_bps_hz).gamma_th();
  const pep::PepResult pr = cache ? cache->get(fp, pp, gamma_th) : pep::pep_detailed(fp, pp, gamma_th);

  MetricsReport report;
  report.p = pr.p;
  report.gamma_th = gamma_th;
  if (pr.clamped) report.regime_notes.emplace_back("p clamped to [0, 1]");

  report.a = scenario.protocol.couple_a_to_p ? 1.0 - pr.p : scenario.protocol.a;
  if (scenario.protocol.couple_a_to_p) report.regime_notes.emplace_back("a coupled to 1 - p");

  if (pr.p >= 1.0) {
    report.regime_notes.emplace_back("p = 1: no packet is ever delivered");
    report.ee = 0.0;
    return report;
  }

  const AoiParams params{report.a, scenario.link.t_packet_s, scenario.protocol.max_tx};
  if (!converges(pr.p, params)) {
    report.regime_notes.emplace_back("geometric series diverged (p e^{aT} >= 1)");
  } else if (uses_linear_branch(pr.p, params)) {
    report.regime_notes.emplace_back("linear branch used");
  }
  report.avg_aoi = avg_aoi(pr.p, params);
  report.avg_paoi = avg_paoi(pr.p, params);
  report.ee = energy::energy_efficiency(scenario.link.rate_bps_hz, pr.p, scenario.protocol.max_tx,
                                        scenario.link.n_antennas, scenario.power);
  report.eta = energy::eta(report.avg_aoi, report.ee);
  report.eta_p = energy::eta_p(report.avg_paoi, report.ee);
  return report;
}

std::string_view to_string(Variable v) {
  switch (v) {
    case Variable::rate: return "rate";
    case Variable::snr_db: return "snr_db";
    case Variable::max_tx: return "max_tx";
    case Variable::n_antennas: return "n_antennas";
  }
  return "?";
}

std::string_view to_string(Output o) {
  switch (o) {
    case Output::p: return "p";
    case Output::avg_aoi: return "avg_aoi";
    case Output::avg_paoi: return "avg_paoi";
    case Output::ee: return "ee";
    case Output::eta: return "eta";
    case Output::eta_p: return "eta_p";
  }
  return "?";
}

std::string_view to_string(Objective o) { return o == Objective::eta ? "eta" : "eta_p"; }

Variable parse_variable(std::string_view name) {
  for (auto v : {Variable::rate, Variable::snr_db, Variable::max_tx, Variable::n_antennas}) {
    if (to_string(v) == name) return v;
  }
  throw DomainError("unknown sweep variable '" + std::string(name) + "'");
}

Output parse_output(std::string_view name) {
  for (auto o : kAllOutputs) {
    if (to_string(o) == name) return o;
  }
  throw DomainError("unknown output '" + std::string(name) + "'");
}

Objective parse_objective(std::string_view name) {
  if (name == "eta") return Objective::eta;
  if (name == "eta_p") return Objective::eta_p;
  throw DomainError("unknown objective '" + std::string(name) + "'");
}

bool is_integer_variable(Variable v) { return v == Variable::max_tx || v == Variable::n_antennas; }

Scenario with_variable(const Scenario& base, Variable variable, double value) {
  Scenario s = base;
  switch (variable) {
    case Variable::rate:
      s.link.rate_bps_hz = value;
      break;
    case Variable::snr_db:
      if (!std::isfinite(value)) throw DomainError("snr_db must be finite");
      s.link.avg_snr = channel::db_to_linear(value);
      break;
    case Variable::max_tx:
      if (!is_whole(value) || value < 1.0) throw DomainError("max_tx values must be integers >= 1");
      s.protocol.max_tx = MaxTx::bounded(static_cast<std::uint64_t>(value));
      break;
    case Variable::n_antennas:
      if (!is_whole(value) || value < 1.0) throw DomainError("n_antennas values must be integers >= 1");
      s.link.n_antennas = static_cast<int>(value);
      break;
  }
  return s;
}

void SweepSpec::validate() const {
  if (grid.size() < 2) throw DomainError("sweep grid needs at least two points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw DomainError("sweep grid values must be finite");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("sweep grid must be strictly increasing");
    if (is_integer_variable(variable) && !is_whole(grid[i])) {
      throw DomainError("sweep grid for " + std::string(to_string(variable)) + " must hold integers");
    }
  }
  if (outputs.empty()) throw DomainError("sweep outputs must not be empty");
  fixed.validate();
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  if (spec.grid.empty()) throw DomainError("sweep grid must not be empty");
  pep::PepCache cache;
  std::vector<SweepRow> rows(spec.grid.size());
  parallel_for(rows.size(), spec.workers, [&](std::size_t i) {
    const double v = spec.grid[i];
    rows[i] = {v, evaluate(with_variable(spec.fixed, spec.variable, v), &cache)};
  });
  return rows;
}

double objective_value(const MetricsReport& report, Objective objective) {
  return (objective == Objective::eta ? report.eta : report.eta_p).value_or_inf();
}

OptimResult minimize_eta(Objective objective, Variable variable, double lo, double hi, const Scenario& fixed,
                         const MinimizeOptions& options) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) throw DomainError("bracket must be finite with lo < hi");
  if (options.grid_points < 3) throw DomainError("grid_points must be >= 3");
  if (!(options.x_tolerance > 0.0)) throw DomainError("x_tolerance must be > 0");

  pep::PepCache cache;
  auto f = [&](double x) { return objective_value(evaluate(with_variable(fixed, variable, x), &cache), objective); };

  std::vector<double> xs;
  if (is_integer_variable(variable)) {
    for (double v = std::max(1.0, std::ceil(lo)); v <= std::floor(hi); v += 1.0) xs.push_back(v);
    if (xs.empty()) throw DomainError("bracket contains no admissible integer");
  } else {
    const int n = options.grid_points;
    for (int i = 0; i < n; ++i) xs.push_back(i == n - 1 ? hi : lo + (hi - lo) * i / (n - 1));
  }

  std::vector<double> fs(xs.size());
  parallel_for(xs.size(), options.workers, [&](std::size_t i) { fs[i] = f(xs[i]); });

  const auto best_it = std::min_element(fs.begin(), fs.end());
  const std::size_t best = static_cast<std::size_t>(best_it - fs.begin());
  if (!(*best_it < kInf)) throw NoMinimumError("objective is divergent on the whole bracket");

  OptimResult result{xs[best], fs[best], lo, hi, xs.size()};
  if (is_integer_variable(variable)) return result;

  const double cell_lo = xs[best == 0 ? 0 : best - 1];
  const double cell_hi = xs[std::min(best + 1, xs.size() - 1)];
  const LineMinimum refined = golden_section(f, cell_lo, cell_hi, options.x_tolerance);
  result.evaluations += refined.evaluations;
  if (refined.fx < result.min_value) {
    result.argmin = refined.x;
    result.min_value = refined.fx;
  }
  return result;
}

}  // namespace aoi::sweep
