#include "aoi/energy.hpp"

#include <cmath>

#include "aoi/errors.hpp"

namespace aoi::energy {

namespace {

Metric ratio(const Metric& age, double ee) {
  if (age.is_divergent()) return Metric::divergent();
  if (!(ee > 0.0) || !std::isfinite(ee)) throw DomainError("energy efficiency must be finite and > 0");
  return Metric::finite(age.value() / ee);
}

}  // namespace

void PowerProfile::validate() const {
  for (double w : {p_sense_w, p_tx_w, p_rx_w}) {
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("all powers must be finite and > 0");
  }
}

double energy_efficiency(double rate_bps_hz, double p, MaxTx max_tx, int n_antennas, const PowerProfile& power) {
  power.validate();
  if (!(rate_bps_hz > 0.0)) throw DomainError("rate must be > 0");
  if (n_antennas < 1) throw DomainError("n_antennas must be >= 1");
  const double per_attempt = power.p_tx_w + n_antennas * power.p_rx_w;
  return rate_bps_hz / (power.p_sense_w + exp_z(p, max_tx) * per_attempt);
}

Metric eta(const Metric& avg_aoi, double ee) { return ratio(avg_aoi, ee); }

Metric eta_p(const Metric& avg_paoi, double ee) { return ratio(avg_paoi, ee); }

}  // namespace aoi::energy
