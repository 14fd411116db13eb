#pragma once

#include "aoi/aoi_metrics.hpp"

namespace aoi::energy {

struct PowerProfile {
  double p_sense_w = 1.0;
  double p_tx_w = 1.0;
  double p_rx_w = 1.0;  ///< per receive antenna

  void validate() const;
};

/// Bits/Hz/Joule: R / (P_sx + E[Z~] (P_tx + N P_rx)). Throws DivergenceError
/// for p >= 1.
double energy_efficiency(double rate_bps_hz, double p, MaxTx max_tx, int n_antennas, const PowerProfile& power);

/// AoI-to-EE ratio; divergent AoI gives a divergent ratio.
Metric eta(const Metric& avg_aoi, double ee);
Metric eta_p(const Metric& avg_paoi, double ee);

}  // namespace aoi::energy
