#pragma once

// Monte-Carlo oracles that share no code path with the closed forms:
//  - a slot-by-slot stop-and-wait simulator that measures AoI given p;
//  - a sum-of-sinusoids Rician fading simulator that measures the SNR CDF,
//    level crossing rate and packet error rate of a time series.
//
// Every replication draws from its own RNG stream derived from the master
// seed, and results are merged in replication order, so output is
// bit-identical for any worker count.

#include <cstdint>
#include <random>
#include <vector>

#include "aoi/aoi_metrics.hpp"
#include "aoi/channel.hpp"
#include "aoi/pep.hpp"

namespace aoi::sim {

struct SimConfig {
  std::uint64_t seed = 1;
  /// Packet oracle: successful receptions per replication.
  /// Channel oracle with f_D = 0: independent channel draws per replication.
  std::uint64_t n_packets = 100000;
  /// Channel oracle with f_D > 0: simulated seconds per replication.
  double sim_duration_s = 0.0;
  std::uint64_t replication_count = 16;
  /// Channel oracle sampling step; 0 picks min(1/(64 f_D), T_p/16). Must not
  /// exceed 1/(64 f_D).
  double time_step_s = 0.0;
  int n_sinusoids = 64;
  /// 0 = hardware concurrency. Never affects results.
  unsigned workers = 0;

  void validate_packet() const;
  void validate_channel(double doppler_hz) const;
};

struct SimResult {
  double estimate = 0.0;
  /// Replication-level standard error: sd(replicate estimates) / sqrt(R).
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  bool divergence_detected = false;
};

struct PacketSimOutput {
  SimResult avg_aoi;
  SimResult avg_paoi;
  SimResult mean_y;  ///< transmissions between successes
  SimResult mean_z;  ///< transmissions of the delivered packet
  SimResult mean_x;  ///< slots between generations of delivered packets
  /// z_histogram[l-1] counts receptions with Z~ = l; last bin collects
  /// everything >= kHistogramBins when M is unbounded or large.
  std::vector<std::uint64_t> z_histogram;
};

inline constexpr std::size_t kHistogramBins = 256;

PacketSimOutput simulate_packet_process(double p, const AoiParams& params, const SimConfig& cfg);

struct FadingSimOutput {
  SimResult cdf;  ///< fraction of time with gamma < gamma_th
  SimResult lcr;  ///< down-crossings of gamma_th per second
  SimResult pep;  ///< fraction of T_p windows containing an outage instant
  double time_step_s = 0.0;
};

FadingSimOutput simulate_fading_process(const channel::FadingParams& fp, const pep::PacketParams& pp,
                                        double gamma_th, const SimConfig& cfg);

/// Independent draws of one branch's envelope |h| (unit mean power), each
/// from a fresh sum-of-sinusoids realization at a random instant.
std::vector<double> sample_branch_envelopes(const channel::FadingParams& fp, const SimConfig& cfg,
                                            std::size_t count);

/// RNG for replication `index` of a run seeded with `seed`.
std::mt19937_64 replication_rng(std::uint64_t seed, std::uint64_t index, std::uint32_t stream);

}  // namespace aoi::sim
