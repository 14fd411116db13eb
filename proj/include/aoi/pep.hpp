#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <shared_mutex>
#include <unordered_map>

#include "aoi/channel.hpp"

namespace aoi::pep {

struct PacketParams {
  double t_packet_s = 1e-3;

  void validate() const;
};

struct PepResult {
  double p = 0.0;
  /// Set when round-off pushed the raw value outside [0, 1] and it was clamped.
  bool clamped = false;
};

/// Two-state Markov packet error probability:
///   p = 1 - exp(-T_p LCR / (1 - F)) (1 - F)
/// with F, LCR evaluated at gamma_th. Returns 1 when 1 - F vanishes.
PepResult pep_detailed(const channel::FadingParams& fp, const PacketParams& pp, double gamma_th);

double pep(const channel::FadingParams& fp, const PacketParams& pp, double gamma_th);

/// Single-antenna Rayleigh special case, an upper bound over (N, K).
double pep_worst_case(double avg_snr, double doppler_hz, double t_packet_s, double gamma_th);

/// min(1, F + T_p LCR); a small-T_p approximation, not a bound.
double pep_short_packet_approx(const channel::FadingParams& fp, const PacketParams& pp, double gamma_th);

/// Memo table for pep() keyed on the exact bit patterns of every input.
/// Safe for concurrent use.
class PepCache {
 public:
  PepResult get(const channel::FadingParams& fp, const PacketParams& pp, double gamma_th);

  std::size_t size() const;
  std::uint64_t hits() const;

 private:
  using Key = std::array<std::uint64_t, 6>;
  struct KeyHash {
    std::size_t operator()(const Key& key) const noexcept;
  };

  mutable std::shared_mutex mutex_;
  std::unordered_map<Key, PepResult, KeyHash> table_;
  std::atomic<std::uint64_t> hits_{0};
};

}  // namespace aoi::pep
