#include "aoi/pep.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include "aoi/errors.hpp"

namespace aoi::pep {

void PacketParams::validate() const {
  if (!(t_packet_s > 0.0) || !std::isfinite(t_packet_s)) throw DomainError("t_packet_s must be finite and > 0");
}

PepResult pep_detailed(const channel::FadingParams& fp, const PacketParams& pp, double gamma_th) {
  pp.validate();
  const double survival = channel::snr_ccdf(fp, gamma_th);
  if (survival <= 4.0 * std::numeric_limits<double>::epsilon()) return {1.0, false};
  // Both tails directly: 1 - S loses every digit of a tiny F.
  const double cdf = channel::snr_cdf(fp, gamma_th);

  const double rate = channel::lcr(fp, gamma_th);
  // 1 - S e^{-x} = F + S (1 - e^{-x})
  const double raw = cdf - survival * std::expm1(-pp.t_packet_s * rate / survival);
  const double p = std::clamp(raw, 0.0, 1.0);
  return {p, p != raw};
}

double pep(const channel::FadingParams& fp, const PacketParams& pp, double gamma_th) {
  return pep_detailed(fp, pp, gamma_th).p;
}

double pep_worst_case(double avg_snr, double doppler_hz, double t_packet_s, double gamma_th) {
  if (!(avg_snr > 0.0)) throw DomainError("avg_snr must be > 0");
  if (!(doppler_hz >= 0.0)) throw DomainError("doppler_hz must be >= 0");
  if (!(t_packet_s > 0.0)) throw DomainError("t_packet_s must be > 0");
  if (!(gamma_th >= 0.0)) throw DomainError("gamma_th must be >= 0");
  const double exponent =
      (doppler_hz * t_packet_s * std::sqrt(2.0 * std::numbers::pi * gamma_th * avg_snr) + gamma_th) / avg_snr;
  return std::clamp(-std::expm1(-exponent), 0.0, 1.0);
}

double pep_short_packet_approx(const channel::FadingParams& fp, const PacketParams& pp, double gamma_th) {
  pp.validate();
  return std::min(1.0, channel::snr_cdf(fp, gamma_th) + pp.t_packet_s * channel::lcr(fp, gamma_th));
}

std::size_t PepCache::KeyHash::operator()(const Key& key) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto word : key) {
    h ^= word + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

PepResult PepCache::get(const channel::FadingParams& fp, const PacketParams& pp, double gamma_th) {
  const Key key{static_cast<std::uint64_t>(fp.n_antennas),   std::bit_cast<std::uint64_t>(fp.rician_k),
                std::bit_cast<std::uint64_t>(fp.avg_snr),    std::bit_cast<std::uint64_t>(fp.doppler_hz),
                std::bit_cast<std::uint64_t>(pp.t_packet_s), std::bit_cast<std::uint64_t>(gamma_th)};
  {
    std::shared_lock lock(mutex_);
    if (auto it = table_.find(key); it != table_.end()) {
      hits_.fetch_add(1, std::memory_order_relaxed);
      return it->second;
    }
  }
  const PepResult result = pep_detailed(fp, pp, gamma_th);
  std::unique_lock lock(mutex_);
  table_.emplace(key, result);
  return result;
}

std::size_t PepCache::size() const {
  std::shared_lock lock(mutex_);
  return table_.size();
}

std::uint64_t PepCache::hits() const { return hits_.load(std::memory_order_relaxed); }

}  // namespace aoi::pep
