#pragma once

// Post-MRC SNR statistics over N independent Rician branches. All SNR values
// are linear scale; avg_snr is the per-branch mean SNR.

namespace aoi::channel {

struct FadingParams {
  int n_antennas = 1;
  double rician_k = 0.0;  ///< linear; 0 is Rayleigh
  double avg_snr = 1.0;   ///< per-branch, linear
  double doppler_hz = 0.0;

  /// Throws DomainError on any violated field invariant.
  void validate() const;
};

/// K below this is evaluated with the Rayleigh closed forms.
inline constexpr double kRayleighThreshold = 1e-12;

class RateThreshold {
 public:
  /// gamma_th = 2^R - 1. Throws DomainError unless R > 0.
  explicit RateThreshold(double rate_bps_hz);

  double rate_bps_hz() const noexcept { return rate_; }
  double gamma_th() const noexcept { return gamma_th_; }

 private:
  double rate_;
  double gamma_th_;
};

double db_to_linear(double db);

/// F_gamma(gamma_th) = 1 - Q_N(sqrt(2NK), sqrt(2 gamma_th (K+1) / avg_snr)).
double snr_cdf(const FadingParams& fp, double gamma_th);

/// 1 - F_gamma(gamma_th), computed directly.
double snr_ccdf(const FadingParams& fp, double gamma_th);

/// Down-crossing rate of gamma_th per second. The log-space pairing keeps
/// I_{N-1}(large) * exp(-large) finite.
double lcr(const FadingParams& fp, double gamma_th);

/// Rayleigh-only approximation of the Erlang CDF for large N:
/// (gamma_th/avg_snr)^N / N! * exp(-gamma_th/avg_snr). Not exact for any N.
double snr_cdf_massive_n(const FadingParams& fp, double gamma_th);

}  // namespace aoi::channel
