#include "aoi/channel.hpp"

#include <cmath>
#include <numbers>

#include "aoi/errors.hpp"
#include "aoi/specfun.hpp"

namespace aoi::channel {

namespace {

void require_threshold(double gamma_th) {
  if (!(gamma_th >= 0.0) || !std::isfinite(gamma_th)) {
    throw DomainError("gamma_th must be finite and >= 0");
  }
}

bool is_rayleigh(const FadingParams& fp) { return fp.rician_k < kRayleighThreshold; }

// Arguments of Q_N(alpha, beta) for the Rician MRC SNR.
struct MarcumArgs {
  double alpha;
  double beta;
};

MarcumArgs marcum_args(const FadingParams& fp, double gamma_th) {
  return {std::sqrt(2.0 * fp.n_antennas * fp.rician_k),
          std::sqrt(2.0 * gamma_th * (fp.rician_k + 1.0) / fp.avg_snr)};
}

}  // namespace

void FadingParams::validate() const {
  if (n_antennas < 1) throw DomainError("n_antennas must be >= 1");
  if (!(rician_k >= 0.0) || !std::isfinite(rician_k)) throw DomainError("rician_k must be finite and >= 0");
  if (!(avg_snr > 0.0) || !std::isfinite(avg_snr)) throw DomainError("avg_snr must be finite and > 0");
  if (!(doppler_hz >= 0.0) || !std::isfinite(doppler_hz)) throw DomainError("doppler_hz must be finite and >= 0");
}

RateThreshold::RateThreshold(double rate_bps_hz) : rate_(rate_bps_hz) {
  if (!(rate_bps_hz > 0.0) || !std::isfinite(rate_bps_hz)) throw DomainError("rate must be finite and > 0");
  gamma_th_ = std::exp2(rate_bps_hz) - 1.0;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double snr_cdf(const FadingParams& fp, double gamma_th) {
  fp.validate();
  require_threshold(gamma_th);
  if (is_rayleigh(fp)) return specfun::reg_gamma_p(fp.n_antennas, gamma_th / fp.avg_snr);
  const auto [alpha, beta] = marcum_args(fp, gamma_th);
  return specfun::marcum_p(fp.n_antennas, alpha, beta);
}

double snr_ccdf(const FadingParams& fp, double gamma_th) {
  fp.validate();
  require_threshold(gamma_th);
  if (is_rayleigh(fp)) return specfun::reg_gamma_q(fp.n_antennas, gamma_th / fp.avg_snr);
  const auto [alpha, beta] = marcum_args(fp, gamma_th);
  return specfun::marcum_q(fp.n_antennas, alpha, beta);
}

double lcr(const FadingParams& fp, double gamma_th) {
  fp.validate();
  require_threshold(gamma_th);
  if (fp.doppler_hz == 0.0 || gamma_th == 0.0) return 0.0;

  const double n = fp.n_antennas;
  // f_D multiplies the result outside the exponential so scaling is exact.
  const double log_prefactor = 0.5 * std::log(2.0 * std::numbers::pi);

  if (is_rayleigh(fp)) {
    const double u = gamma_th / fp.avg_snr;
    return fp.doppler_hz * std::exp(log_prefactor + (n - 0.5) * std::log(u) - u - std::lgamma(n));
  }

  const double k = fp.rician_k;
  const double u = gamma_th * (k + 1.0) / fp.avg_snr;
  const double nk = n * k;
  const double log_bessel = specfun::log_bessel_i(fp.n_antennas - 1, 2.0 * std::sqrt(u * nk));
  return fp.doppler_hz *
         std::exp(log_prefactor + 0.5 * n * std::log(u) + log_bessel - u - nk - 0.5 * (n - 1.0) * std::log(nk));
}

double snr_cdf_massive_n(const FadingParams& fp, double gamma_th) {
  fp.validate();
  require_threshold(gamma_th);
  if (fp.rician_k != 0.0) throw DomainError("snr_cdf_massive_n is defined for Rayleigh fading (K = 0) only");
  if (gamma_th == 0.0) return 0.0;
  const double x = gamma_th / fp.avg_snr;
  const double n = fp.n_antennas;
  return std::exp(n * std::log(x) - std::lgamma(n + 1.0) - x);
}

}  // namespace aoi::channel
