#pragma once

// Non-linear age of information under stop-and-wait with at most M
// transmissions per packet. Cost of an age t is C(t) = (e^{at} - 1)/a, which
// is linear for a = 0, exp-like for a > 0 and log-like for a < 0.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace aoi {

/// Maximum number of transmissions per packet, or unbounded.
class MaxTx {
 public:
  static constexpr MaxTx unbounded() { return MaxTx{0}; }
  /// Throws DomainError for m == 0.
  static MaxTx bounded(std::uint64_t m);

  constexpr bool is_unbounded() const { return m_ == 0; }
  /// Only meaningful when bounded.
  constexpr std::uint64_t count() const { return m_; }

  friend constexpr bool operator==(MaxTx, MaxTx) = default;

 private:
  constexpr explicit MaxTx(std::uint64_t m) : m_(m) {}
  std::uint64_t m_;
};

std::string to_string(MaxTx m);

struct AoiParams {
  /// Cost shape. Exactly 0 selects the linear closed forms.
  double a = 0.0;
  double t_packet_s = 1e-3;
  MaxTx max_tx = MaxTx::unbounded();

  void validate() const;
};

/// A metric value that may be divergent (infinite mean).
class Metric {
 public:
  static Metric finite(double value) { return Metric(value); }
  static Metric divergent() { return Metric(std::numeric_limits<double>::infinity()); }

  bool is_divergent() const { return !(value_ < std::numeric_limits<double>::infinity()); }
  /// Throws DivergenceError if divergent.
  double value() const;
  /// +inf when divergent.
  double value_or_inf() const { return value_; }

 private:
  explicit Metric(double v) : value_(v) {}
  double value_;
};

struct MetricsReport {
  double p = 0.0;
  double a = 0.0;  ///< cost shape actually used (after any coupling)
  double gamma_th = 0.0;
  Metric avg_aoi = Metric::divergent();
  Metric avg_paoi = Metric::divergent();
  double ee = 0.0;
  Metric eta = Metric::divergent();
  Metric eta_p = Metric::divergent();
  std::vector<std::string> regime_notes;

  bool any_divergent() const {
    return avg_aoi.is_divergent() || avg_paoi.is_divergent() || eta.is_divergent() || eta_p.is_divergent();
  }
};

/// Linear-branch routing: |a T_p max(M, E[Y~])| below this uses the a -> 0
/// closed forms.
inline constexpr double kLinearBranchThreshold = 1e-6;

/// C(t) = (e^{at} - 1)/a, or t for a == 0. Throws OverflowError when the
/// value is not finite.
double cost(double t, double a);

/// Integral of C over [0, s]: (e^{as} - 1 - as)/a^2, or s^2/2 for a == 0.
double cost_integral(double s, double a);

/// p^M via exp(M ln p), flushed to zero below 1e-300.
double pow_m(double p, std::uint64_t m);

/// E[Y~] = 1/(1-p): mean transmissions between successes.
double exp_y(double p);

/// Pr[Z~ = l] = (1-p) p^{l-1} / (1-p^M), 1 <= l <= M.
double z_pmf(double p, MaxTx max_tx, std::uint64_t l);

/// E[Z~] = 1/(1-p) - M p^M / (1-p^M); 1/(1-p) when unbounded.
double exp_z(double p, MaxTx max_tx);

/// True when the geometric sums behind the non-linear averages converge,
/// i.e. p e^{a T_p} < 1.
bool converges(double p, const AoiParams& params);

/// True when `params` falls in the linear-branch regime for this p.
bool uses_linear_branch(double p, const AoiParams& params);

/// Time-average non-linear AoI. Divergent when p e^{a T_p} >= 1.
Metric avg_aoi(double p, const AoiParams& params);

/// Average peak AoI, E[C(Z_{i-1} + Y_i)].
Metric avg_paoi(double p, const AoiParams& params);

}  // namespace aoi
