#include "aoi/aoi_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "aoi/errors.hpp"

namespace aoi {

namespace {

void require_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
}

void require_below_one(double p, const char* what) {
  require_probability(p);
  if (p >= 1.0) throw DivergenceError(std::string(what) + " diverges for p >= 1");
}

// Terms shared by the non-linear AoI and PAoI closed forms, all in log space:
//   E[e^{aT Z~}] and E[e^{aT Y~}].
struct MomentLogs {
  double log_mgf_z;
  double log_mgf_y;
  double log_q_ratio;  // log((1 - p e^{aT}) / (1 - p))
};

// log((e^x - 1) / x); the series avoids taking log of a value next to 1.
double log_expm1_ratio(double x) {
  if (std::abs(x) < 1e-3) return x / 2.0 + x * x / 24.0 - x * x * x * x / 2880.0;
  return std::log(std::expm1(x) / x);
}

MomentLogs moment_logs(double p, const AoiParams& params) {
  const double x = params.a * params.t_packet_s;
  const double em1 = std::expm1(x);
  // log((1 - p e^x) / (1 - p)) = log1p(-p (e^x - 1) / (1 - p)); stays accurate
  // as x -> 0 where the two logs would cancel.
  const double log_q_ratio = std::log1p(-p * em1 / (1.0 - p));

  // log((1 - q^M) / (1 - p^M)) with q = p e^x.
  double log_m_ratio = 0.0;
  if (!params.max_tx.is_unbounded() && p > 0.0) {
    const double m = static_cast<double>(params.max_tx.count());
    const double log_p = std::log(p);
    const double one_minus_pm = -std::expm1(m * log_p);
    const double pm = std::exp(m * log_p);
    const double diff = std::abs(m * x) < 1.0 ? pm * std::expm1(m * x) : std::exp(m * (log_p + x)) - pm;
    log_m_ratio = std::log1p(-diff / one_minus_pm);
  }

  const double log_mgf_y = x - log_q_ratio;
  const double log_mgf_z = x - log_q_ratio + log_m_ratio;
  return {log_mgf_z, log_mgf_y, log_q_ratio};
}

}  // namespace

MaxTx MaxTx::bounded(std::uint64_t m) {
  if (m == 0) throw DomainError("max_tx must be >= 1");
  return MaxTx{m};
}

std::string to_string(MaxTx m) { return m.is_unbounded() ? "unbounded" : std::to_string(m.count()); }

void AoiParams::validate() const {
  if (!std::isfinite(a)) throw DomainError("a must be finite");
  if (!(t_packet_s > 0.0) || !std::isfinite(t_packet_s)) throw DomainError("t_packet_s must be finite and > 0");
}

double Metric::value() const {
  if (is_divergent()) throw DivergenceError("metric is divergent");
  return value_;
}

double cost(double t, double a) {
  if (!(t >= 0.0)) throw DomainError("cost: t must be >= 0");
  if (a == 0.0) return t;
  const double c = std::expm1(a * t) / a;
  if (!std::isfinite(c)) throw OverflowError("cost: e^{a t} overflows for a*t = " + std::to_string(a * t));
  return c;
}

double cost_integral(double s, double a) {
  if (!(s >= 0.0)) throw DomainError("cost_integral: s must be >= 0");
  const double x = a * s;
  if (std::abs(x) < 1e-3) {
    // s^2 (1/2 + x/6 + x^2/24 + x^3/120 + x^4/720)
    return s * s * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x * (1.0 / 120.0 + x / 720.0))));
  }
  const double v = (std::expm1(x) - x) / (a * a);
  if (!std::isfinite(v)) throw OverflowError("cost_integral: overflow for a*s = " + std::to_string(x));
  return v;
}

double pow_m(double p, std::uint64_t m) {
  if (p == 0.0) return m == 0 ? 1.0 : 0.0;
  const double v = std::exp(static_cast<double>(m) * std::log(p));
  return v < 1e-300 ? 0.0 : v;
}

double exp_y(double p) {
  require_below_one(p, "E[Y]");
  return 1.0 / (1.0 - p);
}

double z_pmf(double p, MaxTx max_tx, std::uint64_t l) {
  require_below_one(p, "Pr[Z]");
  if (l < 1 || (!max_tx.is_unbounded() && l > max_tx.count())) {
    throw DomainError("z_pmf: l must lie in [1, M]");
  }
  if (p == 0.0) return l == 1 ? 1.0 : 0.0;
  const double head = (1.0 - p) * pow_m(p, l - 1);
  if (max_tx.is_unbounded()) return head;
  return head / -std::expm1(static_cast<double>(max_tx.count()) * std::log(p));
}

double exp_z(double p, MaxTx max_tx) {
  require_below_one(p, "E[Z]");
  if (max_tx.is_unbounded() || p == 0.0) return 1.0 / (1.0 - p);
  const std::uint64_t m = max_tx.count();
  if (m <= 4096) {
    // Direct summation: the closed form cancels badly when M (1 - p) is small.
    double weighted = 0.0;
    double mass = 0.0;
    double power = 1.0;
    for (std::uint64_t l = 1; l <= m; ++l) {
      weighted += static_cast<double>(l) * power;
      mass += power;
      power *= p;
    }
    return weighted / mass;
  }
  const double pm = pow_m(p, m);
  return 1.0 / (1.0 - p) - static_cast<double>(m) * pm / -std::expm1(static_cast<double>(m) * std::log(p));
}

bool converges(double p, const AoiParams& params) {
  require_probability(p);
  if (p >= 1.0) return false;
  if (params.a <= 0.0 || p == 0.0) return true;
  return std::log(p) + params.a * params.t_packet_s < 0.0;
}

bool uses_linear_branch(double p, const AoiParams& params) {
  if (params.a == 0.0) return true;
  const double spread = params.max_tx.is_unbounded()
                            ? 1.0 / (1.0 - p)
                            : std::max(static_cast<double>(params.max_tx.count()), 1.0 / (1.0 - p));
  return std::abs(params.a * params.t_packet_s * spread) < kLinearBranchThreshold;
}

Metric avg_aoi(double p, const AoiParams& params) {
  params.validate();
  if (!converges(p, params)) return Metric::divergent();
  const double t = params.t_packet_s;
  if (uses_linear_branch(p, params)) {
    return Metric::finite(t * (exp_z(p, params.max_tx) + (1.0 + p) / (2.0 * (1.0 - p))));
  }
  const double x = params.a * t;
  const MomentLogs m = moment_logs(p, params);
  // C = ((1-p) E[e^{xZ}] (e^x - 1) / (x (1 - p e^x)) - 1) / a
  const double log_ratio = m.log_mgf_z + log_expm1_ratio(x) - m.log_q_ratio;
  const double c = std::expm1(log_ratio) / params.a;
  return std::isfinite(c) ? Metric::finite(c) : Metric::divergent();
}

Metric avg_paoi(double p, const AoiParams& params) {
  params.validate();
  if (!converges(p, params)) return Metric::divergent();
  if (uses_linear_branch(p, params)) {
    return Metric::finite(params.t_packet_s * (exp_z(p, params.max_tx) + 1.0 / (1.0 - p)));
  }
  const MomentLogs m = moment_logs(p, params);
  const double c = std::expm1(m.log_mgf_z + m.log_mgf_y) / params.a;
  return std::isfinite(c) ? Metric::finite(c) : Metric::divergent();
}

}  // namespace aoi
