#include "aoi/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "aoi/errors.hpp"

namespace aoi::specfun {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite_nonneg(double x, const char* what) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(what) + " must be finite and >= 0");
  }
}

[[noreturn]] void cap_hit(const char* fn, double partial, double bound) {
  throw SeriesError(std::string(fn) + ": series did not converge within max_terms", partial, bound);
}

// Hankel expansion of log I_n(x) for x >> n^2.
double log_bessel_i_asymptotic(int order, double x, const Tolerance& tol) {
  const double mu = 4.0 * order * order;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < tol.max_terms; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (k * 8.0 * x);
    if (std::abs(next) >= std::abs(term)) break;  // smallest term reached
    term = next;
    sum += term;
    if (std::abs(term) < tol.rel_eps * std::abs(sum)) break;
  }
  return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(sum);
}

// Power series sum_k (x/2)^{2k+n} / (k! (k+n)!), summed outward from the
// largest term so the scale factor lives entirely in log space.
double log_bessel_i_series(int order, double x, const Tolerance& tol) {
  const double y = 0.25 * x * x;
  const double half_log = std::log(0.5 * x);
  auto log_term = [&](long k) {
    return (2.0 * k + order) * half_log - std::lgamma(k + 1.0) - std::lgamma(k + order + 1.0);
  };

  // Peak where (k+1)(k+n+1) = y.
  const double m = 0.5 * (-order + std::sqrt(static_cast<double>(order) * order + 4.0 * y));
  const long k0 = std::max(0L, std::lround(m - 1.0));

  double sum = 1.0;
  int used = 1;

  double term = 1.0;
  for (long k = k0;; ++k) {
    const double ratio = y / ((k + 1.0) * (k + order + 1.0));
    term *= ratio;
    sum += term;
    if (++used > tol.max_terms) cap_hit("bessel_i", sum, term);
    const double next_ratio = y / ((k + 2.0) * (k + order + 2.0));
    if (next_ratio < 1.0 && term * next_ratio / (1.0 - next_ratio) < tol.rel_eps * sum) break;
  }

  term = 1.0;
  for (long k = k0; k > 0; --k) {
    const double ratio = k * (k + static_cast<double>(order)) / y;
    term *= ratio;
    sum += term;
    if (++used > tol.max_terms) cap_hit("bessel_i", sum, term);
    const double next_ratio = (k - 1.0) * (k - 1.0 + order) / y;
    if (next_ratio < 1.0 && term * next_ratio / (1.0 - next_ratio) < tol.rel_eps * sum) break;
  }

  return log_term(k0) + std::log(sum);
}

// log of e^{-x} x^s / s!
double log_poisson_mass(long s, double x) {
  return -x + s * std::log(x) - std::lgamma(s + 1.0);
}

struct GammaPair {
  double p;
  double q;
};

GammaPair reg_gamma_pair(int shape, double x, const Tolerance& tol) {
  if (shape < 1) throw DomainError("reg_gamma: shape must be >= 1");
  require_finite_nonneg(x, "reg_gamma: x");
  if (x == 0.0) return {0.0, 1.0};

  if (x < shape) {
    // P = e^{-x} x^s/s! * sum_j x^j / ((s+1)...(s+j))
    double term = 1.0;
    double sum = 1.0;
    for (int j = 1;; ++j) {
      const double ratio = x / (shape + j);
      term *= ratio;
      sum += term;
      const double next = x / (shape + j + 1.0);
      if (term * next / (1.0 - next) < tol.rel_eps * sum) break;
      if (j > tol.max_terms) cap_hit("reg_gamma_p", sum, term);
    }
    const double p = std::min(1.0, std::exp(log_poisson_mass(shape, x) + std::log(sum)));
    return {p, 1.0 - p};
  }

  // Q = e^{-x} sum_{k<s} x^k/k!, summed downward from the largest term k=s-1.
  double term = 1.0;
  double sum = 1.0;
  for (int k = shape - 1; k > 0; --k) {
    term *= k / x;
    sum += term;
    const double next = (k - 1.0) / x;
    if (term * next / (1.0 - next) < tol.rel_eps * sum) break;
  }
  const double q = std::min(1.0, std::exp(log_poisson_mass(shape - 1, x) + std::log(sum)));
  return {1.0 - q, q};
}

// Bound on sum_{j>k} w_j for Poisson(lambda) weights, valid for k + 2 > lambda.
double poisson_tail_bound(double log_w_next, long k, double lambda) {
  const double r = lambda / (k + 2.0);
  return std::exp(log_w_next) / (1.0 - r);
}

}  // namespace

void Tolerance::validate() const {
  if (!(rel_eps > 0.0) || !(rel_eps < 1.0)) throw DomainError("Tolerance.rel_eps must lie in (0, 1)");
  if (max_terms < 100) throw DomainError("Tolerance.max_terms must be >= 100");
}

double log_bessel_i(int order, double x, const Tolerance& tol) {
  tol.validate();
  if (order < 0) throw DomainError("bessel_i: order must be >= 0");
  require_finite_nonneg(x, "bessel_i: x");
  if (x == 0.0) return order == 0 ? 0.0 : -kInf;
  const double n2 = static_cast<double>(order) * order;
  if (x > 1000.0 && x > 10.0 * n2) return log_bessel_i_asymptotic(order, x, tol);
  return log_bessel_i_series(order, x, tol);
}

double bessel_i(int order, double x, const Tolerance& tol) {
  const double log_value = log_bessel_i(order, x, tol);
  if (log_value > std::log(std::numeric_limits<double>::max())) {
    throw OverflowError("bessel_i: I_" + std::to_string(order) + "(" + std::to_string(x) +
                        ") overflows double; use bessel_i_scaled or log_bessel_i");
  }
  return std::exp(log_value);
}

double bessel_i_scaled(int order, double x, const Tolerance& tol) {
  return std::exp(log_bessel_i(order, x, tol) - x);
}

double reg_gamma_p(int shape, double x, const Tolerance& tol) {
  tol.validate();
  return std::clamp(reg_gamma_pair(shape, x, tol).p, 0.0, 1.0);
}

double reg_gamma_q(int shape, double x, const Tolerance& tol) {
  tol.validate();
  return std::clamp(reg_gamma_pair(shape, x, tol).q, 0.0, 1.0);
}

namespace {

// Upper tail: sum_k w_k Q(order + k, y).
double marcum_q_series(int order, double lambda, double y, const Tolerance& tol) {
  const double log_lambda = std::log(lambda);
  const double log_y = std::log(y);

  // Q(order + k, y) grows with k by the Poisson mass e^{-y} y^s / s!.
  double gamma_q = reg_gamma_pair(order, y, tol).q;
  double log_increment = log_poisson_mass(order, y);

  double log_w = -lambda;
  double sum = 0.0;
  double bound = 1.0;
  for (long k = 0; k <= tol.max_terms; ++k) {
    sum += std::exp(log_w) * gamma_q;

    const double log_w_next = log_w + log_lambda - std::log(k + 1.0);
    if (k + 2.0 > lambda) {
      bound = poisson_tail_bound(log_w_next, k, lambda);
      if (bound <= tol.rel_eps * sum || bound < std::numeric_limits<double>::min()) {
        return std::clamp(sum, 0.0, 1.0);
      }
    }
    log_w = log_w_next;
    gamma_q = std::min(1.0, gamma_q + std::exp(log_increment));
    log_increment += log_y - std::log(order + k + 1.0);
  }
  cap_hit("marcum_q", sum, bound);
}

// Lower tail: sum_k w_k P(order + k, y).
double marcum_p_series(int order, double lambda, double y, const Tolerance& tol) {
  const double log_lambda = std::log(lambda);
  double log_w = -lambda;
  double sum = 0.0;
  double bound = 1.0;
  for (long k = 0; k <= tol.max_terms; ++k) {
    // P(order + k, y) is non-increasing in k.
    const double gamma_p = reg_gamma_pair(static_cast<int>(order + k), y, tol).p;
    sum += std::exp(log_w) * gamma_p;
    if (gamma_p == 0.0) return std::clamp(sum, 0.0, 1.0);

    const double log_w_next = log_w + log_lambda - std::log(k + 1.0);
    if (k + 2.0 > lambda) {
      bound = gamma_p * poisson_tail_bound(log_w_next, k, lambda);
      if (bound <= tol.rel_eps * sum || bound < std::numeric_limits<double>::min()) {
        return std::clamp(sum, 0.0, 1.0);
      }
    }
    log_w = log_w_next;
  }
  cap_hit("marcum_p", sum, bound);
}

}  // namespace

namespace {

struct MarcumSplit {
  double lambda;
  double y;
  bool upper_is_small;  // y beyond the mean of the non-central gamma variate
};

MarcumSplit marcum_split(const char* fn, int order, double a, double b, const Tolerance& tol) {
  tol.validate();
  if (order < 1) throw DomainError(std::string(fn) + ": order must be >= 1");
  require_finite_nonneg(a, fn);
  require_finite_nonneg(b, fn);
  const double lambda = 0.5 * a * a;
  const double y = 0.5 * b * b;
  return {lambda, y, y > order + lambda};
}

}  // namespace

// Both tails are summed as positive series; the larger one is taken as the
// complement of the smaller so neither loses digits near 1.
double marcum_q(int order, double a, double b, const Tolerance& tol) {
  const auto s = marcum_split("marcum_q", order, a, b, tol);
  if (b == 0.0) return 1.0;
  if (s.lambda == 0.0) return reg_gamma_q(order, s.y, tol);
  if (s.upper_is_small) return marcum_q_series(order, s.lambda, s.y, tol);
  return std::clamp(1.0 - marcum_p_series(order, s.lambda, s.y, tol), 0.0, 1.0);
}

double marcum_p(int order, double a, double b, const Tolerance& tol) {
  const auto s = marcum_split("marcum_p", order, a, b, tol);
  if (b == 0.0) return 0.0;
  if (s.lambda == 0.0) return reg_gamma_p(order, s.y, tol);
  if (!s.upper_is_small) return marcum_p_series(order, s.lambda, s.y, tol);
  return std::clamp(1.0 - marcum_q_series(order, s.lambda, s.y, tol), 0.0, 1.0);
}


}  // namespace aoi::specfun
