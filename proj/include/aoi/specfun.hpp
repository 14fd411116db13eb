#pragma once

// Special functions for the Rician/MRC channel statistics. Integer orders
// only; all series stop on a relative residual bound and treat the term cap
// as an error.

namespace aoi::specfun {

struct Tolerance {
  double rel_eps = 1e-15;
  int max_terms = 20000;

  /// Throws DomainError unless 0 < rel_eps < 1 and max_terms >= 100.
  void validate() const;
};

/// I_order(x). Throws OverflowError when the value is not representable.
double bessel_i(int order, double x, const Tolerance& tol = {});

/// e^{-x} I_order(x); finite for every x >= 0.
double bessel_i_scaled(int order, double x, const Tolerance& tol = {});

/// log I_order(x); -inf for order > 0 at x = 0.
double log_bessel_i(int order, double x, const Tolerance& tol = {});

/// Regularized lower incomplete gamma P(shape, x) for integer shape >= 1.
double reg_gamma_p(int shape, double x, const Tolerance& tol = {});

/// Regularized upper incomplete gamma Q(shape, x) = 1 - P(shape, x),
/// computed without cancellation.
double reg_gamma_q(int shape, double x, const Tolerance& tol = {});

/// Generalized Marcum Q function Q_order(a, b), order >= 1.
///
/// Evaluated as the Poisson(a^2/2)-weighted mixture of central chi-square
/// tails, Q_order(a,b) = sum_k w_k Q(order + k, b^2/2). Throws SeriesError
/// if the residual bound does not drop below tolerance within max_terms.
double marcum_q(int order, double a, double b, const Tolerance& tol = {});

/// 1 - Q_order(a, b) summed directly (accurate when the result is tiny).
double marcum_p(int order, double a, double b, const Tolerance& tol = {});

}  // namespace aoi::specfun
