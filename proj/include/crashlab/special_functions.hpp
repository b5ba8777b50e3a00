#pragma once

#include <cmath>
#include <limits>

#include "crashlab/error.hpp"

namespace crashlab {

// Lanczos approximation (g = 7, 9 terms); relative error ~1e-15 for x > 0.
inline double log_gamma(double x) {
  static const double coeff[9] = {
      0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
      771.32342877765313,   -176.61502916214059, 12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x <= 0.0) throw Error(Errc::DomainError, "log_gamma requires x > 0");
  if (x < 0.5) {
    // Reflection keeps the approximation in its accurate range.
    return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
  }
  x -= 1.0;
  double a = coeff[0];
  const double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += coeff[i] / (x + i);
  return 0.5 * std::log(2.0 * M_PI) + (x + 0.5) * std::log(t) - t + std::log(a);
}

// Digamma via recurrence into the asymptotic regime.
inline double digamma(double x) {
  if (x <= 0.0) throw Error(Errc::DomainError, "digamma requires x > 0");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 -
                    inv2 * (1.0 / 120.0 -
                            inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
  return result;
}

inline double trigamma(double x) {
  if (x <= 0.0) throw Error(Errc::DomainError, "trigamma requires x > 0");
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += inv * (1.0 + 0.5 * inv +
                   inv2 * (1.0 / 6.0 -
                           inv2 * (1.0 / 30.0 -
                                   inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * 5.0 / 66.0)))));
  return result;
}

namespace detail {

inline constexpr double kGammaTol = 1e-12;
inline constexpr int kGammaMaxIter = 500;

// Series for the regularized lower incomplete gamma P(a, x); converges
// quickly for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kGammaMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kGammaTol)
      return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
  }
  throw Error(Errc::NotConverged, "incomplete gamma series");
}

// Lentz continued fraction for the regularized upper incomplete gamma
// Q(a, x); the complement of the series regime.
inline double gamma_q_cf(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / kGammaTol;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kGammaTol)
      return h * std::exp(-x + a * std::log(x) - log_gamma(a));
  }
  throw Error(Errc::NotConverged, "incomplete gamma continued fraction");
}

}  // namespace detail

// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw Error(Errc::DomainError, "gamma_p requires a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_cf(a, x);
}

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw Error(Errc::DomainError, "gamma_q requires a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cf(a, x);
}

// Upper-tail probability of the chi-square distribution with df degrees of
// freedom: the survival function that turns test statistics into p-values.
inline double chi_square_sf(double x, int df) {
  if (df < 1) throw Error(Errc::DomainError, "chi_square_sf requires df >= 1");
  if (x < 0.0) throw Error(Errc::DomainError, "chi_square_sf requires x >= 0");
  return gamma_q(0.5 * df, 0.5 * x);
}

// Standard normal upper tail.
inline double normal_sf(double z) { return 0.5 * std::erfc(z / M_SQRT2); }

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / M_SQRT2); }

}  // namespace crashlab
