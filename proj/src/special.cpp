// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fastfm/special.hpp"

#include <cmath>
#include <numbers>

namespace fastfm {

namespace {
constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
constexpr double kInvSqrt2 = 0.707106781186547524400844362105;

// Standard normal draw truncated to t > a.
double sample_lower_truncated(Rng& rng, double a) {
  if (a <= 6.0) {
    // Upper tail mass Phi(-a) is representable here; invert within it.
    const double tail = normal_cdf(-a);
    const double u = rng.uniform_open();
    const double t = -normal_quantile(u * tail);
    return t > a ? t : a;
  }
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a + rng.exponential(rate);
    const double d = z - rate;
    if (std::log(rng.uniform_open()) <= -0.5 * d * d) return z;
  }
}
}  // namespace

double normal_pdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

double normal_cdf(double t) { return 0.5 * std::erfc(-t * kInvSqrt2); }

double normal_log_cdf(double t) {
  if (t > -8.0) return std::log(normal_cdf(t));
  // ln Phi(t) = ln phi(t) - ln(phi(t) / Phi(t)), with ln phi in closed form.
  constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;
  return -0.5 * t * t - kLogSqrt2Pi - std::log(inverse_mills_ratio(t));
}

double normal_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (!(p > 0.0)) return -INFINITY;
  if (!(p < 1.0)) return INFINITY;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement. In the upper half work with the complement so the
  // residual is not swamped by cancellation near 1.
  const double e = x <= 0.0 ? normal_cdf(x) - p : (1.0 - p) - normal_cdf(-x);
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double inverse_mills_ratio(double t) {
  if (t >= -8.0) return normal_pdf(t) / normal_cdf(t);
  // Laplace continued fraction Phi(t) / phi(t) = 1/(x + 1/(x + 2/(x + 3/(x + ...))))
  // with x = -t, evaluated bottom-up. 40 levels are exact to rounding for x >= 8.
  const double x = -t;
  double tail = x;
  for (int j = 40; j >= 1; --j) tail = x + j / tail;
  return tail;
}

double truncated_normal_mean(double center, double label) {
  return label > 0.0 ? center + inverse_mills_ratio(center) : center - inverse_mills_ratio(-center);
}

double sample_truncated_normal(Rng& rng, double center, double label) {
  // z = center + t, keep z > 0  <=>  t > -center.
  if (label > 0.0) return center + sample_lower_truncated(rng, -center);
  return center - sample_lower_truncated(rng, center);
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double log_sigmoid(double t) {
  if (t >= 0.0) return -std::log1p(std::exp(-t));
  return t - std::log1p(std::exp(t));
}

}  // namespace fastfm
