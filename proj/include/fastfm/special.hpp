// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "fastfm/rng.hpp"

namespace fastfm {

double normal_pdf(double t);
/// Standard normal CDF via erfc, accurate in the lower tail.
double normal_cdf(double t);
/// ln Phi(t), finite for all finite t.
double normal_log_cdf(double t);
/// Inverse standard normal CDF, p in (0, 1). Acklam's rational approximation
/// polished with one Halley step; about 1e-15 relative.
double normal_quantile(double p);

/// phi(t) / Phi(t). Uses a continued fraction below t = -8.
double inverse_mills_ratio(double t);

/// Mean of N(center, 1) truncated to the half line with sign `label`
/// (label > 0: z > 0, label < 0: z < 0).
double truncated_normal_mean(double center, double label);

/// Draw from N(center, 1) truncated to the half line with sign `label`.
/// Inverse CDF when the truncation point is within 6 sd of the center on the
/// kept side, Robert's exponential rejection sampler further out.
double sample_truncated_normal(Rng& rng, double center, double label);

double sigmoid(double t);
/// ln sigma(t) without overflow.
double log_sigmoid(double t);

}  // namespace fastfm
