#pragma once

#include <span>
#include <string_view>

#include "cbfswarm/core.hpp"

namespace cbfswarm::cvar {

/// Direction of the tail used when a pairwise noise term enters a control
/// constraint. Conservative budgets for the worst tail of the relative
/// noise projected on the separation axis (it tightens the constraint);
/// PaperLiteral keeps the sign as written in the loss expansion, which
/// loosens the constraint for zero-mean noise.
enum class Convention { Conservative, PaperLiteral };

const char* to_string(Convention c);
Convention convention_from_string(std::string_view s);  // throws InvalidArgument

double standard_normal_pdf(double x);
double standard_normal_cdf(double x);

/// Inverse standard normal CDF. Rational approximation polished with one
/// Newton step; absolute error well below 1e-9 across (0, 1).
double standard_normal_quantile(double p);

/// Upper-tail expectation E[X | X >= VaR_alpha] for X ~ N(mean, variance):
/// mean + sqrt(variance) * pdf(quantile(alpha)) / (1 - alpha).
/// Requires alpha in (0, 1) and variance >= 0; variance 0 returns mean.
double gaussian_cvar(double mean, double variance, double alpha);

/// Sorted-tail estimator: average of the top (1 - alpha) sample mass, the
/// boundary order statistic weighted by its fractional share. Requires at
/// least ceil(1 / (1 - alpha)) samples so the tail holds a full sample.
double empirical_cvar(std::span<const double> samples, double alpha);

/// CVaR of d . (e_i - e_j) where e_i, e_j are the two agents' independent
/// Gaussian disturbances: a scalar Gaussian with mean d . (mu_i - mu_j)
/// and variance d^T (Sigma_i + Sigma_j) d.
double pairwise_noise_cvar(const Vec2& d, const NoiseModel& noise_i,
                           const NoiseModel& noise_j, double alpha);

}  // namespace cbfswarm::cvar
