#include "cbfswarm/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace cbfswarm::cvar {

const char* to_string(Convention c) {
    return c == Convention::Conservative ? "conservative" : "paper-literal";
}

Convention convention_from_string(std::string_view s) {
    if (s == "conservative") return Convention::Conservative;
    if (s == "paper-literal") return Convention::PaperLiteral;
    throw InvalidArgument("unknown convention: " + std::string(s));
}

double standard_normal_pdf(double x) {
    static const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double standard_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double standard_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw InvalidArgument("standard_normal_quantile needs p in (0, 1)");
    }
    // Peter Acklam's rational approximation, then one Newton step.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;

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
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    const double err = standard_normal_cdf(x) - p;
    const double pdf = standard_normal_pdf(x);
    if (pdf > 0.0) x -= err / pdf;
    return x;
}

double gaussian_cvar(double mean, double variance, double alpha) {
    if (!std::isfinite(mean) || !std::isfinite(variance)) {
        throw InvalidArgument("gaussian_cvar needs finite mean and variance");
    }
    if (variance < 0.0) {
        throw InvalidArgument("gaussian_cvar needs variance >= 0");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("gaussian_cvar needs alpha in (0, 1)");
    }
    if (variance == 0.0) return mean;
    const double z = standard_normal_quantile(alpha);
    return mean + std::sqrt(variance) * standard_normal_pdf(z) / (1.0 - alpha);
}

double empirical_cvar(std::span<const double> samples, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("empirical_cvar needs alpha in (0, 1)");
    }
    const auto needed = static_cast<std::size_t>(std::ceil(1.0 / (1.0 - alpha)));
    if (samples.size() < needed) {
        throw InvalidArgument("empirical_cvar needs at least " + std::to_string(needed) +
                              " samples for alpha=" + std::to_string(alpha));
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());

    // Sorted-tail estimator: average the top (1-alpha) mass, giving the
    // boundary order statistic only its fractional share.
    const double mass = (1.0 - alpha) * static_cast<double>(sorted.size());
    const auto whole = static_cast<std::size_t>(std::floor(mass));
    const double frac = mass - static_cast<double>(whole);
    double sum = 0.0;
    for (std::size_t t = 0; t < whole; ++t) sum += sorted[t];
    if (frac > 0.0 && whole < sorted.size()) sum += frac * sorted[whole];
    return sum / mass;
}

double pairwise_noise_cvar(const Vec2& d, const NoiseModel& noise_i,
                           const NoiseModel& noise_j, double alpha) {
    const double mean = d.dot(noise_i.mean - noise_j.mean);
    const double variance =
        std::max(0.0, quad_form(d, noise_i.covariance + noise_j.covariance));
    return gaussian_cvar(mean, variance, alpha);
}

}  // namespace cbfswarm::cvar
