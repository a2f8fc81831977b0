#include "charn/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace charn {

double KernelSpec::operator()(double u) const {
    const double t = 1.0 - u * u;
    if (t <= 0.0) return 0.0;
    switch (shape) {
        case KernelShape::Epanechnikov:
            return 0.75 * t;
        case KernelShape::Quartic:
            return 0.9375 * t * t;
        case KernelShape::Triweight:
            return 1.09375 * t * t * t;
    }
    return 0.0;
}

namespace {

// Type-7 (linear interpolation) quantile of a sorted sample.
double sorted_quantile(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    const double pos = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double silverman_scale(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) {
        throw std::invalid_argument("silverman_bandwidth: need at least 2 values");
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);

    const double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) {
        throw std::invalid_argument("silverman_bandwidth: zero spread in the data");
    }
    return 0.9 * spread;
}

}  // namespace

double silverman_bandwidth(std::span<const double> values) {
    return silverman_scale(values) *
           std::pow(static_cast<double>(values.size()), -0.2);
}

double power_law_bandwidth(std::span<const double> values, double rho) {
    if (!(rho > 0.0)) {
        throw std::invalid_argument("power_law_bandwidth: exponent must be positive");
    }
    return silverman_scale(values) *
           std::pow(static_cast<double>(values.size()), -rho);
}

}  // namespace charn
