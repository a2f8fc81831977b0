#pragma once

#include <span>

namespace charn {

/// Compactly supported smoothing kernels on [-1, 1]. All are symmetric,
/// Lipschitz continuous probability densities; the Gaussian kernel is
/// deliberately not offered (no compact support).
enum class KernelShape { Epanechnikov, Quartic, Triweight };

struct KernelSpec {
    KernelShape shape = KernelShape::Epanechnikov;

    /// Half-width of the support (1 for every shape offered).
    double support_halfwidth() const { return 1.0; }

    double operator()(double u) const;
};

/**
 * @brief Silverman's rule-of-thumb bandwidth.
 *
 * c = 0.9 * min(sd, IQR/1.34) * n^{-1/5} over the supplied values.
 *
 * @throws std::invalid_argument with fewer than 2 distinct values or zero
 *         spread (min(sd, IQR/1.34) == 0).
 */
double silverman_bandwidth(std::span<const double> values);

/// Silverman scale with a custom exponent: 0.9 * min(sd, IQR/1.34) * n^{-rho}.
double power_law_bandwidth(std::span<const double> values, double rho);

}  // namespace charn
