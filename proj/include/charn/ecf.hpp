#pragma once

#include "charn/estimation.hpp"
#include "charn/timeseries.hpp"

#include <vector>

namespace charn {

/// Product weight families W(t_0,...,t_k) = V_0(t_0) * prod_j V_j(t_j) with
/// V(t) = exp(-gamma |t|) (Laplace) or V(t) = exp(-gamma t^2) (Gaussian).
enum class WeightFamily { LaplaceProduct, GaussianProduct };

struct WeightSpec {
    WeightFamily family = WeightFamily::GaussianProduct;
    std::vector<double> gammas;  ///< k+1 positive entries (gamma_0,...,gamma_k)

    static WeightSpec gaussian(int k, double gamma = 0.5);
    static WeightSpec laplace(int k, double gamma = 1.0);

    int lag_count() const { return static_cast<int>(gammas.size()) - 1; }
};

/**
 * @brief Cosine transform of one weight component, F[V](x) = Int cos(tx) V(t) dt.
 *
 * Laplace:  2 gamma / (gamma^2 + x^2)
 * Gaussian: sqrt(pi/gamma) exp(-x^2 / (4 gamma))
 */
double cosine_transform(WeightFamily family, double gamma, double x);

/**
 * @brief Inputs of the independence statistic.
 *
 * One entry per contributing observation: residual, probability weight
 * (summing to 1) and the k lag values. `sample_size` is the n multiplying
 * the weighted L2 distance; 0 means "use eps.size()". The entries may be a
 * compacted subset of a longer series (zero-weight rows dropped), in which
 * case sample_size carries the original n.
 */
struct StatisticInput {
    std::vector<double> eps;
    std::vector<double> weights;
    std::vector<std::vector<double>> lags;  ///< lags[nu-1][s] = X_{s-nu}
    WeightSpec weight;
    int sample_size = 0;
};

/// Assemble the statistic input from a fitted residual set, keeping only
/// positive-weight observations. Requires 1 <= k <= series.lag_depth().
StatisticInput make_statistic_input(const TimeSeries& series, int k,
                                    const ResidualSet& residuals,
                                    const WeightSpec& weight);

/**
 * @brief Independence statistic via the pairwise-sum representation.
 *
 * With F0 the residual-component transform and L_{st} the product of lag
 * transforms,
 *   a_s = sum_t w_t F0(e_s - e_t),   b_s = sum_t w_t L_{st},
 *   A = sum_s w_s a_s,  B = sum_s w_s b_s,  P = sum_{s,t} w_s w_t F0 L,
 *   T = n (A B + P - 2 sum_s w_s a_s b_s),
 * evaluated in O(n^2 k) time and O(n) memory. The result is clamped to 0
 * when rounding produces a tiny negative value.
 *
 * @throws std::invalid_argument on inconsistent input or when fewer than two
 *         observations carry positive weight.
 */
double statistic_closed_form(const StatisticInput& input);

struct QuadratureOptions {
    int refinement = 1;  ///< multiplies the per-panel node counts
};

/**
 * @brief Brute-force oracle: tensor-product quadrature of the defining
 * weighted L2 distance between the joint ECF and the product of marginals.
 *
 * Independent of the pairwise-sum path; intended for validation at small
 * scale only (k <= 2, at most 50 observations).
 *
 * @throws std::invalid_argument when k or n exceed the supported range.
 */
double statistic_quadrature(const StatisticInput& input,
                            const QuadratureOptions& options = {});

}  // namespace charn
