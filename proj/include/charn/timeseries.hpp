#pragma once

#include "charn/random.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace charn {

/**
 * @brief Ordered real-valued observations X_{-k+1},...,X_n with lag bookkeeping.
 *
 * The first `lag_depth` entries are pre-sample values retained so that the
 * lag vector (X_{j-1},...,X_{j-k}) exists for every j = 1,...,n.
 */
class TimeSeries {
public:
    /// @throws std::invalid_argument on empty/short input, non-finite values,
    ///         or negative lag depth.
    TimeSeries(std::vector<double> values, int lag_depth);

    int n() const { return static_cast<int>(values_.size()) - lag_depth_; }
    int lag_depth() const { return lag_depth_; }
    const std::vector<double>& values() const { return values_; }

    /// X_i for i in [-(lag_depth-1), n].
    double at(int i) const { return values_[static_cast<std::size_t>(i + lag_depth_ - 1)]; }

    /// Predictor X_{j-1} of observation j (1-based, j = 1..n).
    double predictor(int j) const { return at(j - 1); }
    /// Response X_j of observation j.
    double response(int j) const { return at(j); }
    /// Lag value X_{j-nu}; requires 1 <= nu <= lag_depth.
    double lag(int j, int nu) const { return at(j - nu); }

private:
    std::vector<double> values_;
    int lag_depth_;
};

/// Plain standard normal innovations (the null design in the study models).
struct StandardNormal {};

/**
 * @brief Innovations drawn from a kernel-smoothed residual distribution.
 *
 * A draw is pool[I] + bandwidth * Z with I uniform on the pool and Z standard
 * normal; equivalently a draw from F(x) = n^{-1} sum_i Phi((x - e_i)/h).
 * The pool is expected to hold standardized residuals.
 */
struct SmoothedResidual {
    std::vector<double> residuals;
    double bandwidth = 0.0;
};

/**
 * @brief Two-piece (Fernandez-Steel) skew normal with state-dependent asymmetry.
 *
 * The asymmetry parameter applied to a draw is
 *   gamma = max(scale_coefficient * state^2, gamma_floor),
 * and each draw is analytically shifted/scaled to mean 0, variance 1.
 */
struct ConditionalSkewNormal {
    double scale_coefficient = 10.0;
    double gamma_floor = 1e-3;
};

using InnovationLaw = std::variant<StandardNormal, SmoothedResidual, ConditionalSkewNormal>;

/// Mean and standard deviation of the two-piece skew normal with parameter gamma.
struct SkewNormalMoments {
    double mean;
    double sd;
};

/// Closed-form moments of the two-piece skew normal (standard normal base).
SkewNormalMoments skew_normal_moments(double gamma);

/// One two-piece skew normal variate, standardized to mean 0 / variance 1.
double draw_skew_normal_standardized(double gamma, Rng& rng);

/// One innovation; `state` feeds the conditional law (ignored otherwise).
/// @throws std::invalid_argument on an empty pool or non-positive asymmetry.
double draw_innovation(const InnovationLaw& law, double state, Rng& rng);

/**
 * @brief CHARN model X_j = m(X_{j-1}) + sigma(X_{j-1}) * eps_j.
 */
struct CharnModel {
    std::function<double(double)> mean_fn;
    std::function<double(double)> vol_fn;
    InnovationLaw innovation = StandardNormal{};
    int burn_in = 200;
    double initial_state = 0.0;
};

/**
 * @brief Simulate n + k values of the CHARN recursion.
 *
 * Iterates burn_in + n + k steps from the initial state and discards the
 * first burn_in. For the conditional skew normal law, each innovation's
 * asymmetry is driven by the realized previous state. Bit-identical output
 * for identical (model, n, k, seed).
 *
 * @throws std::runtime_error naming the step index if the state leaves the
 *         finite range (explosive model), or if the volatility is not positive.
 */
TimeSeries simulate(const CharnModel& model, int n, int k, std::uint64_t seed);

}  // namespace charn
