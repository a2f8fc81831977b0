#pragma once

#include "charn/ecf.hpp"
#include "charn/estimation.hpp"
#include "charn/timeseries.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace charn {

/// Smoothing bandwidth for the residual bootstrap: either the default rule
/// h = n^{-1/4} or a fixed nonnegative value.
struct SmoothingBandwidth {
    bool use_rule = true;
    double fixed_value = 0.0;

    static SmoothingBandwidth rule() { return {}; }
    static SmoothingBandwidth fixed(double h) { return {false, h}; }

    double resolve(int n) const;
};

struct BootstrapConfig {
    int replicates = 400;
    SmoothingBandwidth smoothing{};
    int burn_in = 200;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    /// Re-estimate mean/volatility/bandwidth/truncation on every bootstrap
    /// series (the faithful mode). false reuses the original estimates; the
    /// fast mode trades fidelity for roughly half the cost.
    bool refit = true;
    /// Rescale smoothed innovations by 1/sqrt(1+h^2) to undo the convolution
    /// variance inflation. Off by default.
    bool shrink_smoothing = false;
    int min_kept = 20;
    double max_divergent_fraction = 0.05;
};

/**
 * @brief Full test outcome plus the configuration needed to reproduce it.
 */
struct TestReport {
    double statistic = 0.0;
    double critical_value = 0.0;
    double p_value = 1.0;
    bool reject = false;
    double alpha = 0.05;
    /// Successful bootstrap statistics in replicate order.
    std::vector<double> bootstrap_statistics;
    int divergent_replicates = 0;

    // Configuration echo.
    double bandwidth = 0.0;
    double truncation = 0.0;
    double smoothing_h = 0.0;
    int kept_count = 0;
    int sample_size = 0;
    int lag_count = 1;
    int replicates = 0;
    bool refit = true;
    bool shrink_smoothing = false;
    std::uint64_t seed = 0;
    WeightSpec weight;
};

/// Conservative empirical quantile: the ceil(level * B)-th order statistic.
/// @throws std::invalid_argument on empty input or level outside (0, 1).
double quantile_higher(std::span<const double> sorted_values, double level);

/// p-value for an observed statistic against bootstrap draws:
/// (1 + #{T_b >= observed}) / (B + 1).
double bootstrap_p_value(std::span<const double> bootstrap_statistics,
                         double observed);

/**
 * @brief Smooth autoregressive residual bootstrap test of innovation
 * independence.
 *
 * Fits the kernel estimators on `series`, computes the ECF statistic, then
 * regenerates B series through the fitted recursion with innovations drawn
 * from the kernel-smoothed standardized residual distribution, re-running the
 * pipeline on each to calibrate the critical value. Deterministic for a given
 * config seed, regardless of `threads`.
 *
 * A replicate whose path leaves the finite range is retried once on a fresh
 * stream, then counted; more than max_divergent_fraction of divergent
 * replicates is an error.
 *
 * @throws std::invalid_argument if fewer than config.min_kept observations
 *         survive the truncation.
 */
TestReport bootstrap_test(const TimeSeries& series, int k, const FitConfig& fit,
                          const WeightSpec& weight, const BootstrapConfig& config,
                          int threads = 1);

/**
 * @brief One bootstrap path X*_j = m(X*_{j-1}) + s(X*_{j-1}) eps*_j.
 *
 * Draws burn_in + n + k innovations from the smoothed residual law, iterates
 * from `start`, discards the burn-in. Returns false (leaving `out` unusable)
 * if the path hits a non-finite value.
 */
bool generate_bootstrap_path(const std::function<double(double)>& mean_fn,
                             const std::function<double(double)>& sd_fn,
                             const SmoothedResidual& law, int n, int k,
                             int burn_in, double start, Rng& rng,
                             std::vector<double>& out);

}  // namespace charn
