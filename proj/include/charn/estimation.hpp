#pragma once

#include "charn/kernel.hpp"
#include "charn/timeseries.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace charn {

enum class BandwidthRule { Silverman, Fixed, PowerLaw };

struct BandwidthSpec {
    BandwidthRule rule = BandwidthRule::Silverman;
    double fixed_value = 0.0;  ///< used when rule == Fixed
    double exponent = 0.25;    ///< used when rule == PowerLaw (c ~ n^{-exponent})

    static BandwidthSpec silverman() { return {}; }
    static BandwidthSpec fixed(double value) {
        return {BandwidthRule::Fixed, value, 0.0};
    }
    static BandwidthSpec power_law(double rho) {
        return {BandwidthRule::PowerLaw, 0.0, rho};
    }
};

/// Truncation interval [-a, a] for the residual weights. The default keeps
/// everything up to the 0.975 empirical quantile of |predictor|; an absolute
/// override (possibly infinity) replaces the quantile rule.
struct TruncationSpec {
    double quantile = 0.975;
    std::optional<double> absolute;

    static TruncationSpec at_quantile(double q) { return {q, std::nullopt}; }
    static TruncationSpec fixed(double a) { return {0.975, a}; }
    static TruncationSpec none() {
        return {0.975, std::numeric_limits<double>::infinity()};
    }
};

struct FitConfig {
    KernelSpec kernel{};
    BandwidthSpec bandwidth{};
    TruncationSpec truncation{};
    double density_floor = 1e-8;
    double variance_floor = 1e-8;
};

/**
 * @brief Residuals with truncation weights and standardized residuals.
 *
 * weights[j-1] is 0 for truncated indices and 1/kept_count otherwise, so the
 * weights sum to 1. eps_tilde holds the kept residuals standardized to
 * empirical mean 0 / variance 1 and is 0 at truncated indices.
 */
struct ResidualSet {
    std::vector<double> eps_hat;
    std::vector<double> weights;
    std::vector<double> eps_tilde;
    std::vector<int> kept_indices;  ///< 0-based positions with positive weight
    int kept_count = 0;
    double truncation = 0.0;  ///< the a actually applied

    /// Compacted pool of standardized residuals (bootstrap innovation source).
    std::vector<double> kept_eps_tilde() const;
};

/**
 * @brief Nadaraya-Watson estimates of f_X, m and sigma^2 for one series.
 *
 * All evaluations share the same kernel sums: with K_j = K((x - X_{j-1})/c),
 *   f(x)      = (nc)^{-1} sum_j K_j
 *   m(x)      = (nc)^{-1} sum_j K_j X_j / max(f(x), density_floor)
 *   sigma2(x) = (nc)^{-1} sum_j K_j (X_j - m(x))^2 / max(f(x), density_floor)
 * with sigma2 floored at variance_floor.
 *
 * mean()/variance() clamp the evaluation point to the observed predictor
 * range so the bootstrap recursion stays stable on extreme excursions;
 * density() does not clamp and is exactly 0 outside the kernel support.
 *
 * Immutable after construction; evaluations are safe to call concurrently.
 */
class FittedCharn {
public:
    /// Fit from a series (enables residuals()). Requires n >= 2.
    static FittedCharn fit(const TimeSeries& series, const FitConfig& config = {});

    /// Fit from explicit (predictor, response) pairs; no residuals() support.
    /// Useful when the pairs do not chain into a single series.
    static FittedCharn fit_pairs(std::vector<double> predictors,
                                 std::vector<double> responses,
                                 const FitConfig& config = {});

    double density(double x) const;
    double mean(double x) const;
    double variance(double x) const;
    /// Both conditional moments from one pass over the kernel window.
    std::pair<double, double> mean_variance(double x) const;

    /// Residuals (X_j - m(X_{j-1})) / sigma(X_{j-1}) with truncation weights.
    /// @throws std::logic_error for pair-backed fits,
    ///         std::runtime_error when fewer than 2 observations are kept.
    ResidualSet residuals() const;

    double bandwidth() const { return bandwidth_; }
    double truncation() const { return truncation_; }
    int sample_size() const { return static_cast<int>(pred_sorted_.size()); }
    const KernelSpec& kernel() const { return config_.kernel; }
    const FitConfig& config() const { return config_; }
    double predictor_min() const { return pred_sorted_.front(); }
    double predictor_max() const { return pred_sorted_.back(); }
    const std::optional<TimeSeries>& source() const { return source_; }

private:
    FittedCharn(std::optional<TimeSeries> source, std::vector<double> predictors,
                std::vector<double> responses, const FitConfig& config);

    struct Sums {
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    };
    Sums window_sums(double x) const;

    std::optional<TimeSeries> source_;
    std::vector<double> pred_sorted_;
    std::vector<double> resp_sorted_;  // responses ordered like pred_sorted_
    FitConfig config_;
    double bandwidth_ = 0.0;
    double truncation_ = 0.0;
};

/**
 * @brief Residuals from externally supplied mean/sd functions.
 *
 * Shared by FittedCharn::residuals() and by the no-refit bootstrap mode;
 * also allows plugging in the true model functions directly.
 *
 * @throws std::runtime_error when fewer than 2 observations survive the
 *         truncation, or the kept residuals are degenerate (zero spread).
 */
ResidualSet residuals_from_estimates(const std::function<double(double)>& mean_fn,
                                     const std::function<double(double)>& sd_fn,
                                     const TimeSeries& series, double truncation);

}  // namespace charn
