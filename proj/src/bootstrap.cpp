#include "charn/bootstrap.hpp"

#include "charn/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace charn {

double SmoothingBandwidth::resolve(int n) const {
    if (use_rule) {
        return std::pow(static_cast<double>(n), -0.25);
    }
    if (fixed_value < 0.0) {
        throw std::invalid_argument("smoothing bandwidth must be nonnegative");
    }
    return fixed_value;
}

double quantile_higher(std::span<const double> sorted_values, double level) {
    if (sorted_values.empty()) {
        throw std::invalid_argument("quantile: empty input");
    }
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("quantile: level must be in (0, 1)");
    }
    const auto count = sorted_values.size();
    auto rank = static_cast<std::size_t>(
        std::ceil(level * static_cast<double>(count)));
    rank = std::min(std::max<std::size_t>(rank, 1), count);
    return sorted_values[rank - 1];
}

double bootstrap_p_value(std::span<const double> bootstrap_statistics,
                         double observed) {
    std::size_t at_least = 0;
    for (double value : bootstrap_statistics) {
        if (value >= observed) ++at_least;
    }
    return static_cast<double>(1 + at_least) /
           static_cast<double>(bootstrap_statistics.size() + 1);
}

bool generate_bootstrap_path(const std::function<double(double)>& mean_fn,
                             const std::function<double(double)>& sd_fn,
                             const SmoothedResidual& law, int n, int k,
                             int burn_in, double start, Rng& rng,
                             std::vector<double>& out) {
    out.clear();
    out.reserve(static_cast<std::size_t>(n + k));
    double state = start;
    const int total = burn_in + n + k;
    const InnovationLaw innovation = law;
    for (int step = 0; step < total; ++step) {
        const double eps = draw_innovation(innovation, state, rng);
        state = mean_fn(state) + sd_fn(state) * eps;
        if (!std::isfinite(state)) {
            return false;
        }
        if (step >= burn_in) {
            out.push_back(state);
        }
    }
    return true;
}

TestReport bootstrap_test(const TimeSeries& series, int k, const FitConfig& fit_config,
                          const WeightSpec& weight, const BootstrapConfig& config,
                          int threads) {
    if (config.replicates < 1) {
        throw std::invalid_argument("bootstrap_test: need at least 1 replicate");
    }
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
        throw std::invalid_argument("bootstrap_test: alpha must be in (0, 1)");
    }
    if (config.burn_in < 0) {
        throw std::invalid_argument("bootstrap_test: burn_in must be >= 0");
    }

    const FittedCharn fit = FittedCharn::fit(series, fit_config);
    const ResidualSet residuals = fit.residuals();
    if (residuals.kept_count < config.min_kept) {
        throw std::invalid_argument(
            "bootstrap_test: only " + std::to_string(residuals.kept_count) +
            " observations kept after truncation; minimum is " +
            std::to_string(config.min_kept));
    }

    const StatisticInput input = make_statistic_input(series, k, residuals, weight);
    const double observed = statistic_closed_form(input);

    const int n = series.n();
    const double h = config.smoothing.resolve(n);
    SmoothedResidual law{residuals.kept_eps_tilde(), h};
    if (config.shrink_smoothing) {
        const double shrink = 1.0 / std::sqrt(1.0 + h * h);
        for (double& e : law.residuals) e *= shrink;
        law.bandwidth = h * shrink;
    }

    const auto mean_eval = [&fit](double x) { return fit.mean_variance(x).first; };
    const auto sd_eval = [&fit](double x) {
        return std::sqrt(fit.mean_variance(x).second);
    };

    const int B = config.replicates;
    std::vector<double> values(static_cast<std::size_t>(B), 0.0);
    std::vector<char> succeeded(static_cast<std::size_t>(B), 0);

    parallel_for(static_cast<std::size_t>(B), threads, [&](std::size_t b) {
        std::vector<double> path;
        for (int attempt = 0; attempt < 2; ++attempt) {
            Rng rng = Rng::from_stream(config.seed, 2 * b + static_cast<std::size_t>(attempt));
            const double start =
                series.values()[rng.next_index(series.values().size())];
            if (!generate_bootstrap_path(mean_eval, sd_eval, law, n, k,
                                         config.burn_in, start, rng, path)) {
                continue;
            }
            try {
                const TimeSeries boot_series(path, k);
                StatisticInput boot_input;
                if (config.refit) {
                    const FittedCharn boot_fit = FittedCharn::fit(boot_series, fit_config);
                    boot_input = make_statistic_input(boot_series, k,
                                                      boot_fit.residuals(), weight);
                } else {
                    boot_input = make_statistic_input(
                        boot_series, k,
                        residuals_from_estimates(mean_eval, sd_eval, boot_series,
                                                 fit.truncation()),
                        weight);
                }
                values[b] = statistic_closed_form(boot_input);
                succeeded[b] = 1;
                return;
            } catch (const std::runtime_error&) {
                // Degenerate bootstrap sample; treated like a divergent path.
                continue;
            }
        }
    });

    TestReport report;
    report.bootstrap_statistics.reserve(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
        if (succeeded[static_cast<std::size_t>(b)]) {
            report.bootstrap_statistics.push_back(values[static_cast<std::size_t>(b)]);
        } else {
            ++report.divergent_replicates;
        }
    }
    if (report.divergent_replicates >
        config.max_divergent_fraction * static_cast<double>(B)) {
        throw std::runtime_error(
            "bootstrap_test: " + std::to_string(report.divergent_replicates) +
            " of " + std::to_string(B) + " bootstrap replicates diverged");
    }

    std::vector<double> sorted = report.bootstrap_statistics;
    std::sort(sorted.begin(), sorted.end());

    report.statistic = observed;
    report.critical_value = quantile_higher(sorted, 1.0 - config.alpha);
    report.p_value = bootstrap_p_value(report.bootstrap_statistics, observed);
    report.reject = observed > report.critical_value;
    report.alpha = config.alpha;
    report.bandwidth = fit.bandwidth();
    report.truncation = fit.truncation();
    report.smoothing_h = h;
    report.kept_count = residuals.kept_count;
    report.sample_size = n;
    report.lag_count = k;
    report.replicates = B;
    report.refit = config.refit;
    report.shrink_smoothing = config.shrink_smoothing;
    report.seed = config.seed;
    report.weight = weight;
    return report;
}

}  // namespace charn
