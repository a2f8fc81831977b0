#include "charn/ecf.hpp"

#include <cmath>
#include <stdexcept>

namespace charn {

WeightSpec WeightSpec::gaussian(int k, double gamma) {
    return {WeightFamily::GaussianProduct,
            std::vector<double>(static_cast<std::size_t>(k + 1), gamma)};
}

WeightSpec WeightSpec::laplace(int k, double gamma) {
    return {WeightFamily::LaplaceProduct,
            std::vector<double>(static_cast<std::size_t>(k + 1), gamma)};
}

double cosine_transform(WeightFamily family, double gamma, double x) {
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("cosine_transform: gamma must be positive");
    }
    if (family == WeightFamily::LaplaceProduct) {
        return 2.0 * gamma / (gamma * gamma + x * x);
    }
    return std::sqrt(3.14159265358979323846 / gamma) *
           std::exp(-x * x / (4.0 * gamma));
}

namespace detail {

void validate_statistic_input(const StatisticInput& in) {
    const std::size_t n = in.eps.size();
    if (n < 2) {
        throw std::invalid_argument("statistic: need at least 2 observations");
    }
    if (in.weights.size() != n) {
        throw std::invalid_argument("statistic: weight/residual size mismatch");
    }
    const std::size_t k = in.lags.size();
    if (k < 1) {
        throw std::invalid_argument("statistic: need at least one lag column");
    }
    for (const auto& column : in.lags) {
        if (column.size() != n) {
            throw std::invalid_argument("statistic: lag column size mismatch");
        }
    }
    if (in.weight.gammas.size() != k + 1) {
        throw std::invalid_argument("statistic: weight spec needs k+1 gammas");
    }
    for (double g : in.weight.gammas) {
        if (!(g > 0.0)) {
            throw std::invalid_argument("statistic: gammas must be positive");
        }
    }
    double total = 0.0;
    std::size_t positive = 0;
    for (double w : in.weights) {
        if (w < 0.0) {
            throw std::invalid_argument("statistic: negative weight");
        }
        if (w > 0.0) ++positive;
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-6) {
        throw std::invalid_argument("statistic: weights must sum to 1");
    }
    if (positive < 2) {
        throw std::invalid_argument(
            "statistic: degenerate input, all weight on a single observation");
    }
}

int effective_sample_size(const StatisticInput& in) {
    return in.sample_size > 0 ? in.sample_size : static_cast<int>(in.eps.size());
}

}  // namespace detail

StatisticInput make_statistic_input(const TimeSeries& series, int k,
                                    const ResidualSet& residuals,
                                    const WeightSpec& weight) {
    if (k < 1) throw std::invalid_argument("make_statistic_input: k must be >= 1");
    if (k > series.lag_depth()) {
        throw std::invalid_argument(
            "make_statistic_input: series lacks pre-sample values for k lags");
    }
    if (static_cast<int>(residuals.eps_hat.size()) != series.n()) {
        throw std::invalid_argument("make_statistic_input: residual count != n");
    }
    StatisticInput input;
    input.weight = weight;
    input.sample_size = series.n();
    const std::size_t kept = residuals.kept_indices.size();
    input.eps.reserve(kept);
    input.weights.reserve(kept);
    input.lags.assign(static_cast<std::size_t>(k), {});
    for (auto& column : input.lags) column.reserve(kept);
    for (int idx : residuals.kept_indices) {
        const int j = idx + 1;
        input.eps.push_back(residuals.eps_hat[static_cast<std::size_t>(idx)]);
        input.weights.push_back(residuals.weights[static_cast<std::size_t>(idx)]);
        for (int nu = 1; nu <= k; ++nu) {
            input.lags[static_cast<std::size_t>(nu - 1)].push_back(series.lag(j, nu));
        }
    }
    return input;
}

double statistic_closed_form(const StatisticInput& in) {
    detail::validate_statistic_input(in);
    const std::size_t n = in.eps.size();
    const std::size_t k = in.lags.size();
    const bool gauss = in.weight.family == WeightFamily::GaussianProduct;

    // Residual-component transform constants.
    const double g0 = in.weight.gammas[0];
    const double scale0 = gauss ? std::sqrt(3.14159265358979323846 / g0) : 2.0 * g0;
    const double quart0 = gauss ? 1.0 / (4.0 * g0) : g0 * g0;

    // Lag-product constants: for the Gaussian family the product of the k
    // transforms is one exponential of a summed quadratic form.
    double lag_scale = 1.0;
    std::vector<double> lag_coeff(k);
    for (std::size_t nu = 0; nu < k; ++nu) {
        const double g = in.weight.gammas[nu + 1];
        if (gauss) {
            lag_scale *= std::sqrt(3.14159265358979323846 / g);
            lag_coeff[nu] = 1.0 / (4.0 * g);
        } else {
            lag_coeff[nu] = g;
        }
    }

    const double* eps = in.eps.data();
    const double* w = in.weights.data();

    long double sum_a = 0.0L, sum_b = 0.0L, sum_p = 0.0L, sum_cross = 0.0L;
    for (std::size_t s = 0; s < n; ++s) {
        double a_s = 0.0, b_s = 0.0, p_s = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double de = eps[s] - eps[t];
            double r;
            double l;
            if (gauss) {
                r = scale0 * std::exp(-de * de * quart0);
                double expo = 0.0;
                for (std::size_t nu = 0; nu < k; ++nu) {
                    const double d = in.lags[nu][s] - in.lags[nu][t];
                    expo += d * d * lag_coeff[nu];
                }
                l = lag_scale * std::exp(-expo);
            } else {
                r = scale0 / (quart0 + de * de);
                l = 1.0;
                for (std::size_t nu = 0; nu < k; ++nu) {
                    const double g = lag_coeff[nu];
                    const double d = in.lags[nu][s] - in.lags[nu][t];
                    l *= 2.0 * g / (g * g + d * d);
                }
            }
            a_s += w[t] * r;
            b_s += w[t] * l;
            p_s += w[t] * r * l;
        }
        sum_a += static_cast<long double>(w[s]) * a_s;
        sum_b += static_cast<long double>(w[s]) * b_s;
        sum_p += static_cast<long double>(w[s]) * p_s;
        sum_cross += static_cast<long double>(w[s]) * a_s * b_s;
    }

    const long double n_mult = detail::effective_sample_size(in);
    const long double value = n_mult * (sum_a * sum_b + sum_p - 2.0L * sum_cross);
    const long double scale =
        n_mult * (std::fabs(static_cast<double>(sum_a * sum_b)) +
                  std::fabs(static_cast<double>(sum_p)) + 1.0L);
    if (value < -1e-10L * scale) {
        throw std::logic_error("statistic_closed_form: negative value beyond rounding");
    }
    return value > 0.0L ? static_cast<double>(value) : 0.0;
}

}  // namespace charn
