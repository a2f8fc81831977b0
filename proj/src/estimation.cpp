#include "charn/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace charn {

std::vector<double> ResidualSet::kept_eps_tilde() const {
    std::vector<double> pool;
    pool.reserve(kept_indices.size());
    for (int idx : kept_indices) {
        pool.push_back(eps_tilde[static_cast<std::size_t>(idx)]);
    }
    return pool;
}

namespace {

double resolve_bandwidth(const BandwidthSpec& spec, std::span<const double> predictors) {
    switch (spec.rule) {
        case BandwidthRule::Silverman:
            return silverman_bandwidth(predictors);
        case BandwidthRule::Fixed:
            if (!(spec.fixed_value > 0.0)) {
                throw std::invalid_argument("fit: fixed bandwidth must be positive");
            }
            return spec.fixed_value;
        case BandwidthRule::PowerLaw:
            return power_law_bandwidth(predictors, spec.exponent);
    }
    throw std::logic_error("fit: unknown bandwidth rule");
}

double resolve_truncation(const TruncationSpec& spec, std::span<const double> predictors) {
    if (spec.absolute) {
        if (!(*spec.absolute > 0.0)) {
            throw std::invalid_argument("fit: truncation bound must be positive");
        }
        return *spec.absolute;
    }
    if (!(spec.quantile > 0.0 && spec.quantile <= 1.0)) {
        throw std::invalid_argument("fit: truncation quantile must be in (0, 1]");
    }
    std::vector<double> abs_pred(predictors.begin(), predictors.end());
    for (double& v : abs_pred) v = std::fabs(v);
    std::sort(abs_pred.begin(), abs_pred.end());
    const auto n = abs_pred.size();
    const auto rank = static_cast<std::size_t>(
        std::ceil(spec.quantile * static_cast<double>(n)));
    return abs_pred[std::min(std::max<std::size_t>(rank, 1), n) - 1];
}

}  // namespace

FittedCharn::FittedCharn(std::optional<TimeSeries> source,
                         std::vector<double> predictors,
                         std::vector<double> responses, const FitConfig& config)
    : source_(std::move(source)), config_(config) {
    if (predictors.size() != responses.size()) {
        throw std::invalid_argument("fit: predictor/response size mismatch");
    }
    if (predictors.size() < 2) {
        throw std::invalid_argument("fit: need at least 2 observations");
    }
    if (!(config_.density_floor > 0.0) || !(config_.variance_floor > 0.0)) {
        throw std::invalid_argument("fit: floors must be positive");
    }
    bandwidth_ = resolve_bandwidth(config_.bandwidth, predictors);
    truncation_ = resolve_truncation(config_.truncation, predictors);

    std::vector<std::size_t> order(predictors.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return predictors[a] < predictors[b];
    });
    pred_sorted_.reserve(order.size());
    resp_sorted_.reserve(order.size());
    for (std::size_t idx : order) {
        pred_sorted_.push_back(predictors[idx]);
        resp_sorted_.push_back(responses[idx]);
    }
}

FittedCharn FittedCharn::fit(const TimeSeries& series, const FitConfig& config) {
    const int n = series.n();
    if (n < 2) {
        throw std::invalid_argument("fit: series must provide n >= 2 observations");
    }
    std::vector<double> predictors(static_cast<std::size_t>(n));
    std::vector<double> responses(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) {
        predictors[static_cast<std::size_t>(j - 1)] = series.predictor(j);
        responses[static_cast<std::size_t>(j - 1)] = series.response(j);
    }
    return FittedCharn(series, std::move(predictors), std::move(responses), config);
}

FittedCharn FittedCharn::fit_pairs(std::vector<double> predictors,
                                   std::vector<double> responses,
                                   const FitConfig& config) {
    return FittedCharn(std::nullopt, std::move(predictors), std::move(responses),
                       config);
}

FittedCharn::Sums FittedCharn::window_sums(double x) const {
    const double radius = config_.kernel.support_halfwidth() * bandwidth_;
    const auto lo = std::lower_bound(pred_sorted_.begin(), pred_sorted_.end(),
                                     x - radius);
    const auto hi = std::upper_bound(lo, pred_sorted_.end(), x + radius);
    Sums sums;
    const auto first = static_cast<std::size_t>(lo - pred_sorted_.begin());
    const auto last = static_cast<std::size_t>(hi - pred_sorted_.begin());
    for (std::size_t i = first; i < last; ++i) {
        const double kv = config_.kernel((x - pred_sorted_[i]) / bandwidth_);
        const double y = resp_sorted_[i];
        sums.s0 += kv;
        sums.s1 += kv * y;
        sums.s2 += kv * y * y;
    }
    return sums;
}

double FittedCharn::density(double x) const {
    const Sums sums = window_sums(x);
    const double nc = static_cast<double>(pred_sorted_.size()) * bandwidth_;
    return sums.s0 / nc;
}

double FittedCharn::mean(double x) const {
    return mean_variance(x).first;
}

double FittedCharn::variance(double x) const {
    return mean_variance(x).second;
}

std::pair<double, double> FittedCharn::mean_variance(double x) const {
    const double clamped = std::clamp(x, pred_sorted_.front(), pred_sorted_.back());
    const Sums sums = window_sums(clamped);
    const double nc = static_cast<double>(pred_sorted_.size()) * bandwidth_;
    const double density = sums.s0 / nc;
    const double denom = std::max(density, config_.density_floor);
    const double m = (sums.s1 / nc) / denom;
    const double var_num = sums.s2 - 2.0 * m * sums.s1 + m * m * sums.s0;
    const double var = std::max((var_num / nc) / denom, config_.variance_floor);
    return {m, var};
}

ResidualSet FittedCharn::residuals() const {
    if (!source_) {
        throw std::logic_error("residuals: fit was built from pairs, not a series");
    }
    return residuals_from_estimates(
        [this](double x) { return mean_variance(x).first; },
        [this](double x) { return std::sqrt(mean_variance(x).second); }, *source_,
        truncation_);
}

ResidualSet residuals_from_estimates(const std::function<double(double)>& mean_fn,
                                     const std::function<double(double)>& sd_fn,
                                     const TimeSeries& series, double truncation) {
    const int n = series.n();
    ResidualSet out;
    out.truncation = truncation;
    out.eps_hat.resize(static_cast<std::size_t>(n));
    out.weights.assign(static_cast<std::size_t>(n), 0.0);
    out.eps_tilde.assign(static_cast<std::size_t>(n), 0.0);

    for (int j = 1; j <= n; ++j) {
        const double x = series.predictor(j);
        const double sd = sd_fn(x);
        if (!(sd > 0.0)) {
            throw std::runtime_error("residuals: non-positive volatility estimate");
        }
        out.eps_hat[static_cast<std::size_t>(j - 1)] =
            (series.response(j) - mean_fn(x)) / sd;
        if (std::fabs(x) <= truncation) {
            out.kept_indices.push_back(j - 1);
        }
    }
    out.kept_count = static_cast<int>(out.kept_indices.size());
    if (out.kept_count < 2) {
        throw std::runtime_error(
            "residuals: degenerate truncation, fewer than 2 observations kept");
    }

    const double w = 1.0 / static_cast<double>(out.kept_count);
    double mean = 0.0;
    for (int idx : out.kept_indices) {
        out.weights[static_cast<std::size_t>(idx)] = w;
        mean += out.eps_hat[static_cast<std::size_t>(idx)];
    }
    mean /= static_cast<double>(out.kept_count);
    double ss = 0.0;
    for (int idx : out.kept_indices) {
        const double d = out.eps_hat[static_cast<std::size_t>(idx)] - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(out.kept_count));
    if (!(sd > 0.0)) {
        throw std::runtime_error("residuals: kept residuals have zero spread");
    }
    for (int idx : out.kept_indices) {
        out.eps_tilde[static_cast<std::size_t>(idx)] =
            (out.eps_hat[static_cast<std::size_t>(idx)] - mean) / sd;
    }
    return out;
}

}  // namespace charn
