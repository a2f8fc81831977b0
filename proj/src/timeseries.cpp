#include "charn/timeseries.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace charn {

TimeSeries::TimeSeries(std::vector<double> values, int lag_depth)
    : values_(std::move(values)), lag_depth_(lag_depth) {
    if (lag_depth_ < 0) {
        throw std::invalid_argument("TimeSeries: lag_depth must be nonnegative");
    }
    if (static_cast<int>(values_.size()) < lag_depth_ + 1) {
        throw std::invalid_argument("TimeSeries: need at least lag_depth + 1 values");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("TimeSeries: values must be finite");
        }
    }
}

SkewNormalMoments skew_normal_moments(double gamma) {
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("skew_normal_moments: gamma must be positive");
    }
    // Two-piece density 2/(g + 1/g) * [phi(x/g) for x >= 0, phi(g x) for x < 0].
    // E[X]   = sqrt(2/pi) (g - 1/g)
    // E[X^2] = g^2 - 1 + g^-2
    const double inv = 1.0 / gamma;
    const double mean = std::sqrt(2.0 / 3.14159265358979323846) * (gamma - inv);
    const double second = gamma * gamma - 1.0 + inv * inv;
    const double var = second - mean * mean;
    return {mean, std::sqrt(var)};
}

double draw_skew_normal_standardized(double gamma, Rng& rng) {
    const SkewNormalMoments mom = skew_normal_moments(gamma);
    // P(X >= 0) = gamma^2 / (1 + gamma^2); each side is a scaled half-normal.
    const double p_pos = gamma * gamma / (1.0 + gamma * gamma);
    const double u = rng.next_unit();
    const double half = std::fabs(rng.next_normal());
    const double x = (u < p_pos) ? gamma * half : -half / gamma;
    return (x - mom.mean) / mom.sd;
}

double draw_innovation(const InnovationLaw& law, double state, Rng& rng) {
    if (std::holds_alternative<StandardNormal>(law)) {
        return rng.next_normal();
    }
    if (const auto* sm = std::get_if<SmoothedResidual>(&law)) {
        if (sm->residuals.empty()) {
            throw std::invalid_argument("draw_innovation: empty residual pool");
        }
        if (sm->bandwidth < 0.0) {
            throw std::invalid_argument("draw_innovation: negative smoothing bandwidth");
        }
        const std::size_t index = rng.next_index(sm->residuals.size());
        return sm->residuals[index] + sm->bandwidth * rng.next_normal();
    }
    const auto& skew = std::get<ConditionalSkewNormal>(law);
    const double gamma =
        std::max(skew.scale_coefficient * state * state, skew.gamma_floor);
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("draw_innovation: asymmetry parameter not positive");
    }
    return draw_skew_normal_standardized(gamma, rng);
}

TimeSeries simulate(const CharnModel& model, int n, int k, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
    if (k < 0) throw std::invalid_argument("simulate: k must be >= 0");
    if (model.burn_in < 0) throw std::invalid_argument("simulate: burn_in must be >= 0");

    Rng rng(seed);
    const int total = model.burn_in + n + k;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n + k));

    double state = model.initial_state;
    for (int step = 0; step < total; ++step) {
        const double eps = draw_innovation(model.innovation, state, rng);
        const double vol = model.vol_fn(state);
        if (!(vol > 0.0)) {
            throw std::runtime_error("simulate: non-positive volatility at step " +
                                     std::to_string(step));
        }
        state = model.mean_fn(state) + vol * eps;
        if (!std::isfinite(state)) {
            throw std::runtime_error("simulate: series diverged at step " +
                                     std::to_string(step));
        }
        if (step >= model.burn_in) {
            out.push_back(state);
        }
    }
    return TimeSeries(std::move(out), k);
}

}  // namespace charn
