#include "charn/ecf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace charn {

namespace detail {
void validate_statistic_input(const StatisticInput& in);
int effective_sample_size(const StatisticInput& in);
}  // namespace detail

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<std::size_t>(m), 0.0);
    weights.assign(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double t = std::cos(kPi * (i + 0.75) / (m + 0.5));
        double deriv = 1.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = t;
            for (int j = 2; j <= m; ++j) {
                const double p2 =
                    ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / static_cast<double>(j);
                p0 = p1;
                p1 = p2;
            }
            deriv = static_cast<double>(m) * (t * p1 - p0) / (t * t - 1.0);
            const double step = p1 / deriv;
            t -= step;
            if (std::fabs(step) < 1e-15) break;
        }
        {
            double p0 = 1.0, p1 = t;
            for (int j = 2; j <= m; ++j) {
                const double p2 =
                    ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / static_cast<double>(j);
                p0 = p1;
                p1 = p2;
            }
            deriv = static_cast<double>(m) * (t * p1 - p0) / (t * t - 1.0);
        }
        const double w = 2.0 / ((1.0 - t * t) * deriv * deriv);
        nodes[static_cast<std::size_t>(i)] = -t;
        nodes[static_cast<std::size_t>(m - 1 - i)] = t;
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(m - 1 - i)] = w;
    }
}

struct Axis {
    std::vector<double> nodes;
    std::vector<double> weights;  // Gauss-Legendre weight times V(t)
};

// Quadrature axis for one weight component. Panels cover [0, L] with L chosen
// so the discarded tail mass is negligible, then mirrored (V is even). The
// node count per panel tracks the oscillation of the ECF integrand, whose
// frequencies in this dimension are bounded by the data range.
Axis build_axis(WeightFamily family, double gamma, double freq_range,
                int refinement) {
    std::vector<std::pair<double, double>> panels;
    if (family == WeightFamily::GaussianProduct) {
        const double limit = std::sqrt(34.5 / gamma);
        const int count = std::max(1, static_cast<int>(std::ceil(limit / 2.0)));
        const double h = limit / count;
        for (int i = 0; i < count; ++i) {
            panels.emplace_back(i * h, (i + 1) * h);
        }
    } else {
        const double limit = 27.0 / gamma;
        double prev = 0.0, edge = 1.0;
        while (edge < limit) {
            panels.emplace_back(prev, edge);
            prev = edge;
            edge *= 2.0;
        }
        panels.emplace_back(prev, limit);
    }

    Axis axis;
    std::vector<double> uu, ww;
    for (const auto& [a, b] : panels) {
        const double h = b - a;
        int m = static_cast<int>(std::ceil(0.75 * freq_range * h)) + 12;
        m = std::min(m * refinement, 2000);
        gauss_legendre(m, uu, ww);
        for (int i = 0; i < m; ++i) {
            const double t = a + h * 0.5 * (uu[static_cast<std::size_t>(i)] + 1.0);
            const double glw = ww[static_cast<std::size_t>(i)] * h * 0.5;
            const double v = (family == WeightFamily::GaussianProduct)
                                 ? std::exp(-gamma * t * t)
                                 : std::exp(-gamma * t);
            axis.nodes.push_back(t);
            axis.weights.push_back(glw * v);
            axis.nodes.push_back(-t);
            axis.weights.push_back(glw * v);
        }
    }
    return axis;
}

double data_range(const std::vector<double>& values) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return *hi - *lo;
}

// Phase table exp(i * node_g * value_j), stored row-major per observation.
struct PhaseTable {
    std::vector<double> re, im;
    std::size_t grid = 0;

    PhaseTable(const std::vector<double>& values, const Axis& axis) {
        grid = axis.nodes.size();
        re.resize(values.size() * grid);
        im.resize(values.size() * grid);
        for (std::size_t j = 0; j < values.size(); ++j) {
            for (std::size_t g = 0; g < grid; ++g) {
                const double phase = axis.nodes[g] * values[j];
                re[j * grid + g] = std::cos(phase);
                im[j * grid + g] = std::sin(phase);
            }
        }
    }
};

}  // namespace

double statistic_quadrature(const StatisticInput& in, const QuadratureOptions& opt) {
    detail::validate_statistic_input(in);
    const std::size_t n = in.eps.size();
    const std::size_t k = in.lags.size();
    if (k > 2) {
        throw std::invalid_argument(
            "statistic_quadrature: unsupported dimension, only k <= 2");
    }
    if (n > 50) {
        throw std::invalid_argument("statistic_quadrature: capped at 50 observations");
    }
    if (opt.refinement < 1) {
        throw std::invalid_argument("statistic_quadrature: refinement must be >= 1");
    }

    const WeightFamily family = in.weight.family;
    const Axis axis0 =
        build_axis(family, in.weight.gammas[0], data_range(in.eps), opt.refinement);
    std::vector<Axis> lag_axes;
    lag_axes.reserve(k);
    for (std::size_t nu = 0; nu < k; ++nu) {
        lag_axes.push_back(build_axis(family, in.weight.gammas[nu + 1],
                                      data_range(in.lags[nu]), opt.refinement));
    }

    const PhaseTable table0(in.eps, axis0);
    std::vector<PhaseTable> lag_tables;
    lag_tables.reserve(k);
    for (std::size_t nu = 0; nu < k; ++nu) {
        lag_tables.emplace_back(in.lags[nu], lag_axes[nu]);
    }

    const std::size_t g0n = axis0.nodes.size();
    const double* w = in.weights.data();

    // Marginal residual ECF on the t0 axis.
    std::vector<double> phi_eps_re(g0n, 0.0), phi_eps_im(g0n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double* er = &table0.re[j * g0n];
        const double* ei = &table0.im[j * g0n];
        for (std::size_t g = 0; g < g0n; ++g) {
            phi_eps_re[g] += w[j] * er[g];
            phi_eps_im[g] += w[j] * ei[g];
        }
    }

    std::vector<double> acc_re(g0n), acc_im(g0n);
    long double integral = 0.0L;

    // Walks the lag-axis grid; for each lag node combination, accumulates the
    // joint ECF across the whole t0 axis in one pass over the observations.
    auto process_combo = [&](double lag_weight, const double* cre, const double* cim) {
        std::fill(acc_re.begin(), acc_re.end(), 0.0);
        std::fill(acc_im.begin(), acc_im.end(), 0.0);
        double phi_lag_re = 0.0, phi_lag_im = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double wr = w[j] * cre[j];
            const double wi = w[j] * cim[j];
            phi_lag_re += wr;
            phi_lag_im += wi;
            const double* er = &table0.re[j * g0n];
            const double* ei = &table0.im[j * g0n];
            for (std::size_t g = 0; g < g0n; ++g) {
                acc_re[g] += wr * er[g] - wi * ei[g];
                acc_im[g] += wr * ei[g] + wi * er[g];
            }
        }
        long double partial = 0.0L;
        for (std::size_t g = 0; g < g0n; ++g) {
            const double prod_re =
                phi_eps_re[g] * phi_lag_re - phi_eps_im[g] * phi_lag_im;
            const double prod_im =
                phi_eps_re[g] * phi_lag_im + phi_eps_im[g] * phi_lag_re;
            const double dre = acc_re[g] - prod_re;
            const double dim = acc_im[g] - prod_im;
            partial += static_cast<long double>(axis0.weights[g]) *
                       (dre * dre + dim * dim);
        }
        integral += static_cast<long double>(lag_weight) * partial;
    };

    if (k == 1) {
        const PhaseTable& t1 = lag_tables[0];
        const std::size_t g1n = lag_axes[0].nodes.size();
        std::vector<double> cre(n), cim(n);
        for (std::size_t g1 = 0; g1 < g1n; ++g1) {
            for (std::size_t j = 0; j < n; ++j) {
                cre[j] = t1.re[j * g1n + g1];
                cim[j] = t1.im[j * g1n + g1];
            }
            process_combo(lag_axes[0].weights[g1], cre.data(), cim.data());
        }
    } else {
        const PhaseTable& t1 = lag_tables[0];
        const PhaseTable& t2 = lag_tables[1];
        const std::size_t g1n = lag_axes[0].nodes.size();
        const std::size_t g2n = lag_axes[1].nodes.size();
        std::vector<double> cre(n), cim(n);
        for (std::size_t g1 = 0; g1 < g1n; ++g1) {
            for (std::size_t g2 = 0; g2 < g2n; ++g2) {
                for (std::size_t j = 0; j < n; ++j) {
                    const double ar = t1.re[j * g1n + g1];
                    const double ai = t1.im[j * g1n + g1];
                    const double br = t2.re[j * g2n + g2];
                    const double bi = t2.im[j * g2n + g2];
                    cre[j] = ar * br - ai * bi;
                    cim[j] = ar * bi + ai * br;
                }
                process_combo(lag_axes[0].weights[g1] * lag_axes[1].weights[g2],
                              cre.data(), cim.data());
            }
        }
    }

    return static_cast<double>(detail::effective_sample_size(in) * integral);
}

}  // namespace charn
