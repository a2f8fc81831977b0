#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "charn/montecarlo.hpp"
#include "charn/timeseries.hpp"
#include "support/test_oracles.hpp"

#include <cmath>
#include <set>
#include <vector>

using namespace charn;
namespace ts = testsupport;

namespace {

CharnModel iid_normal_model() {
    CharnModel model;
    model.mean_fn = [](double) { return 0.0; };
    model.vol_fn = [](double) { return 1.0; };
    return model;
}

}  // namespace

TEST_CASE("time series container validates its input") {
    CHECK_THROWS_AS(TimeSeries({}, 0), std::invalid_argument);
    CHECK_THROWS_AS(TimeSeries({1.0}, 1), std::invalid_argument);
    CHECK_THROWS_AS(TimeSeries({1.0, 2.0}, -1), std::invalid_argument);
    CHECK_THROWS_AS(TimeSeries({1.0, std::nan("")}, 0), std::invalid_argument);

    const TimeSeries series({10.0, 11.0, 12.0, 13.0}, 2);
    CHECK(series.n() == 2);
    CHECK(series.lag_depth() == 2);
    CHECK(series.at(-1) == 10.0);
    CHECK(series.response(1) == 12.0);
    CHECK(series.predictor(1) == 11.0);
    CHECK(series.lag(2, 2) == 11.0);
}

TEST_CASE("degenerate recursion produces iid standard normals") {
    const int n = 4000;
    const TimeSeries series = simulate(iid_normal_model(), n, 0, 123);
    CHECK(series.n() == n);
    CHECK(std::fabs(ts::sample_mean(series.values())) < 4.0 / std::sqrt(n));
}

TEST_CASE("simulate is a pure function of its arguments") {
    const CharnModel model = make_model(ModelId::Ar, Hypothesis::Alternative);
    const TimeSeries a = simulate(model, 300, 1, 99);
    const TimeSeries b = simulate(model, 300, 1, 99);
    CHECK(a.values() == b.values());
    const TimeSeries c = simulate(model, 300, 1, 100);
    CHECK(a.values() != c.values());
}

TEST_CASE("autoregressive model reproduces its lag-1 autocorrelation") {
    const TimeSeries series =
        simulate(make_model(ModelId::Ar, Hypothesis::Null), 2000, 0, 7);
    CHECK(ts::lag1_autocorrelation(series.values()) == doctest::Approx(0.9).epsilon(0.12));
}

TEST_CASE("conditional-variance model hits its stationary second moment") {
    // sigma^2(x) = 1 + 0.25 x^2 gives E X^2 = 1 + 0.25 E X^2, so E X^2 = 4/3.
    const TimeSeries series =
        simulate(make_model(ModelId::Arch, Hypothesis::Null), 5000, 0, 11);
    std::vector<double> values = series.values();
    double second = 0.0;
    for (double v : values) second += v * v;
    second /= static_cast<double>(values.size());
    CHECK(second == doctest::Approx(4.0 / 3.0).epsilon(0.10));
}

TEST_CASE("explosive recursion reports the failing step") {
    CharnModel model;
    model.mean_fn = [](double x) { return x * x + 1.0; };
    model.vol_fn = [](double) { return 1.0; };
    model.burn_in = 0;
    CHECK_THROWS_WITH_AS(simulate(model, 100, 0, 1),
                         doctest::Contains("diverged at step"), std::runtime_error);
}

TEST_CASE("smoothed residual draws with zero bandwidth stay on the pool") {
    const SmoothedResidual law{{-1.0, 1.0}, 0.0};
    Rng rng(5);
    std::set<double> seen;
    for (int i = 0; i < 200; ++i) {
        seen.insert(draw_innovation(law, 0.0, rng));
    }
    CHECK(seen == std::set<double>{-1.0, 1.0});
}

TEST_CASE("smoothed residual draws inflate the variance by h^2") {
    // A large standardized pool; convolution with h Z adds h^2 variance.
    std::vector<double> pool;
    Rng pool_rng(17);
    for (int i = 0; i < 20000; ++i) pool.push_back(pool_rng.next_normal());
    const double m = ts::sample_mean(pool);
    const double sd = std::sqrt(ts::sample_variance(pool));
    for (double& e : pool) e = (e - m) / sd;

    const double h = std::pow(1e4, -0.25);
    const SmoothedResidual law{pool, h};
    Rng rng(29);
    std::vector<double> draws;
    draws.reserve(100000);
    for (int i = 0; i < 100000; ++i) draws.push_back(draw_innovation(law, 0.0, rng));
    CHECK(ts::sample_variance(draws) == doctest::Approx(1.0 + h * h).epsilon(0.02));
    CHECK(std::fabs(ts::sample_mean(draws)) <
          4.0 * std::sqrt(1.0 + h * h) / std::sqrt(100000.0));
}

TEST_CASE("draw_innovation rejects an empty pool") {
    Rng rng(1);
    CHECK_THROWS_AS(draw_innovation(SmoothedResidual{{}, 0.1}, 0.0, rng),
                    std::invalid_argument);
}

TEST_CASE("skew normal with unit asymmetry is symmetric") {
    // scale 1 at |state| = 1 gives gamma = 1, the symmetric member.
    const ConditionalSkewNormal law{1.0, 1e-3};
    Rng rng(31);
    std::vector<double> draws;
    draws.reserve(100000);
    for (int i = 0; i < 100000; ++i) draws.push_back(draw_innovation(law, 1.0, rng));
    CHECK(std::fabs(ts::sample_skewness(draws)) < 0.05);
    CHECK(std::fabs(ts::sample_mean(draws)) < 4.0 / std::sqrt(100000.0));
    CHECK(ts::sample_variance(draws) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("skew normal moments match a large Monte Carlo run") {
    for (double gamma : {0.5, 1.3, 3.0, 20.0}) {
        CAPTURE(gamma);
        Rng rng(101 + static_cast<std::uint64_t>(10 * gamma));
        std::vector<double> draws;
        draws.reserve(1000000);
        for (int i = 0; i < 1000000; ++i) {
            draws.push_back(draw_skew_normal_standardized(gamma, rng));
        }
        CHECK(std::fabs(ts::sample_mean(draws)) < 4.0 / std::sqrt(1000000.0));
        CHECK(ts::sample_variance(draws) == doctest::Approx(1.0).epsilon(0.01));
    }
}

TEST_CASE("mirrored asymmetry parameters give mirrored skewness") {
    auto skewness_at = [](double gamma, std::uint64_t seed) {
        Rng rng(seed);
        std::vector<double> draws;
        draws.reserve(200000);
        for (int i = 0; i < 200000; ++i) {
            draws.push_back(draw_skew_normal_standardized(gamma, rng));
        }
        return ts::sample_skewness(draws);
    };
    const double right = skewness_at(2.0, 41);
    const double left = skewness_at(0.5, 43);
    CHECK(right > 0.2);
    CHECK(right == doctest::Approx(-left).epsilon(0.05));
}

TEST_CASE("every innovation law is centered") {
    const std::vector<double> pool{-1.2, -0.3, 0.4, 1.1};  // mean 0, var 0.875
    std::vector<InnovationLaw> laws{StandardNormal{}, SmoothedResidual{pool, 0.2},
                                    ConditionalSkewNormal{10.0, 1e-3}};
    for (std::size_t i = 0; i < laws.size(); ++i) {
        CAPTURE(i);
        Rng rng(900 + i);
        double total = 0.0, ss = 0.0;
        const int draws = 100000;
        for (int d = 0; d < draws; ++d) {
            const double v = draw_innovation(laws[i], 0.7, rng);
            total += v;
            ss += v * v;
        }
        const double mean = total / draws;
        const double sd = std::sqrt(ss / draws - mean * mean);
        CHECK(std::fabs(mean) < 4.0 * sd / std::sqrt(static_cast<double>(draws)));
    }
}
