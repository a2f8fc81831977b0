#include "charn/montecarlo.hpp"

#include "charn/parallel.hpp"
#include "charn/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace charn {

const char* to_string(ModelId model) {
    return model == ModelId::Ar ? "ar" : "arch";
}

const char* to_string(Hypothesis hypothesis) {
    return hypothesis == Hypothesis::Null ? "null" : "alternative";
}

CharnModel make_model(ModelId model, Hypothesis hypothesis,
                      double skew_coefficient, int burn_in) {
    CharnModel out;
    if (model == ModelId::Ar) {
        out.mean_fn = [](double x) { return 0.9 * x; };
        out.vol_fn = [](double) { return 1.0; };
    } else {
        out.mean_fn = [](double) { return 0.0; };
        out.vol_fn = [](double x) { return std::sqrt(1.0 + 0.25 * x * x); };
    }
    if (hypothesis == Hypothesis::Null) {
        out.innovation = StandardNormal{};
    } else {
        out.innovation = ConditionalSkewNormal{skew_coefficient, 1e-3};
    }
    out.burn_in = burn_in;
    out.initial_state = 0.0;
    return out;
}

double CellResult::standard_error() const {
    const double p = rate();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(replicates));
}

const CellResult& RejectionTable::cell(ModelId model, Hypothesis hypothesis,
                                       int n, double alpha) const {
    for (const auto& c : cells) {
        if (c.model == model && c.hypothesis == hypothesis && c.n == n &&
            std::fabs(c.alpha - alpha) < 1e-12) {
            return c;
        }
    }
    throw std::out_of_range("RejectionTable: no such cell");
}

namespace {

void validate_experiment(const ExperimentConfig& cfg) {
    if (cfg.n_list.empty()) {
        throw std::invalid_argument("run_experiment: empty n list");
    }
    if (cfg.alphas.empty() || cfg.alphas.size() > 64) {
        throw std::invalid_argument("run_experiment: need 1..64 alpha levels");
    }
    for (double a : cfg.alphas) {
        if (!(a > 0.0 && a < 1.0)) {
            throw std::invalid_argument("run_experiment: alpha must be in (0, 1)");
        }
    }
    if (cfg.mc_replicates < 1) {
        throw std::invalid_argument("run_experiment: need at least 1 replicate");
    }
}

std::uint64_t experiment_stream(const ExperimentConfig& cfg) {
    const std::uint64_t tag =
        (cfg.model == ModelId::Ar ? 0u : 2u) +
        (cfg.hypothesis == Hypothesis::Null ? 0u : 1u);
    return derive_stream(cfg.master_seed, tag);
}

}  // namespace

void append_experiment(RejectionTable& table, const ExperimentConfig& cfg,
                       int parallelism) {
    validate_experiment(cfg);
    const auto started = std::chrono::steady_clock::now();

    const CharnModel model =
        make_model(cfg.model, cfg.hypothesis, cfg.skew_coefficient);
    const std::uint64_t exp_seed = experiment_stream(cfg);
    const std::size_t per_n = static_cast<std::size_t>(cfg.mc_replicates);
    const std::size_t units = cfg.n_list.size() * per_n;

    // One bitmask of per-alpha rejections per work unit.
    std::vector<std::uint64_t> rejected(units, 0);

    parallel_for(units, parallelism, [&](std::size_t unit) {
        const std::size_t n_index = unit / per_n;
        const std::size_t replicate = unit % per_n;
        const int n = cfg.n_list[n_index];
        try {
            const std::uint64_t sim_seed = derive_stream(exp_seed, 2 * unit);
            BootstrapConfig boot = cfg.bootstrap;
            boot.seed = derive_stream(exp_seed, 2 * unit + 1);
            boot.alpha = cfg.alphas.front();

            const TimeSeries series = simulate(model, n, cfg.k, sim_seed);
            const TestReport report =
                bootstrap_test(series, cfg.k, cfg.fit, cfg.weight, boot, 1);

            std::vector<double> sorted = report.bootstrap_statistics;
            std::sort(sorted.begin(), sorted.end());
            std::uint64_t mask = 0;
            for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
                const double critical = quantile_higher(sorted, 1.0 - cfg.alphas[a]);
                if (report.statistic > critical) {
                    mask |= std::uint64_t{1} << a;
                }
            }
            rejected[unit] = mask;
        } catch (const std::exception& e) {
            throw std::runtime_error(
                std::string("cell model=") + to_string(cfg.model) + " hypothesis=" +
                to_string(cfg.hypothesis) + " n=" + std::to_string(n) +
                " replicate=" + std::to_string(replicate) + ": " + e.what());
        }
    });

    for (std::size_t n_index = 0; n_index < cfg.n_list.size(); ++n_index) {
        for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
            CellResult cell;
            cell.model = cfg.model;
            cell.hypothesis = cfg.hypothesis;
            cell.n = cfg.n_list[n_index];
            cell.alpha = cfg.alphas[a];
            cell.replicates = cfg.mc_replicates;
            for (std::size_t r = 0; r < per_n; ++r) {
                if (rejected[n_index * per_n + r] & (std::uint64_t{1} << a)) {
                    ++cell.rejections;
                }
            }
            table.cells.push_back(cell);
        }
    }
    table.bootstrap_replicates = cfg.bootstrap.replicates;
    table.master_seed = cfg.master_seed;
    table.wall_seconds += std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - started)
                              .count();
}

RejectionTable run_experiment(const ExperimentConfig& cfg, int parallelism) {
    RejectionTable table;
    append_experiment(table, cfg, parallelism);
    return table;
}

void write_csv(std::ostream& out, const RejectionTable& table,
               const std::vector<std::pair<std::string, std::string>>& manifest) {
    for (const auto& [key, value] : manifest) {
        out << "# " << key << "=" << value << "\n";
    }
    out << "model,hypothesis,n,alpha,M,B,reject_rate,se,seed\n";
    char buffer[160];
    for (const auto& cell : table.cells) {
        std::snprintf(buffer, sizeof(buffer), "%s,%s,%d,%g,%d,%d,%.6f,%.6f,%llu\n",
                      to_string(cell.model), to_string(cell.hypothesis), cell.n,
                      cell.alpha, cell.replicates, table.bootstrap_replicates,
                      cell.rate(), cell.standard_error(),
                      static_cast<unsigned long long>(table.master_seed));
        out << buffer;
    }
}

void write_text(std::ostream& out, const RejectionTable& table) {
    char buffer[96];
    std::size_t i = 0;
    while (i < table.cells.size()) {
        const ModelId model = table.cells[i].model;
        const Hypothesis hypothesis = table.cells[i].hypothesis;

        std::vector<double> alphas;
        std::vector<int> ns;
        std::size_t j = i;
        while (j < table.cells.size() && table.cells[j].model == model &&
               table.cells[j].hypothesis == hypothesis) {
            if (alphas.empty() || table.cells[j].n != ns.back()) {
                ns.push_back(table.cells[j].n);
            }
            if (ns.size() == 1) alphas.push_back(table.cells[j].alpha);
            ++j;
        }

        out << "model " << to_string(model) << ", " << to_string(hypothesis)
            << " hypothesis (M=" << table.cells[i].replicates
            << ", B=" << table.bootstrap_replicates << ", seed=" << table.master_seed
            << ")\n";
        out << "        ";
        for (double a : alphas) {
            std::snprintf(buffer, sizeof(buffer), "  alpha=%-6g", a);
            out << buffer;
        }
        out << "\n";
        for (std::size_t row = 0; row < ns.size(); ++row) {
            std::snprintf(buffer, sizeof(buffer), "n=%6d", ns[row]);
            out << buffer;
            for (std::size_t col = 0; col < alphas.size(); ++col) {
                const auto& cell = table.cells[i + row * alphas.size() + col];
                std::snprintf(buffer, sizeof(buffer), "      %.4f", cell.rate());
                out << buffer;
            }
            out << "\n";
        }
        out << "\n";
        i = j;
    }
}

std::vector<ProbePoint> consistency_probe(ModelId model_id, Hypothesis hypothesis,
                                          const std::vector<int>& n_list,
                                          int replicates, std::uint64_t seed,
                                          const FitConfig& fit,
                                          const WeightSpec& weight, int k,
                                          double skew_coefficient) {
    if (n_list.size() < 2) {
        throw std::invalid_argument("consistency_probe: need at least two sample sizes");
    }
    if (replicates < 1) {
        throw std::invalid_argument("consistency_probe: need at least 1 replicate");
    }
    const CharnModel model = make_model(model_id, hypothesis, skew_coefficient);
    const std::uint64_t tag =
        1000 + (model_id == ModelId::Ar ? 0u : 2u) +
        (hypothesis == Hypothesis::Null ? 0u : 1u);
    const std::uint64_t probe_seed = derive_stream(seed, tag);

    std::vector<ProbePoint> points;
    points.reserve(n_list.size());
    for (std::size_t n_index = 0; n_index < n_list.size(); ++n_index) {
        const int n = n_list[n_index];
        double total = 0.0;
        for (int r = 0; r < replicates; ++r) {
            const std::uint64_t sim_seed = derive_stream(
                probe_seed, n_index * static_cast<std::size_t>(replicates) +
                                static_cast<std::size_t>(r));
            const TimeSeries series = simulate(model, n, k, sim_seed);
            const FittedCharn fitted = FittedCharn::fit(series, fit);
            const StatisticInput input =
                make_statistic_input(series, k, fitted.residuals(), weight);
            total += statistic_closed_form(input) / static_cast<double>(n);
        }
        points.push_back({n, total / static_cast<double>(replicates)});
    }
    return points;
}

}  // namespace charn
