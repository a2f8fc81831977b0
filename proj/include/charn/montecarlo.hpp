#pragma once

#include "charn/bootstrap.hpp"
#include "charn/ecf.hpp"
#include "charn/estimation.hpp"
#include "charn/timeseries.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace charn {

/// Study models: Ar is m(x) = 0.9x with unit volatility, Arch is m = 0 with
/// sigma(x) = sqrt(1 + 0.25 x^2).
enum class ModelId { Ar, Arch };
enum class Hypothesis { Null, Alternative };

const char* to_string(ModelId model);
const char* to_string(Hypothesis hypothesis);

/// Build one of the study models. Under the alternative the innovations are
/// standardized skew normal with asymmetry skew_coefficient * state^2.
CharnModel make_model(ModelId model, Hypothesis hypothesis,
                      double skew_coefficient = 10.0, int burn_in = 200);

struct ExperimentConfig {
    ModelId model = ModelId::Ar;
    Hypothesis hypothesis = Hypothesis::Null;
    std::vector<int> n_list{50, 100, 200};
    std::vector<double> alphas{0.01, 0.05, 0.10};
    int mc_replicates = 200;
    int k = 1;
    double skew_coefficient = 10.0;
    FitConfig fit{};
    WeightSpec weight = WeightSpec::gaussian(1, 0.5);
    /// Per-replicate seeds and alpha are derived; the seed/alpha fields of
    /// this config are ignored.
    BootstrapConfig bootstrap{.replicates = 200};
    std::uint64_t master_seed = 1;
};

struct CellResult {
    ModelId model;
    Hypothesis hypothesis;
    int n = 0;
    double alpha = 0.0;
    int rejections = 0;
    int replicates = 0;

    double rate() const {
        return static_cast<double>(rejections) / static_cast<double>(replicates);
    }
    /// Binomial standard error sqrt(p(1-p)/M).
    double standard_error() const;
};

struct RejectionTable {
    std::vector<CellResult> cells;
    int bootstrap_replicates = 0;
    std::uint64_t master_seed = 0;
    double wall_seconds = 0.0;  ///< informational only, never serialized

    const CellResult& cell(ModelId model, Hypothesis hypothesis, int n,
                           double alpha) const;
};

/**
 * @brief Size/power experiment over a grid of sample sizes and levels.
 *
 * Every (n, replicate) work unit simulates one series and runs the bootstrap
 * test once; all levels share that bootstrap sample (common random numbers
 * across alpha). Seeds are derived per unit from the master seed, so the
 * result is identical for any parallelism degree.
 *
 * Per-replicate failures are rethrown with the cell coordinates attached.
 */
RejectionTable run_experiment(const ExperimentConfig& config, int parallelism = 1);

/// Run the experiment and append its cells to an existing table (used to
/// combine several model/hypothesis combinations into one report).
void append_experiment(RejectionTable& table, const ExperimentConfig& config,
                       int parallelism = 1);

/// CSV rows "model,hypothesis,n,alpha,M,B,reject_rate,se,seed", preceded by
/// "# key=value" manifest comment lines when provided.
void write_csv(std::ostream& out, const RejectionTable& table,
               const std::vector<std::pair<std::string, std::string>>& manifest = {});

/// Aligned rejection-frequency tables, one block per model/hypothesis pair.
void write_text(std::ostream& out, const RejectionTable& table);

struct ProbePoint {
    int n = 0;
    double mean_statistic_over_n = 0.0;
};

/**
 * @brief Average of T/n across simulated replicates, per sample size.
 *
 * Under independence the sequence decays toward 0; under the dependent
 * alternative it stabilizes at a positive value. No bootstrap involved.
 */
std::vector<ProbePoint> consistency_probe(ModelId model, Hypothesis hypothesis,
                                          const std::vector<int>& n_list,
                                          int replicates, std::uint64_t seed,
                                          const FitConfig& fit,
                                          const WeightSpec& weight, int k = 1,
                                          double skew_coefficient = 10.0);

}  // namespace charn
