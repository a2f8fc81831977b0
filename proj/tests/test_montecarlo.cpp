#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "charn/montecarlo.hpp"

#include <cmath>
#include <sstream>

using namespace charn;

namespace {

ExperimentConfig tiny_experiment() {
    ExperimentConfig cfg;
    cfg.model = ModelId::Ar;
    cfg.hypothesis = Hypothesis::Null;
    cfg.n_list = {40, 60};
    cfg.alphas = {0.05, 0.1};
    cfg.mc_replicates = 6;
    cfg.bootstrap.replicates = 25;
    cfg.master_seed = 7;
    return cfg;
}

bool tables_equal(const RejectionTable& a, const RejectionTable& b) {
    if (a.cells.size() != b.cells.size()) return false;
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        const CellResult& x = a.cells[i];
        const CellResult& y = b.cells[i];
        if (x.model != y.model || x.hypothesis != y.hypothesis || x.n != y.n ||
            x.alpha != y.alpha || x.rejections != y.rejections ||
            x.replicates != y.replicates) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("study models have the advertised functional form") {
    const CharnModel ar = make_model(ModelId::Ar, Hypothesis::Null);
    CHECK(ar.mean_fn(2.0) == doctest::Approx(1.8));
    CHECK(ar.vol_fn(2.0) == doctest::Approx(1.0));
    const CharnModel arch = make_model(ModelId::Arch, Hypothesis::Alternative);
    CHECK(arch.mean_fn(2.0) == doctest::Approx(0.0));
    CHECK(arch.vol_fn(2.0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(std::holds_alternative<ConditionalSkewNormal>(arch.innovation));
}

TEST_CASE("experiment results do not depend on the parallelism degree") {
    const ExperimentConfig cfg = tiny_experiment();
    const RejectionTable serial = run_experiment(cfg, 1);
    const RejectionTable parallel = run_experiment(cfg, 3);
    CHECK(tables_equal(serial, parallel));
}

TEST_CASE("experiment cells are laid out n-major with common replicates") {
    const ExperimentConfig cfg = tiny_experiment();
    const RejectionTable table = run_experiment(cfg, 2);
    REQUIRE(table.cells.size() == 4);
    CHECK(table.cells[0].n == 40);
    CHECK(table.cells[0].alpha == 0.05);
    CHECK(table.cells[1].n == 40);
    CHECK(table.cells[1].alpha == 0.1);
    CHECK(table.cells[2].n == 60);
    for (const auto& cell : table.cells) {
        CHECK(cell.replicates == 6);
        CHECK(cell.rate() >= 0.0);
        CHECK(cell.rate() <= 1.0);
        CHECK(cell.standard_error() ==
              doctest::Approx(std::sqrt(cell.rate() * (1.0 - cell.rate()) / 6.0)));
    }
    // A rejection at the lower level implies one at the higher level.
    CHECK(table.cells[0].rejections <= table.cells[1].rejections);
    CHECK(table.cell(ModelId::Ar, Hypothesis::Null, 60, 0.1).n == 60);
    CHECK_THROWS_AS(table.cell(ModelId::Arch, Hypothesis::Null, 60, 0.1),
                    std::out_of_range);
}

TEST_CASE("csv output carries the schema and the manifest") {
    const RejectionTable table = run_experiment(tiny_experiment(), 2);
    std::ostringstream a;
    write_csv(a, table, {{"subcommand", "montecarlo"}, {"seed", "7"}});
    const std::string text = a.str();
    CHECK(text.find("# subcommand=montecarlo\n") != std::string::npos);
    CHECK(text.find("model,hypothesis,n,alpha,M,B,reject_rate,se,seed\n") !=
          std::string::npos);
    CHECK(text.find("ar,null,40,0.05,6,25,") != std::string::npos);

    std::ostringstream b;
    write_csv(b, run_experiment(tiny_experiment(), 1),
              {{"subcommand", "montecarlo"}, {"seed", "7"}});
    CHECK(text == b.str());  // byte-identical across runs and parallelism
}

TEST_CASE("text output mirrors the rejection-table layout") {
    const RejectionTable table = run_experiment(tiny_experiment(), 2);
    std::ostringstream out;
    write_text(out, table);
    const std::string text = out.str();
    CHECK(text.find("model ar, null hypothesis") != std::string::npos);
    CHECK(text.find("alpha=0.05") != std::string::npos);
    CHECK(text.find("n=    40") != std::string::npos);
}

TEST_CASE("combined tables stack experiments in call order") {
    RejectionTable table;
    ExperimentConfig cfg = tiny_experiment();
    cfg.n_list = {40};
    cfg.alphas = {0.1};
    cfg.mc_replicates = 3;
    append_experiment(table, cfg, 1);
    cfg.hypothesis = Hypothesis::Alternative;
    append_experiment(table, cfg, 1);
    REQUIRE(table.cells.size() == 2);
    CHECK(table.cells[0].hypothesis == Hypothesis::Null);
    CHECK(table.cells[1].hypothesis == Hypothesis::Alternative);

    // appending in a combined run reproduces the single-run cells
    const RejectionTable alone = run_experiment(cfg, 1);
    CHECK(alone.cells[0].rejections == table.cells[1].rejections);
}

TEST_CASE("consistency probe decays under independence") {
    const std::vector<ProbePoint> points =
        consistency_probe(ModelId::Ar, Hypothesis::Null, {60, 360}, 8, 2024, {},
                          WeightSpec::gaussian(1, 0.5));
    REQUIRE(points.size() == 2);
    CHECK(points[0].n == 60);
    CHECK(points[1].mean_statistic_over_n < points[0].mean_statistic_over_n);

    const std::vector<ProbePoint> again =
        consistency_probe(ModelId::Ar, Hypothesis::Null, {60, 360}, 8, 2024, {},
                          WeightSpec::gaussian(1, 0.5));
    CHECK(points[0].mean_statistic_over_n == again[0].mean_statistic_over_n);
}

TEST_CASE("experiment configuration is validated") {
    ExperimentConfig cfg = tiny_experiment();
    cfg.n_list.clear();
    CHECK_THROWS_AS(run_experiment(cfg, 1), std::invalid_argument);
    cfg = tiny_experiment();
    cfg.alphas = {1.5};
    CHECK_THROWS_AS(run_experiment(cfg, 1), std::invalid_argument);
    cfg = tiny_experiment();
    cfg.mc_replicates = 0;
    CHECK_THROWS_AS(run_experiment(cfg, 1), std::invalid_argument);
}
