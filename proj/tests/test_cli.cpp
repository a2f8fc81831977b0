#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
    std::string stderr_text;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
}

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("charn_cli_test_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter_++));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

RunResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    const std::string command = std::string(CHARN_CLI_PATH) + " " + args + " > " +
                                out.string() + " 2> " + err.string();
    const int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.stdout_text = slurp(out);
    result.stderr_text = slurp(err);
    return result;
}

}  // namespace

TEST_CASE("simulate output feeds the test command") {
    TempDir dir;
    const fs::path series = dir.path() / "series.txt";
    const RunResult sim = run_cli(
        "simulate --model arch --n 120 --k 1 --seed 5 --out " + series.string(),
        dir.path());
    REQUIRE(sim.exit_code == 0);

    // one parseable float per line, n + k of them
    std::ifstream in(series);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        CHECK(!line.empty());
        std::size_t used = 0;
        (void)std::stod(line, &used);
        CHECK(used == line.size());
        ++lines;
    }
    CHECK(lines == 121);

    const fs::path report = dir.path() / "report.json";
    const RunResult test = run_cli("test " + series.string() +
                                       " --boot-reps 40 --seed 9 --out " +
                                       report.string(),
                                   dir.path());
    REQUIRE(test.exit_code == 0);
    const auto j = nlohmann::json::parse(slurp(report));
    CHECK(j["statistic"].get<double>() >= 0.0);
    CHECK(j["p_value"].get<double>() >= 0.0);
    CHECK(j["p_value"].get<double>() <= 1.0);
    CHECK(j["bootstrap_statistics"].size() == 40);
    CHECK(j["config"]["subcommand"] == "test");
    CHECK(j["config"]["seed"] == 9);
}

TEST_CASE("reports are byte-identical across reruns") {
    TempDir dir;
    const fs::path series = dir.path() / "series.txt";
    REQUIRE(run_cli("simulate --model ar --n 100 --seed 3 --out " + series.string(),
                    dir.path())
                .exit_code == 0);
    const fs::path r1 = dir.path() / "r1.json";
    const fs::path r2 = dir.path() / "r2.json";
    const std::string flags = " --boot-reps 30 --seed 7 --out ";
    REQUIRE(run_cli("test " + series.string() + flags + r1.string(), dir.path())
                .exit_code == 0);
    REQUIRE(run_cli("test " + series.string() + flags + r2.string(), dir.path())
                .exit_code == 0);
    const std::string a = slurp(r1);
    CHECK(!a.empty());
    CHECK(a == slurp(r2));
}

TEST_CASE("malformed input names the offending line") {
    TempDir dir;
    const fs::path series = dir.path() / "bad.txt";
    {
        std::ofstream out(series);
        out << "0.5\n-1.25\nnot-a-number\n0.75\n";
    }
    const RunResult result = run_cli("test " + series.string(), dir.path());
    CHECK(result.exit_code == 1);
    CHECK(result.stderr_text.find("line 3") != std::string::npos);
}

TEST_CASE("short input gets an explicit minimum-length message") {
    TempDir dir;
    const fs::path series = dir.path() / "short.txt";
    {
        std::ofstream out(series);
        for (int i = 0; i < 10; ++i) out << "0.1\n";
    }
    const RunResult result = run_cli("test " + series.string(), dir.path());
    CHECK(result.exit_code == 1);
    CHECK(result.stderr_text.find("series too short") != std::string::npos);
    CHECK(result.stderr_text.find("at least") != std::string::npos);
}

TEST_CASE("missing input file is an error") {
    TempDir dir;
    const RunResult result = run_cli("test /nonexistent/file.txt", dir.path());
    CHECK(result.exit_code == 1);
}

TEST_CASE("rejection drives the exit code only on request") {
    TempDir dir;
    // Innovations whose skewness flips with the sign of the previous value:
    // centered, unit variance, but strongly dependent on the lag. The test
    // must reject this at the 5% level.
    const fs::path series = dir.path() / "dependent.txt";
    {
        std::ofstream out(series);
        unsigned long long state = 88172645463325252ull;
        auto uniform = [&state] {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            return static_cast<double>(state >> 11) * 0x1.0p-53;
        };
        auto normal_ish = [&uniform] {  // Irwin-Hall 12-fold sum
            double s = 0.0;
            for (int i = 0; i < 12; ++i) s += uniform();
            return s - 6.0;
        };
        const double half_mean = std::sqrt(2.0 / 3.14159265358979323846);
        const double half_sd = std::sqrt(1.0 - 2.0 / 3.14159265358979323846);
        double x = 0.3;
        out << x << "\n";
        for (int i = 0; i < 300; ++i) {
            const double eps =
                (x > 0 ? 1.0 : -1.0) * (std::fabs(normal_ish()) - half_mean) / half_sd;
            x = 0.5 * x + eps;
            out << x << "\n";
        }
    }
    const std::string flags = " --boot-reps 99 --seed 11";
    const RunResult plain = run_cli("test " + series.string() + flags, dir.path());
    CHECK(plain.exit_code == 0);
    const auto j = nlohmann::json::parse(plain.stdout_text);
    REQUIRE(j["reject"].get<bool>());

    const RunResult strict =
        run_cli("test " + series.string() + flags + " --exit-on-reject", dir.path());
    CHECK(strict.exit_code == 2);
}

TEST_CASE("montecarlo csv is invariant to the thread count") {
    TempDir dir;
    const std::string base =
        "montecarlo --model ar --hypothesis null --n-list 40 --alphas 0.1 "
        "--mc-reps 4 --boot-reps 20 --seed 13 --out-csv ";
    const fs::path csv1 = dir.path() / "t1.csv";
    const fs::path csv2 = dir.path() / "t2.csv";
    REQUIRE(run_cli(base + csv1.string() + " --threads 1", dir.path()).exit_code == 0);
    REQUIRE(run_cli(base + csv2.string() + " --threads 3", dir.path()).exit_code == 0);
    const std::string a = slurp(csv1);
    const std::string b = slurp(csv2);
    CHECK(!a.empty());
    // thread count is echoed in the manifest; the results must match
    const auto strip = [](const std::string& text) {
        std::string kept;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind("# threads=", 0) == 0) continue;
            kept += line + "\n";
        }
        return kept;
    };
    CHECK(strip(a) == strip(b));
    CHECK(a.find("model,hypothesis,n,alpha,M,B,reject_rate,se,seed") !=
          std::string::npos);
    CHECK(a.find("ar,null,40,0.1,4,20,") != std::string::npos);
}

TEST_CASE("a config file stands in for command-line flags") {
    TempDir dir;
    const fs::path series = dir.path() / "series.txt";
    REQUIRE(run_cli("simulate --model ar --n 90 --seed 21 --out " + series.string(),
                    dir.path())
                .exit_code == 0);

    const fs::path config = dir.path() / "run.cfg";
    {
        std::ofstream out(config);
        out << "boot-reps=25\nseed=5\nalpha=0.1\n";
    }
    const fs::path r1 = dir.path() / "from_config.json";
    const fs::path r2 = dir.path() / "from_flags.json";
    REQUIRE(run_cli("test " + series.string() + " --config " + config.string() +
                        " --out " + r1.string(),
                    dir.path())
                .exit_code == 0);
    REQUIRE(run_cli("test " + series.string() +
                        " --boot-reps 25 --seed 5 --alpha 0.1 --out " + r2.string(),
                    dir.path())
                .exit_code == 0);
    auto a = nlohmann::json::parse(slurp(r1));
    auto b = nlohmann::json::parse(slurp(r2));
    a["config"]["out"] = "";
    b["config"]["out"] = "";
    CHECK(a == b);
}
