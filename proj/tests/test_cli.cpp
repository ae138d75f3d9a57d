#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "ecosvm/cli.hpp"
#include "ecosvm/data.hpp"
#include "ecosvm/svm.hpp"

using namespace ecosvm;

namespace {

namespace fs = std::filesystem;

#ifndef ECOSVM_CLI_PATH
#define ECOSVM_CLI_PATH "ecosvm"
#endif

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ECOSVM_CLI_PATH) + " " + args + " >/dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// metrics.csv with the wall_time_ms column blanked; timing is the one
// permitted nondeterministic field.
std::string metrics_without_timing(const fs::path& path) {
    std::ifstream in(path);
    std::string line, out;
    while (std::getline(in, line)) {
        const auto cut = line.rfind(',');
        out += line.substr(0, cut) + "\n";
    }
    return out;
}

// y(x) = x and y(x) = x - 1 as hand-built models.
SvmModel line_model(double bias) {
    SvmModel m;
    m.kernel = KernelSpec::linear();
    m.support_points = {{-1.0}, {1.0}};
    m.support_labels = {-1, 1};
    m.multipliers = {0.5, 0.5};
    m.bias = bias;
    return m;
}

}  // namespace

TEST_CASE("gen task writes a loadable dataset with its config") {
    const fs::path dir = scratch_dir("ecosvm_cli_gen");
    REQUIRE(run_cli("--task gen --gen toy-linear --n 50 --p 2 --seed 3 --out-dir " +
                    dir.string()) == 0);
    CHECK(fs::exists(dir / "config.json"));
    const Dataset d = load_csv((dir / "dataset.csv").string());
    CHECK(d.size() == 50);
    CHECK(d.labeled());
}

TEST_CASE("batch and online tasks produce models and metrics") {
    const fs::path dir = scratch_dir("ecosvm_cli_runs");
    REQUIRE(run_cli("--task svm-batch --gen toy-linear --n 120 --p 2 --seed 5 "
                    "--kernel linear --out-dir " +
                    (dir / "batch").string()) == 0);
    CHECK(fs::exists(dir / "batch" / "model.json"));
    CHECK(fs::exists(dir / "batch" / "metrics.csv"));
    const SvmModel model = load_svm((dir / "batch" / "model.json").string());
    CHECK(model.size() >= 2);

    REQUIRE(run_cli("--task svm-online --gen toy-linear --n 120 --p 2 --seed 5 "
                    "--kernel linear --ns 10 --snapshot-every 20 --out-dir " +
                    (dir / "online").string()) == 0);
    const std::string metrics = slurp(dir / "online" / "metrics.csv");
    CHECK(metrics.find("T,accuracy,active_svs,accepted,wall_time_ms") == 0);

    REQUIRE(run_cli("--task svdd-online --gen blob --n 60 --p 2 --seed 5 "
                    "--kernel rbf --sigma 1 --ns 10 --out-dir " +
                    (dir / "svdd").string()) == 0);
    const std::string svdd_metrics = slurp(dir / "svdd" / "metrics.csv");
    CHECK(svdd_metrics.find("T,radius,center_similarity,survivors") == 0);
}

TEST_CASE("identical config and seed reproduce the metrics byte for byte") {
    const fs::path dir = scratch_dir("ecosvm_cli_repro");
    const std::string common =
        "--task svm-online --gen toy-linear --n 150 --p 2 --seed 11 --kernel linear "
        "--ns 10 --snapshot-every 25 --shuffle --out-dir ";
    REQUIRE(run_cli(common + (dir / "a").string()) == 0);
    REQUIRE(run_cli(common + (dir / "b").string()) == 0);
    CHECK(metrics_without_timing(dir / "a" / "metrics.csv") ==
          metrics_without_timing(dir / "b" / "metrics.csv"));
    CHECK(slurp(dir / "a" / "model.json") == slurp(dir / "b" / "model.json"));
}

TEST_CASE("grid-sigma reports a best width") {
    const fs::path dir = scratch_dir("ecosvm_cli_grid");
    REQUIRE(run_cli("--task grid-sigma --gen toy-nonlinear --n 150 --p 2 --seed 7 "
                    "--c 10 --sigmas 0.25 --sigmas 1 --sigmas 4 --out-dir " +
                    dir.string()) == 0);
    const std::string grid = slurp(dir / "sigma_grid.csv");
    CHECK(grid.find("sigma,val_accuracy") == 0);
    CHECK(grid.find("\n0.25,") != std::string::npos);
}

TEST_CASE("eval compares decision regions between two saved models") {
    const fs::path dir = scratch_dir("ecosvm_cli_eval");
    save_svm(line_model(0.0), (dir / "a.json").string());
    save_svm(line_model(-1.0), (dir / "b.json").string());

    cli::RunConfig config;
    config.task = cli::Task::Eval;
    config.model_path = (dir / "a.json").string();
    config.model_b_path = (dir / "b.json").string();
    config.grid = "0:2:200";
    config.out_dir = (dir / "cmp").string();
    REQUIRE(cli::run(config) == 0);
    CHECK(fs::exists(dir / "cmp" / "regions.csv"));

    // Disagreement fraction straight from the library call.
    cli::GridSpec grid;
    grid.lo = 0.0;
    grid.hi = 2.0;
    grid.cells_per_axis = 200;
    const auto cmp = cli::compare_regions(line_model(0.0), line_model(-1.0), grid);
    CHECK(cmp.disagreement == doctest::Approx(0.5).epsilon(1e-12));
    const auto self = cli::compare_regions(line_model(0.0), line_model(0.0), grid);
    CHECK(self.disagreement == 0.0);
}

TEST_CASE("eval aggregates metrics files into a mean curve") {
    const fs::path dir = scratch_dir("ecosvm_cli_agg");
    for (int s = 1; s <= 2; ++s) {
        REQUIRE(run_cli("--task svm-online --gen toy-linear --n 80 --p 2 --seed " +
                        std::to_string(s) + " --kernel linear --ns 10 "
                        "--snapshot-every 1000 --out-dir " +
                        (dir / std::to_string(s)).string()) == 0);
    }
    cli::RunConfig config;
    config.task = cli::Task::Eval;
    config.aggregate = {(dir / "1" / "metrics.csv").string(),
                        (dir / "2" / "metrics.csv").string()};
    config.out_dir = (dir / "mean").string();
    REQUIRE(cli::run(config) == 0);
    CHECK(fs::exists(dir / "mean" / "aggregate.csv"));
}

TEST_CASE("failures map to the documented exit codes") {
    const fs::path dir = scratch_dir("ecosvm_cli_err");
    // Missing inputs: config error.
    CHECK(run_cli("--task svm-batch --out-dir " + dir.string() + " 2>/dev/null") ==
          cli::kConfigError);
    // Unreadable file: io error.
    CHECK(run_cli("--task svm-batch --train /nonexistent.csv --out-dir " +
                  dir.string() + " 2>/dev/null") == cli::kIoError);
    // Malformed file: data error.
    const fs::path bad = dir / "bad.csv";
    std::ofstream(bad) << "0.1,0.2\n0.3\n";
    CHECK(run_cli("--task svm-batch --train " + bad.string() + " --out-dir " +
                  dir.string() + " 2>/dev/null") == cli::kDataError);
    // Non-separable data in separable mode: solver error.
    const fs::path dup = dir / "dup.csv";
    std::ofstream(dup) << "0.3,0.3,1\n0.3,0.3,-1\n";
    CHECK(run_cli("--task svm-batch --kernel rbf --sigma 1 --train " + dup.string() +
                  " --out-dir " + dir.string() + " 2>/dev/null") ==
          cli::kSolverError);
}
