#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecosvm/kernel.hpp"
#include "ecosvm/svm.hpp"

namespace ecosvm::cli {

enum class Task { SvmBatch, SvmOnline, SvddBatch, SvddOnline, Gen, Eval, GridSigma };

// Exit codes, also printed as error[<name>] diagnostics.
enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kDataError = 3,
    kSolverError = 4,
    kIoError = 5,
};

struct RunConfig {
    Task task = Task::SvmBatch;

    KernelSpec kernel = KernelSpec::rbf(1.0);
    std::optional<double> slack_bound;          // --c
    Solver solver = Solver::Oracle;             // --solver
    std::size_t init_size = 10;                 // --ns
    std::uint64_t seed = 1;                     // --seed
    std::size_t snapshot_every = 10;            // --snapshot-every
    bool shuffle = false;                       // --shuffle (seeded)

    // Datasets. With --digits set, train/test are "images,labels" IDX pairs;
    // otherwise CSV paths. Generator specs (--gen toy-linear --n --p) can
    // stand in for either.
    std::string train;
    std::string test;
    std::optional<std::pair<int, int>> digits;  // --digits a,b

    std::string gen;                            // toy-linear|toy-nonlinear|blob
    std::size_t gen_n = 200;
    std::size_t gen_p = 2;

    std::string out_dir = ".";
    double tol = 1e-8;
    long max_steps = 200000;
    std::size_t batch_cap = 5000;               // --batch-cap

    std::vector<double> sigmas = {1, 2, 4, 8, 16};  // --sigmas (grid-sigma)
    double val_fraction = 0.2;                      // --val-fraction

    std::string model_path;                     // --model (eval)
    std::string model_b_path;                   // --model-b (eval compare)
    std::vector<std::string> aggregate;         // --aggregate (eval)
    std::string grid;                           // --grid lo:hi:cells (eval compare)
};

struct GridSpec {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t cells_per_axis = 100;
    /// Used when the models' dimension exceeds 2: cells_per_axis^2 points are
    /// sampled uniformly from [lo,hi]^p instead of a regular grid.
    std::uint64_t seed = 1;
};

struct RegionComparison {
    double disagreement = 0.0;
    /// One row per evaluated cell: coordinates, sign_a, sign_b (dim <= 2).
    std::vector<std::string> csv_rows;
};

/// Fraction of grid cells where the two models' predicted classes differ.
/// Throws std::invalid_argument on dimension mismatch.
RegionComparison compare_regions(const SvmModel& a, const SvmModel& b,
                                 const GridSpec& grid);

/// Executes one task: writes metrics CSV, model JSON and the fully resolved
/// config into out_dir; returns an ExitCode. All errors are reported on
/// stderr as error[<code>]: message.
int run(const RunConfig& config);

}  // namespace ecosvm::cli
