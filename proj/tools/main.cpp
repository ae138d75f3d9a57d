#include <cstdio>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "ecosvm/cli.hpp"

namespace {

std::pair<int, int> parse_digits(const std::string& text) {
    int a = 0, b = 0;
    if (std::sscanf(text.c_str(), "%d,%d", &a, &b) != 2)
        throw CLI::ValidationError("--digits", "want A,B (e.g. 4,9)");
    return {a, b};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "ecosvm: SVM and SVDD training through Lotka-Volterra ecosystem dynamics,\n"
        "with online learning by ecological invasion"};
    app.get_formatter()->column_width(34);

    ecosvm::cli::RunConfig config;
    std::string task = "svm-batch";
    std::string kernel = "rbf";
    std::string solver = "oracle";
    std::string digits;
    double sigma = 1.0;
    int degree = 2;
    double offset = 0.0;
    double slack = 0.0;
    bool has_slack = false;

    app.add_option("--task", task, "Task to run")
        ->check(CLI::IsMember({"svm-batch", "svm-online", "svdd-batch", "svdd-online",
                               "gen", "eval", "grid-sigma"}))
        ->required();
    app.add_option("--kernel", kernel, "Kernel family")
        ->check(CLI::IsMember({"linear", "rbf", "polynomial"}));
    app.add_option("--sigma", sigma, "RBF width");
    app.add_option("--degree", degree, "Polynomial degree");
    app.add_option("--offset", offset, "Polynomial offset");
    app.add_option("--c", slack, "Slack bound C (omit for separable mode)")
        ->check(CLI::PositiveNumber);
    app.add_option("--solver", solver, "Steady-state solver")
        ->check(CLI::IsMember({"dynamics", "oracle"}));
    app.add_option("--ns", config.init_size, "Online initialization size N_s");
    app.add_option("--seed", config.seed, "RNG seed");
    app.add_option("--snapshot-every", config.snapshot_every,
                   "Metrics cadence for online tasks");
    app.add_flag("--shuffle", config.shuffle, "Shuffle training rows (seeded)");
    app.add_option("--train", config.train,
                   "Training data: CSV path, or IMAGES,LABELS with --digits");
    app.add_option("--test", config.test, "Held-out data (same format as --train)");
    app.add_option("--digits", digits, "IDX digit pair A,B mapped to +1,-1");
    app.add_option("--gen", config.gen,
                   "Generate data instead: toy-linear|toy-nonlinear|blob");
    app.add_option("--n", config.gen_n, "Generator sample count");
    app.add_option("--p", config.gen_p, "Generator dimension");
    app.add_option("--out-dir", config.out_dir, "Output directory");
    app.add_option("--tol", config.tol, "Solver tolerance");
    app.add_option("--max-steps", config.max_steps, "Integrator step limit");
    app.add_option("--batch-cap", config.batch_cap, "Largest N for batch fits");
    app.add_option("--sigmas", config.sigmas, "Sigma grid for grid-sigma");
    app.add_option("--val-fraction", config.val_fraction,
                   "Validation split for grid-sigma");
    app.add_option("--model", config.model_path, "Model JSON for eval");
    app.add_option("--model-b", config.model_b_path, "Second model for comparison");
    app.add_option("--grid", config.grid, "Comparison grid lo:hi:cells");
    app.add_option("--aggregate", config.aggregate,
                   "Metrics CSVs to average into one curve");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ecosvm::cli::kConfigError;
    }

    const std::map<std::string, ecosvm::cli::Task> tasks = {
        {"svm-batch", ecosvm::cli::Task::SvmBatch},
        {"svm-online", ecosvm::cli::Task::SvmOnline},
        {"svdd-batch", ecosvm::cli::Task::SvddBatch},
        {"svdd-online", ecosvm::cli::Task::SvddOnline},
        {"gen", ecosvm::cli::Task::Gen},
        {"eval", ecosvm::cli::Task::Eval},
        {"grid-sigma", ecosvm::cli::Task::GridSigma},
    };
    config.task = tasks.at(task);
    config.solver = solver == "dynamics" ? ecosvm::Solver::Dynamics
                                         : ecosvm::Solver::Oracle;
    has_slack = app.count("--c") > 0;
    if (has_slack) config.slack_bound = slack;
    if (kernel == "linear")
        config.kernel = ecosvm::KernelSpec::linear();
    else if (kernel == "rbf")
        config.kernel = ecosvm::KernelSpec::rbf(sigma);
    else
        config.kernel = ecosvm::KernelSpec::polynomial(degree, offset);
    if (app.count("--digits") > 0) {
        try {
            config.digits = parse_digits(digits);
        } catch (const CLI::Error& e) {
            std::fprintf(stderr, "error[config]: %s\n", e.what());
            return ecosvm::cli::kConfigError;
        }
    }

    return ecosvm::cli::run(config);
}
