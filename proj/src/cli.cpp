#include "ecosvm/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ecosvm/data.hpp"
#include "ecosvm/errors.hpp"
#include "ecosvm/log.hpp"
#include "ecosvm/online_svm.hpp"
#include "ecosvm/rng.hpp"
#include "ecosvm/svdd.hpp"

namespace ecosvm::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

long elapsed_ms(Clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start)
        .count();
}

const char* task_name(Task task) {
    switch (task) {
        case Task::SvmBatch: return "svm-batch";
        case Task::SvmOnline: return "svm-online";
        case Task::SvddBatch: return "svdd-batch";
        case Task::SvddOnline: return "svdd-online";
        case Task::Gen: return "gen";
        case Task::Eval: return "eval";
        case Task::GridSigma: return "grid-sigma";
    }
    return "?";
}

const char* solver_name(Solver solver) {
    return solver == Solver::Dynamics ? "dynamics" : "oracle";
}

SolverOptions solver_options(const RunConfig& config) {
    SolverOptions opts;
    opts.tol = config.tol;
    opts.max_steps = config.max_steps;
    opts.batch_cap = config.batch_cap;
    return opts;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

// Every run records its fully resolved configuration, defaults included.
void write_config(const RunConfig& config, const fs::path& dir) {
    nlohmann::json j;
    j["task"] = task_name(config.task);
    j["kernel"] = nlohmann::json::parse(config.kernel.to_json());
    j["slack_bound"] = config.slack_bound ? nlohmann::json(*config.slack_bound)
                                          : nlohmann::json(nullptr);
    j["solver"] = solver_name(config.solver);
    j["ns"] = config.init_size;
    j["seed"] = config.seed;
    j["snapshot_every"] = config.snapshot_every;
    j["shuffle"] = config.shuffle;
    j["train"] = config.train;
    j["test"] = config.test;
    j["digits"] = config.digits
                      ? nlohmann::json::array({config.digits->first,
                                               config.digits->second})
                      : nlohmann::json(nullptr);
    j["gen"] = config.gen;
    j["gen_n"] = config.gen_n;
    j["gen_p"] = config.gen_p;
    j["out_dir"] = config.out_dir;
    j["tol"] = config.tol;
    j["max_steps"] = config.max_steps;
    j["batch_cap"] = config.batch_cap;
    j["sigmas"] = config.sigmas;
    j["val_fraction"] = config.val_fraction;
    j["model"] = config.model_path;
    j["model_b"] = config.model_b_path;
    j["aggregate"] = config.aggregate;
    j["grid"] = config.grid;
    write_text(dir / "config.json", j.dump(2) + "\n");
}

Dataset generate(const std::string& kind, std::size_t n, std::size_t p,
                 std::uint64_t seed) {
    if (kind == "toy-linear") return gen_toy_linear(n, p, seed);
    if (kind == "toy-nonlinear") return gen_toy_nonlinear(n, p, seed);
    if (kind == "blob") return gen_gaussian_blob(n, p, seed);
    throw std::invalid_argument("unknown generator \"" + kind +
                                "\" (toy-linear|toy-nonlinear|blob)");
}

// "images,labels" for IDX pairs.
std::pair<std::string, std::string> split_idx_pair(const std::string& spec) {
    const auto comma = spec.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument(
            "with --digits, dataset paths are IMAGES,LABELS pairs; got \"" + spec +
            "\"");
    return {spec.substr(0, comma), spec.substr(comma + 1)};
}

Dataset load_dataset(const RunConfig& config, const std::string& path) {
    if (config.digits) {
        auto [images, labels] = split_idx_pair(path);
        return load_idx(images, labels, config.digits->first, config.digits->second);
    }
    return load_csv(path);
}

Dataset load_train(const RunConfig& config) {
    Dataset data;
    if (!config.gen.empty())
        data = generate(config.gen, config.gen_n, config.gen_p, config.seed);
    else if (!config.train.empty())
        data = load_dataset(config, config.train);
    else
        throw std::invalid_argument("no training data: give --train or --gen");
    if (config.shuffle) {
        Rng rng(config.seed);
        const auto perm = rng.permutation(data.size());
        Dataset shuffled;
        shuffled.points.reserve(data.size());
        for (std::size_t i : perm) {
            shuffled.points.push_back(std::move(data.points[i]));
            if (data.labeled()) shuffled.labels.push_back(data.labels[i]);
        }
        data = std::move(shuffled);
    }
    return data;
}

// With --gen and no --test, a held-out set of the same size comes from the
// companion seed.
std::optional<Dataset> load_test(const RunConfig& config) {
    if (!config.test.empty()) return load_dataset(config, config.test);
    if (!config.gen.empty())
        return generate(config.gen, config.gen_n, config.gen_p, config.seed + 1);
    return std::nullopt;
}

void require_labeled(const Dataset& data, const char* what) {
    if (!data.labeled())
        throw DataError(std::string(what) +
                        " needs labeled data (final CSV column of +-1)");
}

int run_svm_batch(const RunConfig& config, const fs::path& dir) {
    Dataset train = load_train(config);
    require_labeled(train, "svm-batch");
    const auto test = load_test(config);

    const auto t0 = Clock::now();
    SvmModel model = fit_batch(train.points, train.labels, config.kernel,
                               config.slack_bound, config.solver,
                               solver_options(config));
    const long wall = elapsed_ms(t0);
    save_svm(model, (dir / "model.json").string());

    const GramMatrix sv_gram = gram_matrix(model.kernel, model.support_points);
    EcoState state;
    state.abundances = model.multipliers;
    state.lambda = -model.bias;
    state.slack_bound = model.slack_bound;
    const double objective =
        dual_objective(model.multipliers, model.support_labels, sv_gram);
    const double residual = kkt_residual(state, model.support_labels, sv_gram);
    const double train_acc = accuracy(model, train.points, train.labels);
    const double test_acc =
        test ? accuracy(model, test->points, test->labels)
             : std::numeric_limits<double>::quiet_NaN();

    std::ostringstream csv;
    csv << "n_train,n_support,n_active,dual_objective,kkt_residual,train_accuracy,"
           "test_accuracy\n";
    csv << train.size() << "," << model.size() << ","
        << active_set(model.multipliers, model.slack_bound).size() << ","
        << fmt(objective) << "," << fmt(residual) << "," << fmt(train_acc) << ","
        << fmt(test_acc) << "\n";
    write_text(dir / "metrics.csv", csv.str());

    std::printf("svm-batch: N=%zu SV=%zu active=%zu train_acc=%.4f", train.size(),
                model.size(), active_set(model.multipliers, model.slack_bound).size(),
                train_acc);
    if (test) std::printf(" test_acc=%.4f", test_acc);
    std::printf(" kkt=%.2e wall_ms=%ld\n", residual, wall);
    return kOk;
}

int run_svm_online(const RunConfig& config, const fs::path& dir) {
    Dataset train = load_train(config);
    require_labeled(train, "svm-online");
    const auto test = load_test(config);
    if (train.size() <= config.init_size)
        throw std::invalid_argument("svm-online needs more than N_s = " +
                                    std::to_string(config.init_size) + " points");

    OnlineSvmConfig online;
    online.init_size = config.init_size;
    online.slack_bound = config.slack_bound;
    online.solver = solver_options(config);
    online.use_integrator = config.solver == Solver::Dynamics;

    const auto t0 = Clock::now();
    std::vector<std::vector<double>> seed_points(
        train.points.begin(), train.points.begin() + config.init_size);
    std::vector<int> seed_labels(train.labels.begin(),
                                 train.labels.begin() + config.init_size);
    OnlineSvm state(seed_points, seed_labels, config.kernel, online);

    std::ostringstream csv;
    csv << "T,accuracy,active_svs,accepted,wall_time_ms\n";
    auto snapshot = [&] {
        const double acc = test ? online_accuracy(state.model(), test->points,
                                                  test->labels)
                                : std::numeric_limits<double>::quiet_NaN();
        csv << state.seen_count() << "," << fmt(acc) << "," << state.active_count()
            << "," << state.accepted_count() << "," << elapsed_ms(t0) << "\n";
    };
    snapshot();
    for (std::size_t i = config.init_size; i < train.size(); ++i) {
        state.observe(train.points[i], train.labels[i]);
        const std::size_t streamed = state.seen_count() - config.init_size;
        if (streamed % config.snapshot_every == 0 || state.seen_count() == train.size())
            snapshot();
    }
    write_text(dir / "metrics.csv", csv.str());
    save_svm(state.model(), (dir / "model.json").string());

    std::printf("svm-online: T=%zu accepted=%zu survivors=%zu active=%zu",
                state.seen_count(), state.accepted_count(), state.survivor_count(),
                state.active_count());
    if (test)
        std::printf(" test_acc=%.4f",
                    online_accuracy(state.model(), test->points, test->labels));
    std::printf(" wall_ms=%ld\n", elapsed_ms(t0));
    return kOk;
}

int run_svdd_batch(const RunConfig& config, const fs::path& dir) {
    Dataset train = load_train(config);
    const auto t0 = Clock::now();
    SvddModel model = fit_batch_svdd(train.points, config.kernel, config.solver,
                                     solver_options(config));
    const long wall = elapsed_ms(t0);
    save_svdd(model, (dir / "model.json").string());

    const GramMatrix gram = gram_matrix(model.kernel, model.points);
    std::ostringstream csv;
    csv << "n,survivors,radius,dual_objective\n";
    csv << train.size() << "," << model.size() << "," << fmt(radius(model)) << ","
        << fmt(svdd_dual_objective(model.multipliers, gram)) << "\n";
    write_text(dir / "metrics.csv", csv.str());

    std::printf("svdd-batch: N=%zu survivors=%zu R=%.6f wall_ms=%ld\n", train.size(),
                model.size(), radius(model), wall);
    return kOk;
}

int run_svdd_online(const RunConfig& config, const fs::path& dir) {
    Dataset train = load_train(config);
    if (train.size() <= config.init_size)
        throw std::invalid_argument("svdd-online needs more than N_s = " +
                                    std::to_string(config.init_size) + " points");

    const auto opts = solver_options(config);
    // Reference sphere for the similarity curve: the batch fit of the full set.
    const SvddModel reference =
        fit_batch_svdd(train.points, config.kernel, config.solver, opts);

    const auto t0 = Clock::now();
    std::vector<std::vector<double>> seed(train.points.begin(),
                                          train.points.begin() + config.init_size);
    SvddModel model = fit_batch_svdd(seed, config.kernel, config.solver, opts);

    std::ostringstream csv;
    csv << "T,radius,center_similarity,survivors\n";
    auto snapshot = [&](std::size_t seen) {
        csv << seen << "," << fmt(radius(model)) << ","
            << fmt(center_similarity(model, reference)) << "," << model.size()
            << "\n";
    };
    snapshot(config.init_size);
    for (std::size_t i = config.init_size; i < train.size(); ++i) {
        auto [next, accepted] = observe_svdd(model, train.points[i], config.solver,
                                             opts);
        model = std::move(next);
        (void)accepted;
        const std::size_t seen = i + 1;
        if ((seen - config.init_size) % config.snapshot_every == 0 ||
            seen == train.size())
            snapshot(seen);
    }
    write_text(dir / "metrics.csv", csv.str());
    save_svdd(model, (dir / "model.json").string());

    std::printf("svdd-online: T=%zu survivors=%zu R=%.6f S=%.8f wall_ms=%ld\n",
                train.size(), model.size(), radius(model),
                center_similarity(model, reference), elapsed_ms(t0));
    return kOk;
}

int run_gen(const RunConfig& config, const fs::path& dir) {
    if (config.gen.empty())
        throw std::invalid_argument("gen task needs --gen toy-linear|toy-nonlinear|blob");
    const Dataset data = generate(config.gen, config.gen_n, config.gen_p, config.seed);
    save_csv(data, (dir / "dataset.csv").string());
    std::printf("gen: wrote %zu points (p=%zu) to %s\n", data.size(), data.dim(),
                (dir / "dataset.csv").string().c_str());
    return kOk;
}

GridSpec parse_grid(const std::string& text, std::uint64_t seed) {
    GridSpec grid;
    grid.seed = seed;
    if (text.empty()) return grid;
    double lo = 0, hi = 0;
    unsigned long cells = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lu", &lo, &hi, &cells) != 3 || !(hi > lo) ||
        cells == 0)
        throw std::invalid_argument("bad --grid \"" + text + "\" (want lo:hi:cells)");
    grid.lo = lo;
    grid.hi = hi;
    grid.cells_per_axis = cells;
    return grid;
}

int run_eval(const RunConfig& config, const fs::path& dir) {
    if (!config.aggregate.empty()) {
        // Mean curve over per-realization metrics files with a shared schema.
        std::vector<std::vector<std::vector<double>>> tables;
        std::string header;
        for (const auto& path : config.aggregate) {
            std::ifstream in(path);
            if (!in) throw IoError("cannot open " + path);
            std::string line;
            if (!std::getline(in, line)) throw DataError(path + ": empty metrics file");
            if (header.empty())
                header = line;
            else if (header != line)
                throw DataError(path + ": metrics header differs from the first file");
            std::vector<std::vector<double>> rows;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                std::vector<double> row;
                std::stringstream ss(line);
                std::string field;
                while (std::getline(ss, field, ','))
                    row.push_back(std::strtod(field.c_str(), nullptr));
                rows.push_back(std::move(row));
            }
            tables.push_back(std::move(rows));
        }
        for (const auto& t : tables)
            if (t.size() != tables.front().size())
                throw DataError("metrics files disagree on row count; aggregate "
                                "runs with identical snapshot schedules");
        std::ostringstream csv;
        csv << header << "\n";
        for (std::size_t r = 0; r < tables.front().size(); ++r) {
            const std::size_t cols = tables.front()[r].size();
            for (std::size_t c = 0; c < cols; ++c) {
                double mean = 0.0;
                for (const auto& t : tables) mean += t[r][c];
                mean /= static_cast<double>(tables.size());
                csv << (c ? "," : "") << fmt(mean);
            }
            csv << "\n";
        }
        write_text(dir / "aggregate.csv", csv.str());
        std::printf("eval: aggregated %zu metrics files\n", tables.size());
        return kOk;
    }

    if (config.model_path.empty())
        throw std::invalid_argument("eval needs --model (or --aggregate)");
    std::ifstream probe(config.model_path);
    if (!probe) throw IoError("cannot open " + config.model_path);
    std::stringstream buf;
    buf << probe.rdbuf();
    const auto j = nlohmann::json::parse(buf.str(), nullptr, false);
    const std::string type = j.is_object() ? j.value("type", "") : "";

    if (type == "svm") {
        const SvmModel model = svm_from_json(buf.str());
        if (!config.model_b_path.empty()) {
            const SvmModel other = load_svm(config.model_b_path);
            const GridSpec grid = parse_grid(config.grid, config.seed);
            const RegionComparison cmp = compare_regions(model, other, grid);
            if (!cmp.csv_rows.empty()) {
                std::ostringstream csv;
                for (const auto& row : cmp.csv_rows) csv << row << "\n";
                write_text(dir / "regions.csv", csv.str());
            }
            std::printf("eval: disagreement=%.6f\n", cmp.disagreement);
            return kOk;
        }
        if (config.test.empty())
            throw std::invalid_argument("eval needs --test or --model-b");
        Dataset test = load_dataset(config, config.test);
        require_labeled(test, "eval");
        const double acc = accuracy(model, test.points, test.labels);
        write_text(dir / "eval.csv", "test_accuracy\n" + fmt(acc) + "\n");
        std::printf("eval: test_accuracy=%.6f\n", acc);
        return kOk;
    }
    if (type == "svdd") {
        const SvddModel model = svdd_from_json(buf.str());
        if (!config.model_b_path.empty()) {
            const SvddModel other = load_svdd(config.model_b_path);
            std::printf("eval: center_similarity=%.10f\n",
                        center_similarity(model, other));
            return kOk;
        }
        if (config.test.empty())
            throw std::invalid_argument("eval needs --test or --model-b");
        Dataset test = load_dataset(config, config.test);
        std::size_t outliers = 0;
        for (const auto& x : test.points)
            if (outlier_score(model, x) > 0.0) ++outliers;
        const double rate =
            static_cast<double>(outliers) / static_cast<double>(test.size());
        write_text(dir / "eval.csv",
                   "radius,outlier_fraction\n" + fmt(radius(model)) + "," + fmt(rate) +
                       "\n");
        std::printf("eval: radius=%.6f outlier_fraction=%.6f\n", radius(model), rate);
        return kOk;
    }
    throw DataError(config.model_path + ": unknown model type \"" + type + "\"");
}

int run_grid_sigma(const RunConfig& config, const fs::path& dir) {
    Dataset train = load_train(config);
    require_labeled(train, "grid-sigma");
    if (train.size() < 10)
        throw std::invalid_argument("grid-sigma needs at least 10 points");
    if (!(config.val_fraction > 0.0 && config.val_fraction < 1.0))
        throw std::invalid_argument("--val-fraction must be in (0,1)");

    Rng rng(config.seed);
    const auto perm = rng.permutation(train.size());
    const std::size_t n_val =
        std::max<std::size_t>(1, static_cast<std::size_t>(
                                     config.val_fraction *
                                     static_cast<double>(train.size())));
    std::vector<std::vector<double>> fit_pts, val_pts;
    std::vector<int> fit_lab, val_lab;
    for (std::size_t r = 0; r < perm.size(); ++r) {
        const std::size_t i = perm[r];
        if (r < n_val) {
            val_pts.push_back(train.points[i]);
            val_lab.push_back(train.labels[i]);
        } else {
            fit_pts.push_back(train.points[i]);
            fit_lab.push_back(train.labels[i]);
        }
    }

    std::ostringstream csv;
    csv << "sigma,val_accuracy\n";
    double best_sigma = 0.0, best_acc = -1.0;
    for (double sigma : config.sigmas) {
        double acc = std::numeric_limits<double>::quiet_NaN();
        try {
            const SvmModel model =
                fit_batch(fit_pts, fit_lab, KernelSpec::rbf(sigma),
                          config.slack_bound, config.solver, solver_options(config));
            acc = accuracy(model, val_pts, val_lab);
        } catch (const DivergenceError&) {
            log::info("grid-sigma: sigma=%g diverged in separable mode", sigma);
        }
        csv << fmt(sigma) << "," << fmt(acc) << "\n";
        if (acc > best_acc) {
            best_acc = acc;
            best_sigma = sigma;
        }
    }
    write_text(dir / "sigma_grid.csv", csv.str());
    if (best_acc < 0.0) throw ConvergenceError("no sigma produced a model", 0.0);
    std::printf("grid-sigma: best sigma=%g (val_accuracy=%.6f)\n", best_sigma,
                best_acc);
    return kOk;
}

}  // namespace

RegionComparison compare_regions(const SvmModel& a, const SvmModel& b,
                                 const GridSpec& grid) {
    if (a.support_points.empty() || b.support_points.empty())
        throw std::invalid_argument("compare_regions on an empty model");
    const std::size_t dim = a.support_points.front().size();
    if (dim != b.support_points.front().size())
        throw std::invalid_argument("compare_regions: models disagree on dimension");

    RegionComparison out;
    std::size_t total = 0, differ = 0;
    const double span = grid.hi - grid.lo;
    const auto cell = [&](std::size_t i, std::size_t cells) {
        return grid.lo + (static_cast<double>(i) + 0.5) * span /
                             static_cast<double>(cells);
    };

    if (dim == 1) {
        out.csv_rows.push_back("x,sign_a,sign_b");
        for (std::size_t i = 0; i < grid.cells_per_axis; ++i) {
            const std::vector<double> x = {cell(i, grid.cells_per_axis)};
            const int sa = classify(a, x), sb = classify(b, x);
            ++total;
            differ += sa != sb;
            out.csv_rows.push_back(fmt(x[0]) + "," + std::to_string(sa) + "," +
                                   std::to_string(sb));
        }
    } else if (dim == 2) {
        out.csv_rows.push_back("x,y,sign_a,sign_b");
        for (std::size_t i = 0; i < grid.cells_per_axis; ++i) {
            for (std::size_t j = 0; j < grid.cells_per_axis; ++j) {
                const std::vector<double> x = {cell(i, grid.cells_per_axis),
                                               cell(j, grid.cells_per_axis)};
                const int sa = classify(a, x), sb = classify(b, x);
                ++total;
                differ += sa != sb;
                out.csv_rows.push_back(fmt(x[0]) + "," + fmt(x[1]) + "," +
                                       std::to_string(sa) + "," + std::to_string(sb));
            }
        }
    } else {
        // No grid rendering above two dimensions; Monte Carlo fraction only.
        Rng rng(grid.seed);
        const std::size_t samples = grid.cells_per_axis * grid.cells_per_axis;
        for (std::size_t s = 0; s < samples; ++s) {
            std::vector<double> x(dim);
            for (double& v : x) v = grid.lo + span * rng.uniform();
            ++total;
            differ += classify(a, x) != classify(b, x);
        }
    }
    out.disagreement = static_cast<double>(differ) / static_cast<double>(total);
    return out;
}

int run(const RunConfig& config) {
    try {
        config.kernel.validate();
        const fs::path dir(config.out_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create out dir " + dir.string());
        write_config(config, dir);

        switch (config.task) {
            case Task::SvmBatch: return run_svm_batch(config, dir);
            case Task::SvmOnline: return run_svm_online(config, dir);
            case Task::SvddBatch: return run_svdd_batch(config, dir);
            case Task::SvddOnline: return run_svdd_online(config, dir);
            case Task::Gen: return run_gen(config, dir);
            case Task::Eval: return run_eval(config, dir);
            case Task::GridSigma: return run_grid_sigma(config, dir);
        }
        throw std::invalid_argument("unknown task");
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error[config]: %s\n", e.what());
        return kConfigError;
    } catch (const DataError& e) {
        std::fprintf(stderr, "error[data]: %s\n", e.what());
        return kDataError;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error[io]: %s\n", e.what());
        return kIoError;
    } catch (const ConvergenceError& e) {
        std::fprintf(stderr, "error[solver]: %s\n", e.what());
        return kSolverError;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "error[solver]: %s\n", e.what());
        return kSolverError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error[internal]: %s\n", e.what());
        return 1;
    }
}

}  // namespace ecosvm::cli
