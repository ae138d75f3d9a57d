// Acceptance suite: one criterion per function, one PASS/FAIL/SKIP line each.
// Exit status is the number of failed criteria.
//
// Criterion 6 needs the MNIST IDX files (not bundled); point --mnist-dir or
// MNIST_DIR at a directory holding train-images-idx3-ubyte,
// train-labels-idx1-ubyte, t10k-images-idx3-ubyte, t10k-labels-idx1-ubyte.
// The desk-scale subsample runs by default; add --full-mnist for the full
// stream.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ecosvm/cli.hpp"
#include "ecosvm/data.hpp"
#include "ecosvm/dynamics.hpp"
#include "ecosvm/online_svm.hpp"
#include "ecosvm/svdd.hpp"
#include "ecosvm/svm.hpp"
#include "test_support.hpp"

using namespace ecosvm;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    enum Status { Pass, Fail, Skip } status = Fail;
    std::string detail;
};

Outcome pass(const std::string& detail) { return {Outcome::Pass, detail}; }
Outcome fail(const std::string& detail) { return {Outcome::Fail, detail}; }
Outcome skip(const std::string& detail) { return {Outcome::Skip, detail}; }

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return buf;
}

struct Context {
    std::string mnist_dir;
    bool full_mnist = false;
};

// ---------------------------------------------------------------- criterion 1
// LV steady states and the QP oracle agree on 50 random datasets.
Outcome oracle_equivalence(const Context&) {
    const auto start = Clock::now();
    double worst_gap = 0.0;
    std::size_t disagreements = 0;
    for (int s = 1; s <= 50; ++s) {
        const std::size_t n = 10 + static_cast<std::size_t>(s % 21);
        const std::size_t p = 1 + static_cast<std::size_t>(s % 5);
        const int combo = s % 4;
        const KernelSpec kernel = (combo % 2) ? KernelSpec::rbf(0.8)
                                              : KernelSpec::linear();
        const std::optional<double> c =
            combo < 2 ? std::nullopt : std::optional<double>(combo == 2 ? 0.5 : 10.0);
        const testsup::TestData data =
            c ? testsup::noisy_separable(n, p, 1000 + s)
              : testsup::margin_separable(n, p, 1000 + s);

        const SvmModel dyn =
            fit_batch(data.points, data.labels, kernel, c, Solver::Dynamics);
        const SvmModel orc =
            fit_batch(data.points, data.labels, kernel, c, Solver::Oracle);

        const GramMatrix gram = gram_matrix(kernel, data.points);
        // Re-expand survivor multipliers over the full index set for the
        // objective comparison.
        auto expand = [&](const SvmModel& m) {
            std::vector<double> full(n, 0.0);
            std::size_t k = 0;
            for (std::size_t i = 0; i < n && k < m.size(); ++i)
                if (data.points[i] == m.support_points[k] &&
                    data.labels[i] == m.support_labels[k])
                    full[i] = m.multipliers[k++];
            return full;
        };
        const double l_dyn = dual_objective(expand(dyn), data.labels, gram);
        const double l_orc = dual_objective(expand(orc), data.labels, gram);
        const double gap = std::abs(l_dyn - l_orc) / std::max(1.0, std::abs(l_orc));
        worst_gap = std::max(worst_gap, gap);

        Rng grid_rng(9000 + s);
        for (int g = 0; g < 100; ++g) {
            std::vector<double> x(p);
            for (double& v : x) v = grid_rng.uniform();
            disagreements += classify(dyn, x) != classify(orc, x);
        }
    }
    const double elapsed = seconds_since(start);
    if (worst_gap > 1e-6)
        return fail(fmt("worst relative dual gap %.3e exceeds 1e-6", worst_gap));
    if (disagreements > 0)
        return fail(fmt("%zu grid classifications differ", disagreements));
    if (elapsed >= 60.0) return fail(fmt("took %.1f s (budget 60 s)", elapsed));
    return pass(fmt("50 datasets, worst dual gap %.2e, 0/5000 grid disagreements, "
                    "%.1f s",
                    worst_gap, elapsed));
}

// ---------------------------------------------------------------- criterion 2
// Every fitted model, batch or right after an online acceptance, certifies
// KKT residual < 1e-6.
Outcome kkt_certification(const Context&) {
    double worst = 0.0;
    const auto note = [&](double r) { worst = std::max(worst, r); };

    // Batch fits across kernels, modes and solvers, checked over the full
    // training system (zeros restored for pruned points) with the model's
    // own bias. The last entry saturates every multiplier and certifies the
    // fallback bias as well.
    struct Config {
        KernelSpec kernel;
        std::optional<double> c;
        Solver solver;
        int data_kind;  // 0 separable, 1 noisy, 2 duplicate-heavy saturated
    };
    const std::vector<Config> configs = {
        {KernelSpec::linear(), std::nullopt, Solver::Oracle, 0},
        {KernelSpec::rbf(0.8), std::nullopt, Solver::Dynamics, 0},
        {KernelSpec::rbf(0.8), 10.0, Solver::Oracle, 1},
        {KernelSpec::linear(), 2.0, Solver::Oracle, 1},
        {KernelSpec::rbf(0.8), 10.0, Solver::Dynamics, 1},
        {KernelSpec::polynomial(2, 1.0), 5.0, Solver::Oracle, 1},
        {KernelSpec::rbf(1.0), 0.5, Solver::Oracle, 2},
    };
    int idx = 0;
    for (const auto& cfg : configs) {
        testsup::TestData data;
        if (cfg.data_kind == 0)
            data = testsup::margin_separable(24, 2, 2000 + idx);
        else if (cfg.data_kind == 1)
            data = testsup::noisy_separable(24, 2, 2000 + idx);
        else {
            // Coincident opposite-label pairs: every multiplier saturates.
            data = testsup::margin_separable(6, 2, 2000 + idx);
            const std::size_t m = data.points.size();
            for (std::size_t i = 0; i < m; ++i) {
                data.points.push_back(data.points[i]);
                data.labels.push_back(-data.labels[i]);
            }
        }
        ++idx;
        const SvmModel model =
            fit_batch(data.points, data.labels, cfg.kernel, cfg.c, cfg.solver);
        std::vector<double> full(data.points.size(), 0.0);
        std::size_t k = 0;
        for (std::size_t i = 0; i < data.points.size() && k < model.size(); ++i)
            if (data.points[i] == model.support_points[k] &&
                data.labels[i] == model.support_labels[k])
                full[i] = model.multipliers[k++];
        EcoState state;
        state.abundances = full;
        state.slack_bound = cfg.c;
        state.lambda = -model.bias;
        note(kkt_residual(state, data.labels, gram_matrix(cfg.kernel, data.points)));
    }

    // Online streams: survivor system after every acceptance.
    for (int stream = 0; stream < 2; ++stream) {
        const bool slack = stream == 1;
        const auto data = slack ? testsup::noisy_separable(60, 2, 2100 + stream)
                                : testsup::margin_separable(60, 2, 2100 + stream);
        OnlineSvmConfig config;
        config.init_size = 10;
        if (slack) config.slack_bound = 10.0;
        const KernelSpec kernel = slack ? KernelSpec::rbf(0.8) : KernelSpec::linear();
        std::vector<std::vector<double>> seed(data.points.begin(),
                                              data.points.begin() + 10);
        std::vector<int> seed_labels(data.labels.begin(), data.labels.begin() + 10);
        OnlineSvm state(seed, seed_labels, kernel, config);
        for (std::size_t i = 10; i < data.points.size(); ++i) {
            if (!state.observe(data.points[i], data.labels[i])) continue;
            EcoState eco;
            eco.abundances = state.model().multipliers;
            eco.lambda = -state.model().bias;
            eco.slack_bound = config.slack_bound;
            note(kkt_residual(eco, state.model().support_labels,
                              gram_matrix(kernel, state.model().support_points)));
        }
    }

    if (worst >= 1e-6) return fail(fmt("worst KKT residual %.3e (limit 1e-6)", worst));
    return pass(fmt("worst KKT residual %.2e over 6 batch fits and 2 streams", worst));
}

// ---------------------------------------------------------------- criterion 3
Outcome toy_linear(const Context&) {
    const auto start = Clock::now();
    const Dataset train = gen_toy_linear(200, 2, 7);
    const Dataset test = gen_toy_linear(2000, 2, 1007);

    const SvmModel batch = fit_batch(train.points, train.labels, KernelSpec::linear());
    OnlineSvmConfig config;
    config.init_size = 10;
    OnlineSvm state(train.points, train.labels, KernelSpec::linear(), config);

    const double acc_batch = accuracy(batch, test.points, test.labels);
    const double acc_online = accuracy(state.model(), test.points, test.labels);

    cli::GridSpec grid;
    grid.lo = 0.0;
    grid.hi = 1.0;
    grid.cells_per_axis = 100;
    const double disagreement =
        cli::compare_regions(batch, state.model(), grid).disagreement;
    const double elapsed = seconds_since(start);

    if (std::abs(acc_online - acc_batch) > 0.02)
        return fail(fmt("|online %.4f - batch %.4f| > 0.02", acc_online, acc_batch));
    if (disagreement > 0.05)
        return fail(fmt("decision-region disagreement %.4f > 0.05", disagreement));
    if (elapsed >= 10.0) return fail(fmt("took %.1f s (budget 10 s)", elapsed));
    return pass(fmt("batch %.4f vs online %.4f, disagreement %.4f, %.1f s", acc_batch,
                    acc_online, disagreement, elapsed));
}

// ---------------------------------------------------------------- criterion 4
Outcome toy_nonlinear(const Context&) {
    const auto start = Clock::now();
    const Dataset train = gen_toy_nonlinear(200, 2, 7);
    const Dataset test = gen_toy_nonlinear(2000, 2, 1007);
    const KernelSpec kernel = KernelSpec::rbf(0.3);
    const double c = 10.0;

    const SvmModel batch = fit_batch(train.points, train.labels, kernel, c);
    OnlineSvmConfig config;
    config.init_size = 10;
    config.slack_bound = c;
    OnlineSvm state(train.points, train.labels, kernel, config);

    const double acc_batch = accuracy(batch, test.points, test.labels);
    const double acc_online = accuracy(state.model(), test.points, test.labels);
    const double elapsed = seconds_since(start);

    if (std::abs(acc_online - acc_batch) > 0.03)
        return fail(fmt("|online %.4f - batch %.4f| > 0.03", acc_online, acc_batch));
    if (elapsed >= 30.0) return fail(fmt("took %.1f s (budget 30 s)", elapsed));
    return pass(fmt("batch %.4f vs online %.4f (RBF sigma=0.3, C=10), %.1f s",
                    acc_batch, acc_online, elapsed));
}

// ---------------------------------------------------------------- criterion 5
// Accuracy and active-count curves at desk scale (N = 1000 in place of the
// full stream), averaged over 5 seeds, for the p=100 linear and p=30
// nonlinear setups with N_s = 30.
Outcome si_curves(const Context&) {
    const auto start = Clock::now();
    struct Setup {
        const char* name;
        bool nonlinear;
        std::size_t p;
        KernelSpec kernel;
        std::optional<double> c;
        double tol;
    };
    const std::vector<Setup> setups = {
        // The separable 100-d fits carry huge multipliers; accuracy-level
        // conclusions need only a loose dual gap.
        {"linear p=100", false, 100, KernelSpec::linear(), std::nullopt, 1e-2},
        {"nonlinear p=30", true, 30, KernelSpec::rbf(2.0), 10.0, 1e-6},
    };
    std::string detail;
    for (const auto& setup : setups) {
        double batch_acc = 0.0, online_acc = 0.0;
        double batch_active = 0.0, online_active = 0.0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const Dataset train = setup.nonlinear
                                      ? gen_toy_nonlinear(1000, setup.p, seed)
                                      : gen_toy_linear(1000, setup.p, seed);
            const Dataset test = setup.nonlinear
                                     ? gen_toy_nonlinear(2000, setup.p, 500 + seed)
                                     : gen_toy_linear(2000, setup.p, 500 + seed);
            SolverOptions opts;
            opts.multiplier_cap = 1e9;  // separable fits on tight margins
            opts.tol = setup.tol;
            const SvmModel batch = fit_batch(train.points, train.labels, setup.kernel,
                                             setup.c, Solver::Oracle, opts);
            OnlineSvmConfig config;
            config.init_size = 30;
            config.slack_bound = setup.c;
            config.solver = opts;
            OnlineSvm state(train.points, train.labels, setup.kernel, config);

            batch_acc += accuracy(batch, test.points, test.labels);
            online_acc += accuracy(state.model(), test.points, test.labels);
            batch_active += static_cast<double>(
                active_set(batch.multipliers, setup.c).size());
            online_active += static_cast<double>(state.active_count());
        }
        batch_acc /= 5;
        online_acc /= 5;
        batch_active /= 5;
        online_active /= 5;
        if (std::abs(online_acc - batch_acc) > 0.03)
            return fail(fmt("%s: |online %.4f - batch %.4f| > 0.03", setup.name,
                            online_acc, batch_acc));
        if (std::abs(online_active - batch_active) > 0.25 * batch_active)
            return fail(fmt("%s: active count %.1f vs batch %.1f (25%% band)",
                            setup.name, online_active, batch_active));
        detail += fmt("%s: acc %.4f/%.4f active %.0f/%.0f; ", setup.name, online_acc,
                      batch_acc, online_active, batch_active);
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 300.0) return fail(fmt("took %.1f s (budget 300 s)", elapsed));
    return pass(detail + fmt("%.0f s (N=1000 desk scale)", elapsed));
}

// ---------------------------------------------------------------- criterion 6
Outcome mnist(const Context& ctx) {
    namespace fs = std::filesystem;
    if (ctx.mnist_dir.empty())
        return skip("MNIST not found; set --mnist-dir or MNIST_DIR to run");
    const fs::path dir(ctx.mnist_dir);
    for (const char* name : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                             "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"})
        if (!fs::exists(dir / name))
            return skip(std::string("missing ") + name + " under " + ctx.mnist_dir);

    Dataset train = load_idx((dir / "train-images-idx3-ubyte").string(),
                             (dir / "train-labels-idx1-ubyte").string(), 4, 9);
    Dataset test = load_idx((dir / "t10k-images-idx3-ubyte").string(),
                            (dir / "t10k-labels-idx1-ubyte").string(), 4, 9);

    const bool full = ctx.full_mnist;
    Rng rng(4242);
    const auto take = [&](Dataset& d, std::size_t count) {
        const auto perm = rng.permutation(d.size());
        Dataset out;
        for (std::size_t i = 0; i < std::min(count, d.size()); ++i) {
            out.points.push_back(std::move(d.points[perm[i]]));
            out.labels.push_back(d.labels[perm[i]]);
        }
        return out;
    };
    if (!full) {
        train = take(train, 2000);
        test = take(test, 2000);
    }

    // Cross-validate sigma on a modest subsample.
    Dataset cv = train;
    cv = take(cv, 500);
    double best_sigma = 0.0, best_acc = -1.0;
    for (double sigma : {2.0, 4.0, 6.0, 8.0}) {
        const std::size_t n_fit = cv.size() * 4 / 5;
        std::vector<std::vector<double>> fit_pts(cv.points.begin(),
                                                 cv.points.begin() + n_fit);
        std::vector<int> fit_lab(cv.labels.begin(), cv.labels.begin() + n_fit);
        std::vector<std::vector<double>> val_pts(cv.points.begin() + n_fit,
                                                 cv.points.end());
        std::vector<int> val_lab(cv.labels.begin() + n_fit, cv.labels.end());
        const SvmModel m =
            fit_batch(fit_pts, fit_lab, KernelSpec::rbf(sigma), 10.0);
        const double acc = accuracy(m, val_pts, val_lab);
        if (acc > best_acc) {
            best_acc = acc;
            best_sigma = sigma;
        }
    }
    const KernelSpec kernel = KernelSpec::rbf(best_sigma);

    SolverOptions opts;
    opts.batch_cap = 20000;
    const SvmModel batch = fit_batch(train.points, train.labels, kernel, 10.0,
                                     Solver::Oracle, opts);
    const double acc_batch = accuracy(batch, test.points, test.labels);

    OnlineSvmConfig config;
    config.init_size = 30;
    config.slack_bound = 10.0;
    config.solver = opts;
    OnlineSvm state(train.points, train.labels, kernel, config);
    const double acc_online = accuracy(state.model(), test.points, test.labels);
    const std::size_t active = state.active_count();

    if (full) {
        if (acc_batch < 0.98) return fail(fmt("batch accuracy %.4f < 0.98", acc_batch));
        if (std::abs(acc_online - acc_batch) > 0.01)
            return fail(fmt("|online %.4f - batch %.4f| > 0.01", acc_online,
                            acc_batch));
        if (active < 500 || active > 1000)
            return fail(fmt("active count %zu outside [500, 1000]", active));
        return pass(fmt("full 4v9: batch %.4f online %.4f active %zu (sigma=%g)",
                        acc_batch, acc_online, active, best_sigma));
    }
    if (acc_batch < 0.96) return fail(fmt("batch accuracy %.4f < 0.96", acc_batch));
    if (std::abs(acc_online - acc_batch) > 0.02)
        return fail(fmt("|online %.4f - batch %.4f| > 0.02", acc_online, acc_batch));
    return pass(fmt("desk-scale 4v9 (2000/2000): batch %.4f online %.4f active %zu "
                    "(sigma=%g)",
                    acc_batch, acc_online, active, best_sigma));
}

// ---------------------------------------------------------------- criterion 7
Outcome svdd_convergence(const Context&) {
    const auto start = Clock::now();
    double worst_dr = 0.0, worst_s = 1.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto cloud = gen_gaussian_blob(100, 15, seed).points;
        const SvddModel batch = fit_batch_svdd(cloud, KernelSpec::rbf(1.0));
        std::vector<std::vector<double>> seed_pts(cloud.begin(), cloud.begin() + 30);
        SvddModel online = fit_batch_svdd(seed_pts, KernelSpec::rbf(1.0));
        for (std::size_t i = 30; i < cloud.size(); ++i)
            online = observe_svdd(online, cloud[i]).first;
        worst_dr = std::max(worst_dr, std::abs(radius(online) - radius(batch)));
        worst_s = std::min(worst_s, center_similarity(online, batch));
    }
    const double elapsed = seconds_since(start);
    if (worst_dr > 1e-3) return fail(fmt("|R - R_batch| = %.2e > 1e-3", worst_dr));
    if (worst_s < 1.0 - 1e-6) return fail(fmt("S = %.8f < 1 - 1e-6", worst_s));
    if (elapsed >= 60.0) return fail(fmt("took %.1f s (budget 60 s)", elapsed));
    return pass(fmt("5 seeds (p=15, N=100, N_s=30): max |dR| %.1e, min S %.8f, %.1f s",
                    worst_dr, worst_s, elapsed));
}

// ---------------------------------------------------------------- criterion 8
Outcome fisvdd_identity(const Context&) {
    Rng rng(8001);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 3 + rng.index(10);
        const std::size_t p = 1 + rng.index(4);
        const double sigma = 0.5 + 1.5 * rng.uniform();
        const auto cloud = testsup::random_cloud(n, p, 8100 + trial);
        const SvddModel model = fit_batch_svdd(cloud, KernelSpec::rbf(sigma));
        std::vector<double> x0(p);
        for (double& v : x0) v = 3.0 * rng.gaussian();
        double lo = 1e300, hi = -1e300;
        for (std::size_t k = 0; k < model.size(); ++k) {
            const double r = svdd_invasion_rate(model, x0, k);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        worst = std::max(worst, hi - lo);
    }
    if (worst >= 1e-8) return fail(fmt("reference-point spread %.2e >= 1e-8", worst));
    return pass(fmt("1000 model/query pairs, max spread %.2e", worst));
}

// ---------------------------------------------------------------- criterion 9
Outcome invasion_soundness(const Context&) {
    std::size_t rejected_checked = 0, accepted_checked = 0, forced = 0;
    double worst_rejected = 0.0, worst_accepted = 1.0;
    for (int stream = 1; stream <= 20; ++stream) {
        const bool slack = stream % 2 == 0;
        const std::size_t n = 30 + static_cast<std::size_t>(stream);
        const auto data = slack ? testsup::noisy_separable(n, 2, 9000 + stream)
                                : testsup::margin_separable(n, 2, 9000 + stream);
        const KernelSpec kernel = slack ? KernelSpec::rbf(0.8) : KernelSpec::linear();
        OnlineSvmConfig config;
        config.init_size = 10;
        if (slack) config.slack_bound = 10.0;
        std::vector<std::vector<double>> seed(data.points.begin(),
                                              data.points.begin() + 10);
        std::vector<int> seed_labels(data.labels.begin(), data.labels.begin() + 10);
        OnlineSvm state(seed, seed_labels, kernel, config);

        for (std::size_t i = 10; i < n; ++i) {
            // The invasion test may be undefined (no active support vector);
            // such points are force-accepted by design and say nothing about
            // the invasion condition itself.
            bool testable = true;
            try {
                (void)state.invasion_rate(data.points[i], data.labels[i]);
            } catch (const EmptyActiveSetError&) {
                testable = false;
                ++forced;
            }
            // Re-solve over survivors + candidate with the oracle, exactly as
            // an acceptance would.
            auto pts = state.model().support_points;
            auto labs = state.model().support_labels;
            auto warm = state.model().multipliers;
            pts.push_back(data.points[i]);
            labs.push_back(data.labels[i]);
            warm.push_back(0.0);
            const auto resolved = qp_solve(labs, gram_matrix(kernel, pts),
                                           config.slack_bound, 1e-12, warm);
            const bool accepted = state.observe(data.points[i], data.labels[i]);
            if (!testable) continue;
            if (accepted) {
                ++accepted_checked;
                worst_accepted = std::min(worst_accepted, resolved.back());
            } else {
                ++rejected_checked;
                worst_rejected = std::max(worst_rejected, resolved.back());
            }
        }
    }
    if (worst_rejected >= 1e-6)
        return fail(fmt("a rejected point earned multiplier %.2e", worst_rejected));
    if (worst_accepted <= 1e-6)
        return fail(fmt("an accepted point earned only %.2e", worst_accepted));
    return pass(fmt("%zu rejections (max mult %.1e), %zu acceptances (min mult "
                    "%.1e) across 20 streams",
                    rejected_checked, worst_rejected, accepted_checked,
                    worst_accepted));
}

// --------------------------------------------------------------- criterion 10
Outcome lyapunov(const Context&) {
    double worst_drop = 0.0;
    for (int s = 1; s <= 20; ++s) {
        const std::size_t n = 10 + static_cast<std::size_t>(s % 8);
        const auto data = testsup::margin_separable(n, 2 + s % 2, 10000 + s);
        const KernelSpec kernel = s % 2 ? KernelSpec::rbf(0.8) : KernelSpec::linear();
        const GramMatrix gram = gram_matrix(kernel, data.points);
        EcoState init;
        init.abundances.assign(n, 1.0 / (2.0 * static_cast<double>(n)));
        std::vector<double> trace;
        integrate_to_steady(init, data.labels, gram, {},
                            [&](long, const EcoState& state) {
                                trace.push_back(dual_objective(state.abundances,
                                                               data.labels, gram));
                            });
        for (std::size_t i = 10; i < trace.size(); i += 10)
            worst_drop = std::max(worst_drop, trace[i - 10] - trace[i]);
    }
    if (worst_drop > 1e-10)
        return fail(fmt("dual objective dropped by %.2e between samples", worst_drop));
    return pass(fmt("20 trajectories, worst sampled drop %.1e", worst_drop));
}

}  // namespace

int main(int argc, char** argv) {
    Context ctx;
    if (const char* env = std::getenv("MNIST_DIR")) ctx.mnist_dir = env;
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--mnist-dir") && i + 1 < argc)
            ctx.mnist_dir = argv[++i];
        else if (!std::strcmp(argv[i], "--full-mnist"))
            ctx.full_mnist = true;
        else if (!std::strcmp(argv[i], "--only") && i + 1 < argc)
            only.insert(std::atoi(argv[++i]));
        else {
            std::fprintf(stderr,
                         "usage: %s [--only N]... [--mnist-dir DIR] [--full-mnist]\n",
                         argv[0]);
            return 64;
        }
    }

    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome(const Context&)> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "oracle equivalence", oracle_equivalence},
        {2, "KKT certification", kkt_certification},
        {3, "toy linear reproduction", toy_linear},
        {4, "toy nonlinear reproduction", toy_nonlinear},
        {5, "SI curve behavior", si_curves},
        {6, "MNIST 4-vs-9", mnist},
        {7, "SVDD convergence", svdd_convergence},
        {8, "FISVDD identity", fisvdd_identity},
        {9, "invasion soundness", invasion_soundness},
        {10, "Lyapunov monotonicity", lyapunov},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        if (!only.empty() && !only.count(criterion.id)) continue;
        Outcome outcome;
        try {
            outcome = criterion.run(ctx);
        } catch (const std::exception& e) {
            outcome = fail(std::string("exception: ") + e.what());
        }
        const char* tag = outcome.status == Outcome::Pass   ? "PASS"
                          : outcome.status == Outcome::Skip ? "SKIP"
                                                            : "FAIL";
        std::printf("[%s] %2d %s: %s\n", tag, criterion.id, criterion.name,
                    outcome.detail.c_str());
        std::fflush(stdout);
        failures += outcome.status == Outcome::Fail;
    }
    return failures;
}
