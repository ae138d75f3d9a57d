#include "ecosvm/svdd.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ecosvm/errors.hpp"
#include "ecosvm/log.hpp"
#include "replicator.hpp"

namespace ecosvm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvasionTol = 1e-10;

// Maximizes L(a) = sum a_i K_ii - a^T K a on the simplex {a >= 0, sum a = 1}
// by pairwise transfers: moving mass between two coordinates keeps the
// simplex constraint exact.
std::vector<double> solve_svdd_qp(const GramMatrix& gram, double tol,
                                  std::vector<double> warm_start = {}) {
    const std::size_t n = gram.n;
    std::vector<double> a;
    if (!warm_start.empty()) {
        if (warm_start.size() != n)
            throw std::invalid_argument("svdd warm start has wrong length");
        double total = 0.0;
        for (double v : warm_start) {
            if (v < -1e-12) throw std::invalid_argument("svdd warm start is negative");
            total += std::max(v, 0.0);
        }
        if (std::abs(total - 1.0) > 1e-6)
            throw std::invalid_argument("svdd warm start is off the simplex");
        a = std::move(warm_start);
        for (double& v : a) v = std::max(v, 0.0) / total;
    } else {
        a.assign(n, 1.0 / static_cast<double>(n));
    }

    // Gradient of f(a) = a^T K a - sum a_i K_ii.
    std::vector<double> grad(n);
    auto refresh_gradient = [&] {
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = gram.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (a[j] != 0.0) s += row[j] * a[j];
            grad[i] = 2.0 * s - gram.at(i, i);
        }
    };
    refresh_gradient();

    const long max_iter = std::max<long>(200000, 200 * static_cast<long>(n));
    double gap = kInf;
    for (long iter = 1; iter <= max_iter; ++iter) {
        if (iter % 4096 == 0) refresh_gradient();
        std::size_t lo = 0;
        std::size_t hi = n;
        for (std::size_t k = 1; k < n; ++k)
            if (grad[k] < grad[lo]) lo = k;
        for (std::size_t k = 0; k < n; ++k)
            if (a[k] > 0.0 && (hi == n || grad[k] > grad[hi])) hi = k;
        gap = grad[hi] - grad[lo];
        if (gap <= tol) break;

        double eta = gram.at(lo, lo) + gram.at(hi, hi) - 2.0 * gram.at(lo, hi);
        if (eta < 1e-14) eta = 1e-14;
        const double delta = std::min(gap / (2.0 * eta), a[hi]);
        a[lo] += delta;
        a[hi] -= delta;
        if (a[hi] < 1e-15) a[hi] = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            grad[k] += 2.0 * delta * (gram.at(k, lo) - gram.at(k, hi));
    }
    if (gap > tol)
        throw ConvergenceError(
            "svdd coordinate ascent did not reach tolerance (gap " +
                std::to_string(gap) + ")",
            gap);
    double total = 0.0;
    for (double v : a) total += v;
    for (double& v : a) v /= total;
    return a;
}

struct SvddReplicatorProblem {
    const GramMatrix& gram;
    double upper = kInf;
    double cap = 1e6;
    double dead_cut = 1e-10;
    double boundary_cut = 1e-8;

    // Gradient of the dual: r_i = K_ii - 2 (K a)_i. The flow growth is
    // lambda + K_ii/2 - (K a)_i = r_i/2 + lambda; for unit-diagonal kernels
    // this is the classic a_i (lambda - sum K a) form with lambda shifted by
    // a constant.
    void gradient(const std::vector<double>& a, std::vector<double>& r) const {
        const std::size_t n = a.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = gram.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += row[j] * a[j];
            r[i] = gram.at(i, i) - 2.0 * s;
        }
    }
    double mu() const { return 0.5; }
    double multiplier_sign(std::size_t) const { return 1.0; }
    double constraint_residual(const std::vector<double>& a) const {
        double s = 0.0;
        for (double v : a) s += v;
        return 1.0 - s;
    }
    void project(std::vector<double>& a) const {
        double s = 0.0;
        for (double v : a) s += v;
        if (s <= 0.0) return;
        for (double& v : a) v /= s;
    }
    // Exact L(a + delta) - L(a) = r.delta - delta^T K delta.
    double step_gain(const std::vector<double>& r,
                     const std::vector<double>& delta) const {
        const std::size_t n = delta.size();
        double lin = 0.0, quad = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            lin += r[i] * delta[i];
            if (delta[i] == 0.0) continue;
            const double* row = gram.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += delta[j] * row[j];
            quad += delta[i] * s;
        }
        return lin - quad;
    }
};

double quad_form(const std::vector<double>& a, const GramMatrix& gram) {
    double q = 0.0;
    for (std::size_t i = 0; i < gram.n; ++i) {
        if (a[i] == 0.0) continue;
        const double* row = gram.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < gram.n; ++j) s += row[j] * a[j];
        q += a[i] * s;
    }
    return q;
}

double radius_sq_from_gram(const std::vector<double>& a, const GramMatrix& gram) {
    const double quad = quad_form(a, gram);
    double best = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < gram.n; ++i) {
        if (a[i] <= 0.0) continue;
        const double* row = gram.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < gram.n; ++j) s += row[j] * a[j];
        const double expr = gram.at(i, i) - 2.0 * s + quad;
        if (!any || expr > best) best = expr;
        any = true;
    }
    return std::max(best, 0.0);
}

SvddModel assemble_model(const KernelSpec& kernel,
                         std::vector<std::vector<double>> points,
                         std::vector<double> multipliers,
                         const SolverOptions& opts) {
    const double cut = opts.extinction_cut(std::nullopt);
    SvddModel model;
    model.kernel = kernel;
    double total = 0.0;
    for (std::size_t i = 0; i < multipliers.size(); ++i) {
        if (multipliers[i] <= cut) continue;
        model.points.push_back(std::move(points[i]));
        model.multipliers.push_back(multipliers[i]);
        total += multipliers[i];
    }
    for (double& v : model.multipliers) v /= total;
    const GramMatrix gram = gram_matrix(kernel, model.points);
    model.radius_sq = radius_sq_from_gram(model.multipliers, gram);
    return model;
}

}  // namespace

double svdd_dual_objective(const std::vector<double>& multipliers,
                           const GramMatrix& gram) {
    if (multipliers.size() != gram.n)
        throw std::invalid_argument("svdd_dual_objective: dimension mismatch");
    double linear = 0.0;
    for (std::size_t i = 0; i < gram.n; ++i)
        linear += multipliers[i] * gram.at(i, i);
    return linear - quad_form(multipliers, gram);
}

SvddModel fit_batch_svdd(const std::vector<std::vector<double>>& points,
                         const KernelSpec& kernel, Solver solver,
                         const SolverOptions& opts) {
    if (points.empty()) throw std::invalid_argument("svdd fit on empty input");
    if (points.size() > opts.batch_cap)
        throw std::invalid_argument("batch fit exceeds the cap of " +
                                    std::to_string(opts.batch_cap));
    if (points.size() == 1) {
        SvddModel model;
        model.kernel = kernel;
        model.points = points;
        model.multipliers = {1.0};
        model.radius_sq = 0.0;
        return model;
    }
    const GramMatrix gram = gram_matrix(kernel, points);
    std::vector<double> a;
    if (solver == Solver::Dynamics) {
        const std::size_t n = points.size();
        a.assign(n, 1.0 / static_cast<double>(n));
        SvddReplicatorProblem prob{gram};
        auto result = detail::integrate_replicator(
            prob, std::move(a), 0.0, opts.tol, opts.max_steps,
            [](long, const std::vector<double>&, double) {});
        if (!result.converged)
            throw ConvergenceError("svdd flow found no steady state (residual " +
                                       std::to_string(result.residual) + ")",
                                   result.residual);
        a = std::move(result.abundances);
    } else {
        a = solve_svdd_qp(gram, std::min(opts.tol, 1e-12));
    }
    return assemble_model(kernel, points, std::move(a), opts);
}

double radius(const SvddModel& model) {
    if (model.points.empty()) throw std::invalid_argument("radius of an empty model");
    const GramMatrix gram = gram_matrix(model.kernel, model.points);
    return std::sqrt(radius_sq_from_gram(model.multipliers, gram));
}

double svdd_invasion_rate(const SvddModel& model, std::span<const double> x0,
                          std::size_t k) {
    if (k >= model.size())
        throw std::invalid_argument("svdd_invasion_rate: reference index out of range");
    double rate = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i)
        rate += model.multipliers[i] *
                (kernel_eval(model.kernel, model.points[k], model.points[i]) -
                 kernel_eval(model.kernel, x0, model.points[i]));
    // Diagonal correction for kernels with K(x,x) != 1; zero for RBF.
    rate += 0.5 * (kernel_eval(model.kernel, x0, x0) -
                   kernel_eval(model.kernel, model.points[k], model.points[k]));
    return rate;
}

double svdd_invasion_rate(const SvddModel& model, std::span<const double> x0) {
    if (model.points.empty())
        throw std::invalid_argument("svdd_invasion_rate on an empty model");
    std::size_t k = 0;
    for (std::size_t i = 1; i < model.size(); ++i)
        if (model.multipliers[i] > model.multipliers[k]) k = i;
    return svdd_invasion_rate(model, x0, k);
}

std::pair<SvddModel, bool> observe_svdd(const SvddModel& model,
                                        const std::vector<double>& x0,
                                        Solver solver, const SolverOptions& opts) {
    if (model.points.empty())
        throw std::invalid_argument("observe_svdd on an unfitted model");
    const double rate = svdd_invasion_rate(model, x0);
    if (rate <= kInvasionTol) return {model, false};

    std::vector<std::vector<double>> points = model.points;
    points.push_back(x0);
    try {
        if (solver == Solver::Dynamics) {
            SvddModel refit = fit_batch_svdd(points, model.kernel, solver, opts);
            return {std::move(refit), true};
        }
        const GramMatrix gram = gram_matrix(model.kernel, points);
        std::vector<double> warm = model.multipliers;
        warm.push_back(0.0);
        std::vector<double> a =
            solve_svdd_qp(gram, std::min(opts.tol, 1e-12), std::move(warm));
        return {assemble_model(model.kernel, std::move(points), std::move(a), opts),
                true};
    } catch (const ConvergenceError& e) {
        log::info("svdd online: re-solve failed (%s); point rejected", e.what());
        return {model, false};
    }
}

double center_similarity(const SvddModel& a, const SvddModel& b) {
    if (a.points.empty() || b.points.empty())
        throw std::invalid_argument("center_similarity on an empty model");
    if (a.kernel.family != b.kernel.family || a.kernel.sigma != b.kernel.sigma ||
        a.kernel.degree != b.kernel.degree || a.kernel.offset != b.kernel.offset)
        throw std::invalid_argument("center_similarity needs matching kernels");

    double cross = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            cross += a.multipliers[i] * b.multipliers[j] *
                     kernel_eval(a.kernel, a.points[i], b.points[j]);
    const double na = quad_form(a.multipliers, gram_matrix(a.kernel, a.points));
    const double nb = quad_form(b.multipliers, gram_matrix(b.kernel, b.points));
    if (!(na > 0.0) || !(nb > 0.0))
        throw std::invalid_argument("center_similarity: zero-norm sphere center");
    return cross / (std::sqrt(na) * std::sqrt(nb));
}

double outlier_score(const SvddModel& model, std::span<const double> x) {
    if (model.points.empty())
        throw std::invalid_argument("outlier_score on an unfitted model");
    const GramMatrix gram = gram_matrix(model.kernel, model.points);
    double s = 0.0;
    for (std::size_t j = 0; j < model.size(); ++j)
        s += model.multipliers[j] * kernel_eval(model.kernel, x, model.points[j]);
    return kernel_eval(model.kernel, x, x) - 2.0 * s +
           quad_form(model.multipliers, gram) - model.radius_sq;
}

std::string svdd_to_json(const SvddModel& model) {
    nlohmann::json j;
    j["type"] = "svdd";
    j["kernel"] = nlohmann::json::parse(model.kernel.to_json());
    j["points"] = model.points;
    j["multipliers"] = model.multipliers;
    j["radius_sq"] = model.radius_sq;
    return j.dump(2);
}

SvddModel svdd_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad model JSON: ") + e.what());
    }
    if (j.value("type", "") != "svdd")
        throw DataError("model JSON is not an SVDD model");
    SvddModel model;
    try {
        model.kernel = KernelSpec::from_json(j.at("kernel").dump());
        model.points = j.at("points").get<std::vector<std::vector<double>>>();
        model.multipliers = j.at("multipliers").get<std::vector<double>>();
        model.radius_sq = j.at("radius_sq").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad model JSON: ") + e.what());
    }
    if (model.points.size() != model.multipliers.size())
        throw DataError("model JSON has inconsistent lengths");
    return model;
}

void save_svdd(const SvddModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << svdd_to_json(model) << "\n";
    if (!out) throw IoError("failed writing " + path);
}

SvddModel load_svdd(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return svdd_from_json(buf.str());
}

}  // namespace ecosvm
