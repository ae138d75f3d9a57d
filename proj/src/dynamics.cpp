#include "ecosvm/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "replicator.hpp"

namespace ecosvm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_labels(const std::vector<int>& labels) {
    for (int t : labels)
        if (t != 1 && t != -1)
            throw std::invalid_argument("labels must be +1 or -1");
}

void check_dims(std::size_t n_abund, const std::vector<int>& labels,
                const GramMatrix& gram) {
    if (labels.size() != gram.n || n_abund != gram.n)
        throw std::invalid_argument("dimension mismatch between abundances (" +
                                    std::to_string(n_abund) + "), labels (" +
                                    std::to_string(labels.size()) + ") and gram (" +
                                    std::to_string(gram.n) + ")");
    check_labels(labels);
}

bool both_classes(const std::vector<int>& labels) {
    bool pos = false, neg = false;
    for (int t : labels) (t > 0 ? pos : neg) = true;
    return pos && neg;
}

// growth_i = 1 + lambda t_i - t_i sum_j t_j K_ij a_j
void svm_growth(const std::vector<double>& a, double lambda,
                const std::vector<int>& labels, const GramMatrix& gram,
                std::vector<double>& g) {
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = gram.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += labels[j] * row[j] * a[j];
        g[i] = 1.0 + labels[i] * (lambda - s);
    }
}

struct SvmReplicatorProblem {
    const std::vector<int>& labels;
    const GramMatrix& gram;
    double upper;
    double cap;
    double dead_cut;
    double boundary_cut;

    // Gradient of the dual: r_i = 1 - t_i sum_j t_j K_ij a_j, which is also
    // the growth rate without the lambda term.
    void gradient(const std::vector<double>& a, std::vector<double>& r) const {
        svm_growth(a, 0.0, labels, gram, r);
    }
    double mu() const { return 1.0; }
    double multiplier_sign(std::size_t i) const {
        return static_cast<double>(labels[i]);
    }
    double constraint_residual(const std::vector<double>& a) const {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * labels[i];
        return s;
    }
    // Projection onto sum a_i t_i = 0: shrink the heavier class.
    void project(std::vector<double>& a) const {
        double pos = 0.0, neg = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            (labels[i] > 0 ? pos : neg) += a[i];
        if (pos <= 0.0 || neg <= 0.0) return;
        const bool shrink_pos = pos > neg;
        const double scale = shrink_pos ? neg / pos : pos / neg;
        for (std::size_t i = 0; i < a.size(); ++i)
            if ((labels[i] > 0) == shrink_pos) a[i] *= scale;
    }
    // Exact L(a + delta) - L(a) = r.delta - 1/2 (t*delta)^T K (t*delta).
    double step_gain(const std::vector<double>& r,
                     const std::vector<double>& delta) const {
        const std::size_t n = delta.size();
        double lin = 0.0, quad = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            lin += r[i] * delta[i];
            if (delta[i] == 0.0) continue;
            const double* row = gram.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                s += labels[j] * delta[j] * row[j];
            quad += labels[i] * delta[i] * s;
        }
        return lin - 0.5 * quad;
    }
};

}  // namespace

std::vector<double> interaction_matrix(const std::vector<int>& labels,
                                       const GramMatrix& gram) {
    check_dims(labels.size(), labels, gram);
    const std::size_t n = gram.n;
    std::vector<double> alpha(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            alpha[i * n + j] = labels[i] * labels[j] * gram.at(i, j);
    return alpha;
}

FlowDerivatives svm_flow(const EcoState& state, const std::vector<int>& labels,
                         const GramMatrix& gram) {
    check_dims(state.abundances.size(), labels, gram);
    const std::size_t n = gram.n;
    FlowDerivatives d;
    d.abundances.resize(n);
    std::vector<double> g(n);
    svm_growth(state.abundances, state.lambda, labels, gram, g);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = state.abundances[i];
        const double pre = state.slack_bound ? a * (*state.slack_bound - a) : a;
        d.abundances[i] = pre * g[i];
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += state.abundances[i] * labels[i];
    d.lambda = -s;
    return d;
}

EcoState integrate_to_steady(EcoState initial, const std::vector<int>& labels,
                             const GramMatrix& gram, const SolverOptions& opts,
                             const StepObserver& observer) {
    check_dims(initial.abundances.size(), labels, gram);
    if (gram.n < 2 || !both_classes(labels))
        throw std::invalid_argument(
            "steady-state integration needs at least two points and both classes");
    const double upper = initial.slack_bound ? *initial.slack_bound : kInf;
    if (initial.slack_bound && !(*initial.slack_bound > 0.0))
        throw std::invalid_argument("slack bound C must be positive");
    for (double a : initial.abundances)
        if (!(a > 0.0) || a >= upper)
            throw std::invalid_argument(
                "initial abundances must be strictly interior (0 < a < C)");

    const double cut = opts.extinction_cut(initial.slack_bound);
    SvmReplicatorProblem prob{labels, gram, upper,
                              initial.slack_bound ? kInf : opts.multiplier_cap,
                              1e-2 * cut, cut};
    auto relay = [&](long step, const std::vector<double>& a, double lambda) {
        if (!observer) return;
        EcoState snapshot;
        snapshot.abundances = a;
        snapshot.lambda = lambda;
        snapshot.slack_bound = initial.slack_bound;
        observer(step, snapshot);
    };
    auto result = detail::integrate_replicator(prob, std::move(initial.abundances),
                                               initial.lambda, opts.tol,
                                               opts.max_steps, relay);
    if (!result.converged)
        throw ConvergenceError("no steady state after " +
                                   std::to_string(opts.max_steps) +
                                   " steps (residual " +
                                   std::to_string(result.residual) + ")",
                               result.residual);

    EcoState steady;
    steady.slack_bound = initial.slack_bound;
    steady.lambda = result.lambda;
    steady.abundances = std::move(result.abundances);
    for (double& a : steady.abundances) {
        a = std::clamp(a, 0.0, upper);
        if (a < cut) a = 0.0;
    }
    return steady;
}

double dual_objective(const std::vector<double>& abundances,
                      const std::vector<int>& labels, const GramMatrix& gram) {
    check_dims(abundances.size(), labels, gram);
    const std::size_t n = gram.n;
    double linear = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        linear += abundances[i];
        const double ui = labels[i] * abundances[i];
        if (ui == 0.0) continue;
        const double* row = gram.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += labels[j] * abundances[j] * row[j];
        quad += ui * s;
    }
    return linear - 0.5 * quad;
}

double kkt_residual(const EcoState& state, const std::vector<int>& labels,
                    const GramMatrix& gram) {
    check_dims(state.abundances.size(), labels, gram);
    const std::size_t n = gram.n;
    const auto& a = state.abundances;
    const double bias = -state.lambda;

    double residual = 0.0;
    double equality = 0.0;
    for (std::size_t i = 0; i < n; ++i) equality += a[i] * labels[i];
    residual = std::abs(equality);

    for (std::size_t i = 0; i < n; ++i) {
        const double* row = gram.row(i);
        double score = 0.0;
        for (std::size_t j = 0; j < n; ++j) score += a[j] * labels[j] * row[j];
        const double margin = labels[i] * (score + bias);

        residual = std::max(residual, -std::min(a[i], 0.0));  // dual feasibility
        if (state.slack_bound) {
            const double c = *state.slack_bound;
            residual = std::max(residual, a[i] - c);          // box upper side
            const double zeta = std::max(0.0, 1.0 - margin);
            residual = std::max(residual, std::abs(a[i] * std::max(0.0, margin - 1.0)));
            residual = std::max(residual, std::abs((c - a[i]) * zeta));
        } else {
            residual = std::max(residual, std::max(0.0, 1.0 - margin));
            residual = std::max(residual, std::abs(a[i] * (margin - 1.0)));
        }
    }
    return residual;
}

std::vector<double> qp_solve(const std::vector<int>& labels,
                             const GramMatrix& gram,
                             std::optional<double> slack_bound, double tol,
                             std::vector<double> warm_start,
                             double multiplier_cap) {
    const std::size_t n = gram.n;
    check_dims(warm_start.empty() ? n : warm_start.size(), labels, gram);
    if (n < 2) throw std::invalid_argument("qp_solve needs at least two points");
    if (!both_classes(labels))
        throw std::invalid_argument(
            "qp_solve needs both classes: with a single class the equality "
            "constraint forces all multipliers to zero");
    const double c = slack_bound ? *slack_bound : kInf;
    if (slack_bound && !(c > 0.0))
        throw std::invalid_argument("slack bound C must be positive");

    std::vector<double> a(n, 0.0);
    if (!warm_start.empty()) {
        double drift = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (warm_start[i] < -1e-12 || warm_start[i] > c * (1.0 + 1e-12))
                throw std::invalid_argument("warm start violates the box constraints");
            a[i] = std::clamp(warm_start[i], 0.0, c);
            drift += a[i] * labels[i];
        }
        if (std::abs(drift) > 1e-6 * std::max(1.0, c))
            throw std::invalid_argument("warm start violates sum(a_i t_i) = 0");
    }

    // Gradient of f(a) = 1/2 a^T Q a - sum a, with Q_ij = t_i t_j K_ij.
    std::vector<double> grad(n);
    auto refresh_gradient = [&] {
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = gram.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (a[j] != 0.0) s += labels[j] * row[j] * a[j];
            grad[i] = labels[i] * s - 1.0;
        }
    };
    refresh_gradient();

    const long max_iter = std::max<long>(200000, 400 * static_cast<long>(n));
    const double snap = 1e-12 * std::max(1.0, slack_bound ? c : 1.0);
    double gap = kInf;
    for (long iter = 1; iter <= max_iter; ++iter) {
        if (iter % 4096 == 0) refresh_gradient();  // kill incremental drift

        // Working pair on v_k = -t_k grad_k: the most violating index from
        // above, then the second-order partner that maximizes the one-step
        // objective gain (v_i - v_j)^2 / eta_ij.
        double up_best = -kInf, low_best = kInf;
        std::size_t up_idx = n;
        for (std::size_t k = 0; k < n; ++k) {
            const double v = -labels[k] * grad[k];
            const bool can_up = labels[k] > 0 ? a[k] < c : a[k] > 0.0;
            const bool can_down = labels[k] > 0 ? a[k] > 0.0 : a[k] < c;
            if (can_up && v > up_best) { up_best = v; up_idx = k; }
            if (can_down && v < low_best) low_best = v;
        }
        if (up_idx == n || low_best == kInf) { gap = 0.0; break; }
        gap = up_best - low_best;
        if (gap <= tol) break;

        const std::size_t i = up_idx;
        const double* row_i = gram.row(i);
        std::size_t j = n;
        double best_gain = -kInf;
        for (std::size_t k = 0; k < n; ++k) {
            const bool can_down = labels[k] > 0 ? a[k] > 0.0 : a[k] < c;
            if (!can_down) continue;
            const double v = -labels[k] * grad[k];
            const double diff = up_best - v;
            if (diff <= 0.0) continue;
            double eta_k = gram.at(i, i) + gram.at(k, k) - 2.0 * row_i[k];
            if (eta_k < 1e-14) eta_k = 1e-14;
            const double gain = diff * diff / eta_k;
            if (gain > best_gain) { best_gain = gain; j = k; }
        }
        if (j == n) { gap = 0.0; break; }

        double eta = gram.at(i, i) + gram.at(j, j) - 2.0 * row_i[j];
        if (eta < 1e-14) eta = 1e-14;
        double delta = (up_best - (-labels[j] * grad[j])) / eta;
        // a_i moves by t_i*delta, a_j by -t_j*delta; clip to the box.
        double room_i = labels[i] > 0 ? c - a[i] : a[i];
        double room_j = labels[j] > 0 ? a[j] : c - a[j];
        delta = std::min({delta, room_i, room_j});

        a[i] += labels[i] > 0 ? delta : -delta;
        a[j] -= labels[j] > 0 ? delta : -delta;
        for (std::size_t k : {i, j}) {
            if (std::abs(a[k]) < snap) a[k] = 0.0;
            if (slack_bound && std::abs(a[k] - c) < snap) a[k] = c;
        }
        const double step = delta;
        for (std::size_t k = 0; k < n; ++k)
            grad[k] += labels[k] * step * (gram.at(k, i) - gram.at(k, j));

        if (!slack_bound && (a[i] > multiplier_cap || a[j] > multiplier_cap))
            throw DivergenceError(
                "multiplier exceeded the cap (" + std::to_string(multiplier_cap) +
                    "): data not separable in this kernel space; rerun in slack mode",
                std::max(a[i], a[j]));
    }
    if (gap > tol)
        throw ConvergenceError("pairwise coordinate ascent did not reach tolerance (gap " +
                                   std::to_string(gap) + ")",
                               gap);
    return a;
}

}  // namespace ecosvm
