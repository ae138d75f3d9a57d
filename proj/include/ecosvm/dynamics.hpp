#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "ecosvm/errors.hpp"
#include "ecosvm/kernel.hpp"

namespace ecosvm {

/// Species abundances (the KKT multipliers of the dual problem) plus the
/// environmental factor lambda that enforces sum(a_i t_i) = 0.
struct EcoState {
    std::vector<double> abundances;
    double lambda = 0.0;
    /// Carrying capacity C. Absent means separable mode (no upper bound).
    std::optional<double> slack_bound;
};

struct SolverOptions {
    double tol = 1e-8;
    long max_steps = 200000;
    /// Any abundance above this cap in separable mode is treated as
    /// divergence, i.e. data that is not separable in the kernel space.
    double multiplier_cap = 1e6;
    /// Abundances below extinction_threshold * max(1, C) at steady state are
    /// rounded to exactly zero and the species is pruned.
    double extinction_threshold = 1e-8;
    /// Largest N accepted by the batch fitters (dense Gram memory guard).
    std::size_t batch_cap = 5000;

    double extinction_cut(std::optional<double> slack_bound) const {
        const double scale = slack_bound ? std::max(1.0, *slack_bound) : 1.0;
        return extinction_threshold * scale;
    }
};

struct FlowDerivatives {
    std::vector<double> abundances;
    double lambda = 0.0;
};

/// Interaction matrix alpha_ij = t_i t_j K(x_i, x_j): same-class pairs
/// compete, opposite-class pairs are mutualistic. Row-major n*n.
std::vector<double> interaction_matrix(const std::vector<int>& labels,
                                       const GramMatrix& gram);

/// Right-hand side of the generalized Lotka-Volterra flow whose steady states
/// solve the dual SVM problem:
///   da_i/dt = a_i [1 + lambda t_i - sum_j t_i t_j K_ij a_j]   (separable)
///   da_i/dt = a_i (C - a_i) [ ... same growth ... ]           (slack)
///   dlambda/dt = -sum_i a_i t_i
FlowDerivatives svm_flow(const EcoState& state, const std::vector<int>& labels,
                         const GramMatrix& gram);

/// Called after every accepted integrator step.
using StepObserver = std::function<void(long step, const EcoState& state)>;

/// Forward-integrates svm_flow until ||da/dt||_inf and |sum a_i t_i| drop
/// below tol. Explicit Euler with adaptive step halving: a step is accepted
/// only if the dual objective does not decrease (beyond 1e-12), so the
/// objective is a Lyapunov function of the accepted trajectory. Throws
/// ConvergenceError after max_steps, DivergenceError past the multiplier cap.
EcoState integrate_to_steady(EcoState initial, const std::vector<int>& labels,
                             const GramMatrix& gram,
                             const SolverOptions& opts = {},
                             const StepObserver& observer = nullptr);

/// Independent maximizer of the dual Lagrangian
///   L(a) = sum a_i - 1/2 sum a_i a_j t_i t_j K_ij
/// subject to 0 <= a_i (<= C) and sum a_i t_i = 0, by pairwise coordinate
/// ascent: each update optimizes one feasible pair analytically and clips to
/// the box, so the equality constraint holds exactly at every step.
/// `warm_start` must be feasible when given.
std::vector<double> qp_solve(const std::vector<int>& labels,
                             const GramMatrix& gram,
                             std::optional<double> slack_bound,
                             double tol = 1e-10,
                             std::vector<double> warm_start = {},
                             double multiplier_cap = 1e6);

double dual_objective(const std::vector<double>& abundances,
                      const std::vector<int>& labels, const GramMatrix& gram);

/// Max violation over the KKT system: primal feasibility (margins), dual
/// feasibility (box), complementary slackness, and the equality constraint
/// |sum a_i t_i|. Zero (up to tolerance) iff the state is optimal. The bias is
/// read off the state as b = -lambda.
double kkt_residual(const EcoState& state, const std::vector<int>& labels,
                    const GramMatrix& gram);

}  // namespace ecosvm
