#pragma once

// Internal adaptive explicit-Euler driver shared by the SVM and SVDD flows.
// Not installed; include from src/ only.
//
// The flows have the form
//   da_i/dt = pre(a_i) * (mu * r_i(a) + lambda * m_i),   m_i in {+1, -1},
// where r = grad L and the equality constraint c(a) = sum m_i a_i - const
// carries the multiplier lambda. Two choices make the dual objective L a
// usable Lyapunov function all the way to steady state:
//
//  * lambda is slaved each step to the value that keeps c invariant along
//    the moving (non-frozen) coordinates,
//      lambda* = -mu * sum pre_i m_i r_i / sum pre_i,
//    under which dL/dt = (1/mu) sum pre_i growth_i^2 >= 0;
//
//  * the step increment delta is CONSTRUCTED (Euler move, boundary clamps,
//    and a tangent correction cancelling the measured constraint drift) and
//    its exact quadratic gain L(a+delta) - L(a) decides acceptance. Deriving
//    delta by differencing rounded states instead would bury the attainable
//    gain, which shrinks quadratically with the flow residual, under an
//    h-independent rounding-noise floor and deadlock the step control.
//
// Steps halve from the per-step safety bound until they realize a tenth of
// their first-order gain.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ecosvm/errors.hpp"

namespace ecosvm::detail {

// Problem must provide:
//   void gradient(const std::vector<double>& a, std::vector<double>& r) const;
//   double mu() const;                            // flow scaling of grad L
//   double multiplier_sign(std::size_t i) const;  // m_i
//   void project(std::vector<double>& a) const;   // exact rescale onto c = 0
//   double constraint_residual(const std::vector<double>& a) const;  // c(a)
//   double step_gain(const std::vector<double>& r,
//                    const std::vector<double>& delta) const;  // exact dL
//   double upper;         // carrying capacity, +inf when unbounded
//   double cap;           // divergence guard on max abundance
//   double dead_cut;      // boundary band whose coordinates freeze
//   double boundary_cut;  // extinction scale for the KKT sign classification
struct ReplicatorResult {
    std::vector<double> abundances;
    double lambda = 0.0;
    double residual = 0.0;
    long steps = 0;
    bool converged = false;
};

template <class Problem, class Observer>
ReplicatorResult integrate_replicator(const Problem& prob, std::vector<double> a,
                                      double lambda, double tol, long max_steps,
                                      const Observer& observer) {
    const std::size_t n = a.size();
    const double upper = prob.upper;
    const bool bounded = std::isfinite(upper);
    const double mu = prob.mu();

    prob.project(a);
    std::vector<double> r(n), deriv(n), pre(n), trial(n), delta(n);
    std::vector<bool> frozen(n, false);
    int fruitless_steps = 0;

    ReplicatorResult out;
    for (long step = 1; step <= max_steps; ++step) {
        prob.gradient(a, r);

        // Coordinates pressed into a boundary freeze for the step: they sit
        // below the extinction threshold (or its mirror at C), cannot change
        // the answer, and would otherwise throttle the step size of the
        // whole system. A growth sign flip unfreezes them. Freezing is
        // classified with the previous lambda; lambda is then re-slaved over
        // the live coordinates so the live move stays on the manifold.
        double max_abundance = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            max_abundance = std::max(max_abundance, a[i]);
            pre[i] = bounded ? a[i] * (upper - a[i]) : a[i];
            const double growth = mu * r[i] + lambda * prob.multiplier_sign(i);
            const bool dying = a[i] <= prob.dead_cut && growth <= 0.0;
            const bool saturating =
                bounded && upper - a[i] <= prob.dead_cut && growth >= 0.0;
            frozen[i] = dying || saturating;
        }
        double pre_sum = 0.0, weighted = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (frozen[i]) continue;
            pre_sum += pre[i];
            weighted += pre[i] * prob.multiplier_sign(i) * r[i];
        }
        if (pre_sum > 0.0) lambda = -mu * weighted / pre_sum;

        for (std::size_t i = 0; i < n; ++i) {
            if (frozen[i]) {
                deriv[i] = 0.0;
                continue;
            }
            const double growth = mu * r[i] + lambda * prob.multiplier_sign(i);
            deriv[i] = pre[i] * growth;
        }
        // lambda's own rounding (eps * |lambda| * sum pre) leaves a tangent
        // imbalance in the direction that can dwarf the attainable gain near
        // steady state; measuring it on the residual-sized deriv values is
        // benign, so cancel it exactly.
        if (pre_sum > 0.0) {
            double imbalance = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                imbalance += prob.multiplier_sign(i) * deriv[i];
            for (std::size_t i = 0; i < n; ++i) {
                if (frozen[i]) continue;
                deriv[i] -= imbalance * pre[i] * prob.multiplier_sign(i) / pre_sum;
            }
        }

        // Convergence is judged on the KKT sign structure, not just on
        // ||da/dt||: a coordinate lingering at a tiny abundance has a tiny
        // derivative even when its per-capita growth (margin error) is still
        // large, and would pollute the bias average if accepted as steady.
        // Interior coordinates need |growth| ~ 0, boundary coordinates the
        // correct growth sign. The growth part carries a 0.1 weight, so it
        // converges to within 10*tol.
        const double constraint = prob.constraint_residual(a);
        double residual = std::abs(constraint);
        double speed_limit = 0.0;
        double ascent = 0.0;  // dL/dt along the corrected direction
        for (std::size_t i = 0; i < n; ++i) {
            const bool live = !frozen[i] && pre[i] > 0.0;
            if (live) {
                residual = std::max(residual, std::abs(deriv[i]));
                ascent += deriv[i] * deriv[i] / pre[i];
                const double reach = bounded ? std::min(a[i], upper - a[i]) : a[i];
                if (reach > 0.0)
                    speed_limit = std::max(speed_limit, std::abs(deriv[i]) / reach);
            }
            const double growth = live ? deriv[i] / pre[i]
                                       : mu * r[i] + lambda * prob.multiplier_sign(i);
            double kkt_violation;
            if (a[i] <= prob.boundary_cut)
                kkt_violation = std::max(0.0, growth);  // extinct must not invade
            else if (bounded && upper - a[i] <= prob.boundary_cut)
                kkt_violation = std::max(0.0, -growth);  // saturated must press on C
            else
                kkt_violation = std::abs(growth);
            residual = std::max(residual, 0.1 * kkt_violation);
        }
        ascent /= mu;

        if (max_abundance > prob.cap)
            throw DivergenceError("abundance exceeded the multiplier cap (" +
                                      std::to_string(prob.cap) +
                                      "): data not separable in this kernel space; "
                                      "rerun in slack mode",
                                  max_abundance);

        out.residual = residual;
        out.steps = step;
        if (residual < tol) {
            out.converged = true;
            break;
        }
        if (speed_limit == 0.0) break;  // frozen abundances, nothing to integrate

        // Constraint housekeeping bands. Below skip_band the drift sits at
        // the state-quantization level and random-walks harmlessly (it still
        // enters the convergence residual); correcting it would cost an
        // allowance ~|lambda * drift| per step that caps the reachable
        // residual. The mid band cancels the drift along the manifold
        // tangent; past rescale_band (a boundary clamp fired) the manifold
        // is restored by exact rescaling, where gains are large anyway.
        const double skip_band = 1e-13 * std::max(1.0, max_abundance);
        const double rescale_band = 10.0 * skip_band;
        double h = 0.45 / speed_limit;
        bool accepted = false;
        for (int halvings = 0; halvings < 64; ++halvings) {
            // Euler move with boundary clamps, as explicit increments.
            double drift = constraint;
            for (std::size_t i = 0; i < n; ++i) {
                double d = h * deriv[i];
                if (d < -a[i]) d = -a[i];
                if (bounded && d > upper - a[i]) d = upper - a[i];
                delta[i] = d;
                drift += prob.multiplier_sign(i) * d;
            }
            double correction_gain = 0.0;
            if (std::abs(drift) > rescale_band) {
                for (std::size_t i = 0; i < n; ++i) trial[i] = a[i] + delta[i];
                prob.project(trial);
                for (std::size_t i = 0; i < n; ++i) delta[i] = trial[i] - a[i];
            } else if (std::abs(drift) > skip_band && pre_sum > 0.0) {
                // First-order cost of the tangent correction: drift*lambda/mu.
                for (std::size_t i = 0; i < n; ++i) {
                    if (frozen[i]) continue;
                    delta[i] -= drift * pre[i] * prob.multiplier_sign(i) / pre_sum;
                }
                correction_gain = std::abs(drift * lambda / mu);
                for (std::size_t i = 0; i < n; ++i) trial[i] = a[i] + delta[i];
            } else {
                for (std::size_t i = 0; i < n; ++i) trial[i] = a[i] + delta[i];
            }
            const double gain = prob.step_gain(r, delta);
            // Strict sufficient ascent, padded only by the correction's
            // first-order cost. Any absolute slack here lets the tail settle
            // into a zero-net-gain cycle instead of converging.
            if (gain >= 0.1 * h * ascent * (1.0 - 1e-9) - 1.05 * correction_gain) {
                double moved = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    moved = std::max(moved, std::abs(delta[i]));
                    a[i] = std::clamp(trial[i], 0.0, upper);
                }
                accepted = moved > 0.0;
                break;
            }
            h *= 0.5;
        }
        if (accepted) {
            fruitless_steps = 0;
            observer(step, a, lambda);
        } else if (++fruitless_steps > 50) {
            throw ConvergenceError("steady-state search stalled at residual " +
                                       std::to_string(residual),
                                   residual);
        }
    }

    out.abundances = std::move(a);
    out.lambda = lambda;
    return out;
}

}  // namespace ecosvm::detail
