#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ecosvm/dynamics.hpp"
#include "ecosvm/svm.hpp"

namespace ecosvm {

struct OnlineSvmConfig {
    std::size_t init_size = 10;  // N_s
    std::optional<double> slack_bound;
    SolverOptions solver;
    /// A candidate invades only if its growth rate exceeds this, so on-margin
    /// duplicates (rate exactly 0) do not churn the support set.
    double invasion_tol = 1e-10;
    /// Re-equilibrate with the Lotka-Volterra integrator instead of the QP
    /// oracle after each accepted invasion.
    bool use_integrator = false;
};

/// Online SVM learning by ecological invasion. Only the survivors (support
/// vectors) are kept; each arriving point is tested by its initial growth
/// rate and either discarded for good or added, after which the ecosystem is
/// re-equilibrated and extinct species are pruned.
///
/// Strictly sequential: observe() mutates. Run distinct streams on distinct
/// instances.
class OnlineSvm {
  public:
    /// Fits the batch solution on the first config.init_size points and then
    /// feeds any remaining points through observe(). Throws when fewer than
    /// init_size points are supplied, init_size < 2, or the seed window holds
    /// a single class.
    OnlineSvm(const std::vector<std::vector<double>>& points,
              const std::vector<int>& labels, const KernelSpec& kernel,
              const OnlineSvmConfig& config);

    /// Initial per-capita growth rate of a new point introduced at
    /// infinitesimal abundance:
    ///   separable: 1 + lambda t0 - sum_j t0 t_j K(x0, x_j) a_j
    ///   slack:     1 - t_k t0 + sum_i t_i t0 (K(x_i, x_k) - K(x_i, x0)) a_i
    /// with x_k the active support vector whose multiplier is closest to C/2.
    /// Positive rate means the point would invade. Throws EmptyActiveSetError
    /// in slack mode when no multiplier is strictly inside (0, C).
    double invasion_rate(std::span<const double> x0, int t0) const;

    /// Presents one training point. Returns true when it invaded (and the
    /// steady state was recomputed), false when it went extinct on arrival.
    bool observe(const std::vector<double>& x0, int t0);

    const SvmModel& model() const { return model_; }
    const EcoState& eco() const { return eco_; }
    const OnlineSvmConfig& config() const { return config_; }

    std::size_t seen_count() const { return seen_count_; }
    std::size_t accepted_count() const { return accepted_count_; }
    std::size_t survivor_count() const { return model_.size(); }

    /// Number of active support vectors: all survivors in separable mode,
    /// multipliers strictly inside (0, C) in slack mode.
    std::size_t active_count() const;

  private:
    void equilibrate();

    SvmModel model_;
    EcoState eco_;
    GramMatrix gram_;  // survivors only, grown/shrunk incrementally
    OnlineSvmConfig config_;
    std::size_t seen_count_ = 0;
    std::size_t accepted_count_ = 0;
};

/// A(T) = 1 - (1/|test|) sum 1/2 |t_model(x) - t_true(x)|, i.e. test accuracy.
/// Throws std::invalid_argument on an empty test set.
double online_accuracy(const SvmModel& model,
                       const std::vector<std::vector<double>>& test_points,
                       const std::vector<int>& test_labels);

/// Evaluates A(T) for a sequence of recorded snapshots.
std::vector<std::pair<std::size_t, double>> accuracy_curve(
    const std::vector<std::pair<std::size_t, SvmModel>>& snapshots,
    const std::vector<std::vector<double>>& test_points,
    const std::vector<int>& test_labels);

}  // namespace ecosvm
