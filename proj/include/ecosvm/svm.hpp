#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ecosvm/dynamics.hpp"
#include "ecosvm/kernel.hpp"

namespace ecosvm {

enum class Solver { Dynamics, Oracle };

/// A trained SVM. Only the surviving support vectors are stored; the weight
/// vector is never materialized.
struct SvmModel {
    KernelSpec kernel;
    std::vector<std::vector<double>> support_points;
    std::vector<int> support_labels;
    std::vector<double> multipliers;
    double bias = 0.0;
    std::optional<double> slack_bound;
    /// True when every multiplier was saturated and the bias came from the
    /// midpoint fallback instead of averaging over active support vectors.
    bool bias_fallback = false;

    std::size_t size() const { return support_points.size(); }
};

/// Indices of the active support vectors: every stored point in separable
/// mode, multipliers strictly inside (0, C) in slack mode (tolerance 1e-6*C).
std::vector<std::size_t> active_set(const std::vector<double>& multipliers,
                                    std::optional<double> slack_bound);

/// Batch fit. Builds the Gram matrix, finds the dual optimum with the chosen
/// solver, prunes extinct points and computes the bias. Throws
/// std::invalid_argument on degenerate input (N < 2 or a single class) and
/// DivergenceError when separable mode is requested on non-separable data.
SvmModel fit_batch(const std::vector<std::vector<double>>& points,
                   const std::vector<int>& labels, const KernelSpec& kernel,
                   std::optional<double> slack_bound = std::nullopt,
                   Solver solver = Solver::Oracle,
                   const SolverOptions& opts = {});

/// y(x) = sum_i t_i a_i K(x, x_i) + b. Throws on an empty model.
double decision(const SvmModel& model, std::span<const double> x);

/// sign(y(x)) with y(x) = 0 mapped to +1.
int classify(const SvmModel& model, std::span<const double> x);

/// b = (1/|M|) sum_{i in M} [t_i - sum_{j in S} a_j t_j K(x_i, x_j)] where M
/// is the active set. Throws EmptyActiveSetError when M is empty.
double compute_bias(const std::vector<std::vector<double>>& points,
                    const std::vector<int>& labels,
                    const std::vector<double>& multipliers,
                    const KernelSpec& kernel,
                    std::optional<double> slack_bound);

/// Margin shortfalls zeta_i = max(0, 1 - t_i y(x_i)); zero for points at or
/// outside the margin.
std::vector<double> slack_values(const SvmModel& model,
                                 const std::vector<std::vector<double>>& points,
                                 const std::vector<int>& labels);

/// Fraction of correct sign predictions on a labeled set.
double accuracy(const SvmModel& model,
                const std::vector<std::vector<double>>& points,
                const std::vector<int>& labels);

std::string svm_to_json(const SvmModel& model);
SvmModel svm_from_json(const std::string& text);
void save_svm(const SvmModel& model, const std::string& path);
SvmModel load_svm(const std::string& path);

}  // namespace ecosvm
