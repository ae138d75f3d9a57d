#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ecosvm/dynamics.hpp"
#include "ecosvm/kernel.hpp"
#include "ecosvm/svm.hpp"

namespace ecosvm {

/// Support Vector Data Description: the minimum enclosing sphere in feature
/// space. The center mu = sum a_i phi(x_i) is implicit; multipliers lie on
/// the simplex (sum a_i = 1).
struct SvddModel {
    KernelSpec kernel;
    std::vector<std::vector<double>> points;
    std::vector<double> multipliers;
    double radius_sq = 0.0;

    std::size_t size() const { return points.size(); }
};

/// Batch fit of the SVDD dual
///   max L(a) = sum a_i K(x_i,x_i) - sum a_i a_j K(x_i,x_j),  a >= 0, sum a = 1
/// by either the ecological flow
///   da_i/dt = a_i (lambda + K(x_i,x_i)/2 - sum_j K_ij a_j),
///   dlambda/dt = 1 - sum a_i
/// or the pairwise coordinate-ascent oracle. Works for any kernel; for
/// unit-diagonal kernels (RBF) the flow reduces to the classic
/// a_i (lambda - sum K a) form under a constant shift of lambda.
SvddModel fit_batch_svdd(const std::vector<std::vector<double>>& points,
                         const KernelSpec& kernel,
                         Solver solver = Solver::Oracle,
                         const SolverOptions& opts = {});

/// Sphere radius: R = sqrt(max_i [K(x_i,x_i) - 2 sum_j K_ij a_j
///                               + sum_jk K_jk a_j a_k]) over points with
/// a_i > 0.
double radius(const SvddModel& model);

/// Initial growth rate of a new point x0:
///   sum_i a_i [K(x_k, x_i) - K(x0, x_i)] + (K(x0,x0) - K(x_k,x_k)) / 2
/// with x_k the stored point of largest multiplier (any active point gives
/// the same value at a steady state). The trailing term vanishes for
/// unit-diagonal kernels. Positive rate means x0 lies outside the sphere.
double svdd_invasion_rate(const SvddModel& model, std::span<const double> x0);

/// Same, with the reference point x_k chosen explicitly by index.
double svdd_invasion_rate(const SvddModel& model, std::span<const double> x0,
                          std::size_t k);

/// One online step: rejects points inside the sphere, otherwise
/// re-equilibrates over survivors + x0, prunes extinct points and updates the
/// radius. On solver failure the point is rejected and the model unchanged.
std::pair<SvddModel, bool> observe_svdd(const SvddModel& model,
                                        const std::vector<double>& x0,
                                        Solver solver = Solver::Oracle,
                                        const SolverOptions& opts = {});

/// Cosine similarity of two sphere centers in feature space,
///   S = mu_a . mu_b / (|mu_a| |mu_b|),
/// computed through kernels. S <= 1 with equality iff the centers coincide.
/// Throws std::invalid_argument on a zero-norm center.
double center_similarity(const SvddModel& a, const SvddModel& b);

/// Squared feature-space distance from the center minus R^2; positive flags
/// an outlier.
double outlier_score(const SvddModel& model, std::span<const double> x);

double svdd_dual_objective(const std::vector<double>& multipliers,
                           const GramMatrix& gram);

std::string svdd_to_json(const SvddModel& model);
SvddModel svdd_from_json(const std::string& text);
void save_svdd(const SvddModel& model, const std::string& path);
SvddModel load_svdd(const std::string& path);

}  // namespace ecosvm
