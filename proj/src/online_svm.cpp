#include "ecosvm/online_svm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ecosvm/errors.hpp"
#include "ecosvm/log.hpp"

namespace ecosvm {

namespace detail {
double bias_from_gram(const std::vector<int>& labels,
                      const std::vector<double>& multipliers,
                      const GramMatrix& gram, std::optional<double> slack_bound);
double bias_midpoint_fallback(const std::vector<double>& scores,
                              const std::vector<int>& labels);
}  // namespace detail

OnlineSvm::OnlineSvm(const std::vector<std::vector<double>>& points,
                     const std::vector<int>& labels, const KernelSpec& kernel,
                     const OnlineSvmConfig& config)
    : config_(config) {
    if (config.init_size < 2)
        throw std::invalid_argument("online init needs N_s >= 2");
    if (points.size() < config.init_size)
        throw std::invalid_argument("online init needs at least N_s = " +
                                    std::to_string(config.init_size) + " points");
    if (points.size() != labels.size())
        throw std::invalid_argument("points and labels differ in length");

    std::vector<std::vector<double>> seed(points.begin(),
                                          points.begin() + config.init_size);
    std::vector<int> seed_labels(labels.begin(), labels.begin() + config.init_size);
    // fit_batch rejects a single-class seed window.
    SolverOptions opts = config.solver;
    opts.batch_cap = std::max(opts.batch_cap, seed.size());
    model_ = fit_batch(seed, seed_labels, kernel, config.slack_bound,
                       config.use_integrator ? Solver::Dynamics : Solver::Oracle,
                       opts);
    gram_ = gram_matrix(kernel, model_.support_points);
    eco_.abundances = model_.multipliers;
    eco_.slack_bound = config.slack_bound;
    eco_.lambda = -model_.bias;
    seen_count_ = config.init_size;

    for (std::size_t i = config.init_size; i < points.size(); ++i)
        observe(points[i], labels[i]);
}

double OnlineSvm::invasion_rate(std::span<const double> x0, int t0) const {
    if (t0 != 1 && t0 != -1) throw std::invalid_argument("label must be +1 or -1");
    const auto& pts = model_.support_points;
    const auto& t = model_.support_labels;
    const auto& a = model_.multipliers;

    if (!config_.slack_bound) {
        double rate = 1.0 + eco_.lambda * t0;
        for (std::size_t j = 0; j < pts.size(); ++j)
            rate -= t0 * t[j] * kernel_eval(model_.kernel, x0, pts[j]) * a[j];
        return rate;
    }

    // Slack mode: eliminate lambda through an active support vector x_k; the
    // multiplier closest to C/2 is the farthest from saturation.
    const auto active = active_set(a, config_.slack_bound);
    if (active.empty())
        throw EmptyActiveSetError("invasion rate needs an active support vector");
    const double half = *config_.slack_bound / 2.0;
    std::size_t k = active.front();
    for (std::size_t idx : active)
        if (std::abs(a[idx] - half) < std::abs(a[k] - half)) k = idx;

    double rate = 1.0 - static_cast<double>(t[k] * t0);
    for (std::size_t i = 0; i < pts.size(); ++i)
        rate += t[i] * t0 *
                (gram_.at(i, k) - kernel_eval(model_.kernel, x0, pts[i])) * a[i];
    return rate;
}

void OnlineSvm::equilibrate() {
    try {
        model_.bias = detail::bias_from_gram(model_.support_labels,
                                             model_.multipliers, gram_,
                                             config_.slack_bound);
        model_.bias_fallback = false;
    } catch (const EmptyActiveSetError&) {
        std::vector<double> scores(model_.size(), 0.0);
        for (std::size_t i = 0; i < model_.size(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < model_.size(); ++j)
                s += model_.multipliers[j] * model_.support_labels[j] * gram_.at(i, j);
            scores[i] = s;
        }
        model_.bias = detail::bias_midpoint_fallback(scores, model_.support_labels);
        model_.bias_fallback = true;
        log::info("online: all multipliers saturated; midpoint bias b=%g", model_.bias);
    }
    if (!config_.use_integrator) eco_.lambda = -model_.bias;
    eco_.abundances = model_.multipliers;
}

bool OnlineSvm::observe(const std::vector<double>& x0, int t0) {
    ++seen_count_;
    bool forced = false;
    double rate = 0.0;
    try {
        rate = invasion_rate(x0, t0);
    } catch (const EmptyActiveSetError&) {
        // No active support vector to eliminate lambda with; accept the point
        // and let the re-solve decide.
        forced = true;
        log::info("online: no active support vector at T=%zu; forcing re-solve",
                  seen_count_);
    }
    if (!forced && rate <= config_.invasion_tol) return false;

    // Stage the invader on copies so a solver failure leaves the state intact.
    std::vector<double> border(model_.size() + 1);
    for (std::size_t j = 0; j < model_.size(); ++j)
        border[j] = kernel_eval(model_.kernel, x0, model_.support_points[j]);
    border[model_.size()] = kernel_eval(model_.kernel, x0, x0);

    GramMatrix gram = gram_;
    gram.append(border);
    std::vector<int> labels = model_.support_labels;
    labels.push_back(t0);

    std::vector<double> multipliers;
    double integrator_lambda = 0.0;
    try {
        if (config_.use_integrator) {
            EcoState init;
            init.slack_bound = config_.slack_bound;
            init.lambda = eco_.lambda;
            init.abundances = model_.multipliers;
            const double c = config_.slack_bound.value_or(1.0);
            const double invader0 =
                std::min(1.0, c) / (2.0 * static_cast<double>(model_.size() + 1));
            init.abundances.push_back(invader0);
            // The integrator needs a strictly interior start.
            const double nudge = std::min(1.0, c) * 1e-12;
            for (double& a : init.abundances) {
                a = std::max(a, nudge);
                if (config_.slack_bound) a = std::min(a, *config_.slack_bound - nudge);
            }
            EcoState steady =
                integrate_to_steady(std::move(init), labels, gram, config_.solver);
            multipliers = std::move(steady.abundances);
            integrator_lambda = steady.lambda;
        } else {
            std::vector<double> warm = model_.multipliers;
            warm.push_back(0.0);
            const double qp_tol = std::clamp(config_.solver.tol * 1e-2, 1e-12, 1e-4);
            multipliers = qp_solve(labels, gram, config_.slack_bound, qp_tol,
                                   std::move(warm), config_.solver.multiplier_cap);
        }
    } catch (const ConvergenceError& e) {
        log::info("online: re-solve failed at T=%zu (%s); point rejected",
                  seen_count_, e.what());
        return false;
    }

    std::vector<std::vector<double>> points = model_.support_points;
    points.push_back(x0);

    const double cut = config_.solver.extinction_cut(config_.slack_bound);
    std::vector<std::size_t> extinct;
    for (std::size_t i = 0; i < multipliers.size(); ++i)
        if (multipliers[i] <= cut) extinct.push_back(i);

    model_.support_points.clear();
    model_.support_labels.clear();
    model_.multipliers.clear();
    for (std::size_t i = 0; i < multipliers.size(); ++i) {
        if (multipliers[i] <= cut) continue;
        model_.support_points.push_back(std::move(points[i]));
        model_.support_labels.push_back(labels[i]);
        model_.multipliers.push_back(multipliers[i]);
    }
    gram.remove(extinct);
    gram_ = std::move(gram);
    if (config_.use_integrator) eco_.lambda = integrator_lambda;
    equilibrate();
    ++accepted_count_;
    return true;
}

std::size_t OnlineSvm::active_count() const {
    return active_set(model_.multipliers, config_.slack_bound).size();
}

double online_accuracy(const SvmModel& model,
                       const std::vector<std::vector<double>>& test_points,
                       const std::vector<int>& test_labels) {
    if (test_points.empty())
        throw std::invalid_argument("accuracy needs a non-empty test set");
    return accuracy(model, test_points, test_labels);
}

std::vector<std::pair<std::size_t, double>> accuracy_curve(
    const std::vector<std::pair<std::size_t, SvmModel>>& snapshots,
    const std::vector<std::vector<double>>& test_points,
    const std::vector<int>& test_labels) {
    std::vector<std::pair<std::size_t, double>> curve;
    curve.reserve(snapshots.size());
    for (const auto& [seen, model] : snapshots)
        curve.emplace_back(seen, online_accuracy(model, test_points, test_labels));
    return curve;
}

}  // namespace ecosvm
