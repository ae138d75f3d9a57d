#include "ecosvm/svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ecosvm/errors.hpp"
#include "ecosvm/log.hpp"

namespace ecosvm {

namespace {

void validate_training_input(const std::vector<std::vector<double>>& points,
                             const std::vector<int>& labels,
                             std::optional<double> slack_bound) {
    if (points.size() != labels.size())
        throw std::invalid_argument("points and labels differ in length");
    if (points.size() < 2)
        throw std::invalid_argument("training needs at least two points");
    if (slack_bound && !(*slack_bound > 0.0))
        throw std::invalid_argument("slack bound C must be positive");
    bool pos = false, neg = false;
    for (int t : labels) {
        if (t != 1 && t != -1) throw std::invalid_argument("labels must be +1 or -1");
        (t > 0 ? pos : neg) = true;
    }
    if (!pos || !neg)
        throw std::invalid_argument("training needs both classes present");
}

}  // namespace

std::vector<std::size_t> active_set(const std::vector<double>& multipliers,
                                    std::optional<double> slack_bound) {
    std::vector<std::size_t> active;
    if (slack_bound) {
        const double c = *slack_bound;
        const double eps = 1e-6 * c;
        for (std::size_t i = 0; i < multipliers.size(); ++i)
            if (multipliers[i] > eps && multipliers[i] < c - eps) active.push_back(i);
    } else {
        for (std::size_t i = 0; i < multipliers.size(); ++i)
            if (multipliers[i] > 0.0) active.push_back(i);
    }
    return active;
}

namespace detail {

// Bias from a precomputed Gram matrix over the stored points.
double bias_from_gram(const std::vector<int>& labels,
                      const std::vector<double>& multipliers,
                      const GramMatrix& gram, std::optional<double> slack_bound) {
    const auto active = active_set(multipliers, slack_bound);
    if (active.empty())
        throw EmptyActiveSetError(
            "bias needs at least one active support vector (0 < a < C)");
    double sum = 0.0;
    for (std::size_t i : active) {
        double score = 0.0;
        const double* row = gram.row(i);
        for (std::size_t j = 0; j < gram.n; ++j)
            score += multipliers[j] * labels[j] * row[j];
        sum += labels[i] - score;
    }
    return sum / static_cast<double>(active.size());
}

// Fallback used when every multiplier is saturated and the averaging formula
// is undefined. With the weight vector fixed, the primal-optimal bias
// minimizes the total margin shortfall sum_i zeta_i(b), a piecewise-linear
// function whose subgradient steps by one at b = t_i - score_i; the optimum
// is the interval between the n_pos-th and (n_pos+1)-th smallest kinks, and
// its midpoint is the margin-consistent completion.
double bias_midpoint_fallback(const std::vector<double>& scores,
                              const std::vector<int>& labels) {
    std::vector<double> kinks(scores.size());
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        kinks[i] = static_cast<double>(labels[i]) - scores[i];
        n_pos += labels[i] > 0;
    }
    std::sort(kinks.begin(), kinks.end());
    if (n_pos == 0 || n_pos >= kinks.size()) {
        // Single-class degenerate input; centre on the kinks.
        return (kinks.front() + kinks.back()) / 2.0;
    }
    return (kinks[n_pos - 1] + kinks[n_pos]) / 2.0;
}

}  // namespace detail

double compute_bias(const std::vector<std::vector<double>>& points,
                    const std::vector<int>& labels,
                    const std::vector<double>& multipliers,
                    const KernelSpec& kernel,
                    std::optional<double> slack_bound) {
    if (points.size() != labels.size() || points.size() != multipliers.size())
        throw std::invalid_argument("compute_bias: mismatched input lengths");
    return detail::bias_from_gram(labels, multipliers, gram_matrix(kernel, points),
                                  slack_bound);
}

SvmModel fit_batch(const std::vector<std::vector<double>>& points,
                   const std::vector<int>& labels, const KernelSpec& kernel,
                   std::optional<double> slack_bound, Solver solver,
                   const SolverOptions& opts) {
    validate_training_input(points, labels, slack_bound);
    if (points.size() > opts.batch_cap)
        throw std::invalid_argument(
            "batch fit of " + std::to_string(points.size()) +
            " points exceeds the cap of " + std::to_string(opts.batch_cap) +
            "; raise the cap or use the online path");
    const GramMatrix gram = gram_matrix(kernel, points);
    const std::size_t n = points.size();

    std::vector<double> multipliers;
    double lambda = 0.0;
    if (solver == Solver::Dynamics) {
        EcoState init;
        init.slack_bound = slack_bound;
        init.lambda = 0.0;
        const double start = std::min(1.0, slack_bound.value_or(1.0)) /
                             (2.0 * static_cast<double>(n));
        init.abundances.assign(n, start);
        EcoState steady = integrate_to_steady(std::move(init), labels, gram, opts);
        multipliers = std::move(steady.abundances);
        lambda = steady.lambda;
    } else {
        // Two orders tighter than the flow tolerance, capped for very loose
        // experiment-scale settings.
        const double qp_tol = std::clamp(opts.tol * 1e-2, 1e-12, 1e-4);
        multipliers = qp_solve(labels, gram, slack_bound, qp_tol, {},
                               opts.multiplier_cap);
    }

    const double cut = opts.extinction_cut(slack_bound);
    SvmModel model;
    model.kernel = kernel;
    model.slack_bound = slack_bound;
    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < n; ++i) {
        if (multipliers[i] <= cut) continue;
        survivors.push_back(i);
        model.support_points.push_back(points[i]);
        model.support_labels.push_back(labels[i]);
        model.multipliers.push_back(multipliers[i]);
    }
    if (model.support_points.empty())
        throw ConvergenceError("all multipliers extinct: no support vectors found",
                               0.0);

    GramMatrix survivor_gram;
    survivor_gram.n = survivors.size();
    survivor_gram.kernel = kernel;
    survivor_gram.entries.resize(survivors.size() * survivors.size());
    for (std::size_t i = 0; i < survivors.size(); ++i)
        for (std::size_t j = 0; j < survivors.size(); ++j)
            survivor_gram.at(i, j) = gram.at(survivors[i], survivors[j]);

    try {
        model.bias = detail::bias_from_gram(model.support_labels, model.multipliers,
                                            survivor_gram, slack_bound);
    } catch (const EmptyActiveSetError&) {
        // All multipliers saturated: score every training point against the
        // survivors and place the boundary at the midpoint.
        std::vector<double> scores(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            double s = 0.0;
            for (std::size_t jj = 0; jj < survivors.size(); ++jj)
                s += model.multipliers[jj] * model.support_labels[jj] *
                     gram.at(k, survivors[jj]);
            scores[k] = s;
        }
        model.bias = detail::bias_midpoint_fallback(scores, labels);
        model.bias_fallback = true;
        log::info("all multipliers saturated; bias set by the midpoint rule (b=%g)",
                  model.bias);
    }
    (void)lambda;
    return model;
}

double decision(const SvmModel& model, std::span<const double> x) {
    if (model.support_points.empty())
        throw std::invalid_argument("decision on an empty model");
    if (x.size() != model.support_points.front().size())
        throw std::invalid_argument("decision: query dimension mismatch");
    double score = model.bias;
    for (std::size_t i = 0; i < model.support_points.size(); ++i)
        score += model.multipliers[i] * model.support_labels[i] *
                 kernel_eval(model.kernel, model.support_points[i], x);
    return score;
}

int classify(const SvmModel& model, std::span<const double> x) {
    return decision(model, x) >= 0.0 ? 1 : -1;
}

std::vector<double> slack_values(const SvmModel& model,
                                 const std::vector<std::vector<double>>& points,
                                 const std::vector<int>& labels) {
    if (points.size() != labels.size())
        throw std::invalid_argument("slack_values: mismatched input lengths");
    std::vector<double> zeta(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        zeta[i] = std::max(0.0, 1.0 - labels[i] * decision(model, points[i]));
    return zeta;
}

double accuracy(const SvmModel& model,
                const std::vector<std::vector<double>>& points,
                const std::vector<int>& labels) {
    if (points.empty()) throw std::invalid_argument("accuracy: empty test set");
    if (points.size() != labels.size())
        throw std::invalid_argument("accuracy: mismatched input lengths");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < points.size(); ++i)
        if (classify(model, points[i]) == labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(points.size());
}

namespace {

nlohmann::json model_to_json_obj(const SvmModel& model) {
    nlohmann::json j;
    j["type"] = "svm";
    j["kernel"] = nlohmann::json::parse(model.kernel.to_json());
    j["support_points"] = model.support_points;
    j["support_labels"] = model.support_labels;
    j["multipliers"] = model.multipliers;
    j["bias"] = model.bias;
    j["slack_bound"] = model.slack_bound ? nlohmann::json(*model.slack_bound)
                                         : nlohmann::json(nullptr);
    j["bias_fallback"] = model.bias_fallback;
    return j;
}

}  // namespace

std::string svm_to_json(const SvmModel& model) {
    return model_to_json_obj(model).dump(2);
}

SvmModel svm_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad model JSON: ") + e.what());
    }
    if (j.value("type", "") != "svm") throw DataError("model JSON is not an SVM model");
    SvmModel model;
    try {
        model.kernel = KernelSpec::from_json(j.at("kernel").dump());
        model.support_points =
            j.at("support_points").get<std::vector<std::vector<double>>>();
        model.support_labels = j.at("support_labels").get<std::vector<int>>();
        model.multipliers = j.at("multipliers").get<std::vector<double>>();
        model.bias = j.at("bias").get<double>();
        if (!j.at("slack_bound").is_null())
            model.slack_bound = j.at("slack_bound").get<double>();
        model.bias_fallback = j.value("bias_fallback", false);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad model JSON: ") + e.what());
    }
    if (model.support_points.size() != model.support_labels.size() ||
        model.support_points.size() != model.multipliers.size())
        throw DataError("model JSON has inconsistent lengths");
    return model;
}

void save_svm(const SvmModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << svm_to_json(model) << "\n";
    if (!out) throw IoError("failed writing " + path);
}

SvmModel load_svm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return svm_from_json(buf.str());
}

}  // namespace ecosvm
