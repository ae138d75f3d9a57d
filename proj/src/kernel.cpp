#include "ecosvm/kernel.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>
#include <json.hpp>

#include "ecosvm/errors.hpp"

namespace ecosvm {

void KernelSpec::validate() const {
    switch (family) {
        case KernelFamily::Linear:
            return;
        case KernelFamily::RBF:
            if (!(sigma > 0.0))
                throw std::invalid_argument("RBF kernel requires sigma > 0");
            return;
        case KernelFamily::Polynomial:
            if (degree < 1)
                throw std::invalid_argument("polynomial kernel requires degree >= 1");
            return;
    }
    throw std::invalid_argument("unknown kernel family");
}

std::string KernelSpec::name() const {
    switch (family) {
        case KernelFamily::Linear: return "linear";
        case KernelFamily::RBF: return "rbf";
        case KernelFamily::Polynomial: return "polynomial";
    }
    return "?";
}

std::string KernelSpec::to_json() const {
    nlohmann::json j;
    j["family"] = name();
    if (family == KernelFamily::RBF) j["sigma"] = sigma;
    if (family == KernelFamily::Polynomial) {
        j["degree"] = degree;
        j["offset"] = offset;
    }
    return j.dump();
}

KernelSpec KernelSpec::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad kernel JSON: ") + e.what());
    }
    const std::string fam = j.value("family", "");
    KernelSpec spec;
    if (fam == "linear") {
        spec = KernelSpec::linear();
    } else if (fam == "rbf") {
        if (!j.contains("sigma")) throw DataError("rbf kernel JSON needs \"sigma\"");
        spec = KernelSpec::rbf(j["sigma"].get<double>());
    } else if (fam == "polynomial") {
        spec = KernelSpec::polynomial(j.value("degree", 2), j.value("offset", 0.0));
    } else {
        throw DataError("unknown kernel family: \"" + fam + "\"");
    }
    spec.validate();
    return spec;
}

namespace {

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double sq_dist(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

}  // namespace

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("kernel_eval: dimension mismatch (" +
                                    std::to_string(x.size()) + " vs " +
                                    std::to_string(y.size()) + ")");
    spec.validate();
    switch (spec.family) {
        case KernelFamily::Linear:
            return dot(x, y);
        case KernelFamily::RBF:
            return std::exp(-sq_dist(x, y) / (2.0 * spec.sigma * spec.sigma));
        case KernelFamily::Polynomial:
            return std::pow(dot(x, y) + spec.offset, spec.degree);
    }
    throw std::invalid_argument("unknown kernel family");
}

GramMatrix gram_matrix(const KernelSpec& spec,
                       const std::vector<std::vector<double>>& points) {
    if (points.empty())
        throw std::invalid_argument("gram_matrix: empty point list");
    spec.validate();
    const std::size_t n = points.size();
    const std::size_t dim = points.front().size();
    for (const auto& p : points)
        if (p.size() != dim)
            throw std::invalid_argument("gram_matrix: points of unequal dimension");

    GramMatrix gram;
    gram.n = n;
    gram.kernel = spec;
    gram.entries.resize(n * n);

    // Large instances go through one dot-product matrix; every family is a
    // pointwise transform of it. Small instances use the pairwise formulas,
    // which avoid the cancellation in |x|^2 + |y|^2 - 2 x.y for the RBF.
    if (n >= 128 && dim >= 8) {
        Eigen::MatrixXd x(n, dim);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < dim; ++j) x(i, j) = points[i][j];
        Eigen::MatrixXd dots = Eigen::MatrixXd::Zero(n, n);
        dots.selfadjointView<Eigen::Lower>().rankUpdate(x);
        const double inv_two_sigma_sq =
            spec.family == KernelFamily::RBF ? 1.0 / (2.0 * spec.sigma * spec.sigma)
                                             : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                const double d = dots(i, j);
                double k = 0.0;
                switch (spec.family) {
                    case KernelFamily::Linear:
                        k = d;
                        break;
                    case KernelFamily::RBF: {
                        const double sq =
                            std::max(0.0, dots(i, i) + dots(j, j) - 2.0 * d);
                        k = i == j ? 1.0 : std::exp(-sq * inv_two_sigma_sq);
                        break;
                    }
                    case KernelFamily::Polynomial:
                        k = std::pow(d + spec.offset, spec.degree);
                        break;
                }
                gram.entries[i * n + j] = k;
                gram.entries[j * n + i] = k;
            }
        }
        return gram;
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double k = kernel_eval(spec, points[i], points[j]);
            gram.entries[i * n + j] = k;
            gram.entries[j * n + i] = k;
        }
    }
    return gram;
}

void GramMatrix::append(const std::vector<double>& border) {
    if (border.size() != n + 1)
        throw std::invalid_argument("GramMatrix::append: border has wrong length");
    const std::size_t m = n + 1;
    std::vector<double> grown(m * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) grown[i * m + j] = entries[i * n + j];
    for (std::size_t i = 0; i < n; ++i) {
        grown[i * m + n] = border[i];
        grown[n * m + i] = border[i];
    }
    grown[n * m + n] = border[n];
    entries = std::move(grown);
    n = m;
}

void GramMatrix::remove(const std::vector<std::size_t>& sorted_indices) {
    if (sorted_indices.empty()) return;
    std::vector<bool> drop(n, false);
    for (std::size_t idx : sorted_indices) {
        if (idx >= n) throw std::invalid_argument("GramMatrix::remove: index out of range");
        drop[idx] = true;
    }
    std::vector<std::size_t> keep;
    keep.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (!drop[i]) keep.push_back(i);
    const std::size_t m = keep.size();
    std::vector<double> shrunk(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            shrunk[i * m + j] = entries[keep[i] * n + keep[j]];
    entries = std::move(shrunk);
    n = m;
}

}  // namespace ecosvm
