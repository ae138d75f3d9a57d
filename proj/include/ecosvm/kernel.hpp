#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ecosvm {

enum class KernelFamily { Linear, RBF, Polynomial };

/// Kernel definition: the similarity K(x,y) between two points, which is also
/// the niche overlap between the corresponding species in the ecological
/// picture of the training problem.
struct KernelSpec {
    KernelFamily family = KernelFamily::RBF;
    double sigma = 1.0;   // RBF width
    int degree = 2;       // Polynomial only
    double offset = 0.0;  // Polynomial only

    static KernelSpec linear() { return {KernelFamily::Linear, 0.0, 0, 0.0}; }
    static KernelSpec rbf(double sigma) { return {KernelFamily::RBF, sigma, 0, 0.0}; }
    static KernelSpec polynomial(int degree, double offset = 0.0) {
        return {KernelFamily::Polynomial, 0.0, degree, offset};
    }

    /// Throws std::invalid_argument on nonsensical parameters (sigma <= 0 for
    /// RBF, degree < 1 for Polynomial).
    void validate() const;

    std::string name() const;

    /// JSON round trip, e.g. {"family":"rbf","sigma":4.0}.
    std::string to_json() const;
    static KernelSpec from_json(const std::string& text);
};

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> y);

/// Dense symmetric matrix of pairwise kernel values, with the kernel that
/// produced it kept for provenance.
struct GramMatrix {
    std::size_t n = 0;
    std::vector<double> entries;  // row-major n*n
    KernelSpec kernel;

    double at(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
    double& at(std::size_t i, std::size_t j) { return entries[i * n + j]; }
    const double* row(std::size_t i) const { return entries.data() + i * n; }

    /// Grows the matrix by one point. `border` holds the kernel values of the
    /// new point against the existing points followed by its self-similarity,
    /// so border.size() == n + 1.
    void append(const std::vector<double>& border);

    /// Drops the given rows/columns. Indices must be sorted ascending.
    void remove(const std::vector<std::size_t>& sorted_indices);
};

GramMatrix gram_matrix(const KernelSpec& spec,
                       const std::vector<std::vector<double>>& points);

}  // namespace ecosvm
