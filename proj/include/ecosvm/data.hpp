#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ecosvm {

/// Feature vectors with optional +-1 labels. labels is empty for unlabeled
/// (SVDD-ready) data.
struct Dataset {
    std::vector<std::vector<double>> points;
    std::vector<int> labels;

    bool labeled() const { return !labels.empty(); }
    std::size_t size() const { return points.size(); }
    std::size_t dim() const { return points.empty() ? 0 : points.front().size(); }
};

/// Uniform points on [0,1]^p labeled by the hyperplane x_1 = 1/2; ties on the
/// boundary get +1. Deterministic per (n, p, seed).
Dataset gen_toy_linear(std::size_t n, std::size_t p, std::uint64_t seed);

/// Uniform points on [0,1]^p labeled by the wavy boundary
///   x_1 = 1/2 + (1/10) sin(2 pi x_2) ... sin(2 pi x_p),
/// which is not linearly separable. Requires p >= 2; ties get +1.
Dataset gen_toy_nonlinear(std::size_t n, std::size_t p, std::uint64_t seed);

/// Unlabeled standard-normal cloud around a mean drawn uniformly from
/// [0,1]^p. Deterministic per (n, p, seed).
Dataset gen_gaussian_blob(std::size_t n, std::size_t p, std::uint64_t seed);

/// Reads an IDX image/label file pair (big-endian, magic 0x803 / 0x801),
/// keeps only the two requested digits, scales pixels to [0,1] by /255 and
/// maps digit_a -> +1, digit_b -> -1. Throws DataError on format problems and
/// on digit_a == digit_b, IoError on unreadable files.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 int digit_a, int digit_b);

/// Comma-separated reals, one point per row, optional header line. When every
/// row ends in exactly -1 or +1 (and there are at least two columns) the last
/// column is taken as the label. Throws DataError naming the offending line
/// on ragged or non-numeric input.
Dataset load_csv(const std::string& path);

/// Writes CSV at 17 significant digits so load_csv round-trips losslessly.
void save_csv(const Dataset& data, const std::string& path);

}  // namespace ecosvm
