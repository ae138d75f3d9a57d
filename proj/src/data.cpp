#include "ecosvm/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string_view>

#include "ecosvm/errors.hpp"
#include "ecosvm/rng.hpp"

namespace ecosvm {

Dataset gen_toy_linear(std::size_t n, std::size_t p, std::uint64_t seed) {
    if (n < 1 || p < 1) throw std::invalid_argument("gen_toy_linear needs n,p >= 1");
    Rng rng(seed);
    Dataset data;
    data.points.reserve(n);
    data.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(p);
        for (double& v : x) v = rng.uniform();
        data.labels.push_back(x[0] >= 0.5 ? 1 : -1);
        data.points.push_back(std::move(x));
    }
    return data;
}

Dataset gen_toy_nonlinear(std::size_t n, std::size_t p, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_toy_nonlinear needs n >= 1");
    if (p < 2) throw std::invalid_argument("gen_toy_nonlinear needs p >= 2");
    constexpr double two_pi = 2.0 * 3.14159265358979323846;
    Rng rng(seed);
    Dataset data;
    data.points.reserve(n);
    data.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(p);
        for (double& v : x) v = rng.uniform();
        double wave = 1.0;
        for (std::size_t k = 1; k < p; ++k) wave *= std::sin(two_pi * x[k]);
        const double boundary = 0.5 + 0.1 * wave;
        data.labels.push_back(x[0] - boundary >= 0.0 ? 1 : -1);
        data.points.push_back(std::move(x));
    }
    return data;
}

Dataset gen_gaussian_blob(std::size_t n, std::size_t p, std::uint64_t seed) {
    if (n < 1 || p < 1) throw std::invalid_argument("gen_gaussian_blob needs n,p >= 1");
    Rng rng(seed);
    std::vector<double> mean(p);
    for (double& v : mean) v = rng.uniform();
    Dataset data;
    data.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(p);
        for (std::size_t k = 0; k < p; ++k) x[k] = mean[k] + rng.gaussian();
        data.points.push_back(std::move(x));
    }
    return data;
}

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t off) {
    return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
           (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 int digit_a, int digit_b) {
    if (digit_a == digit_b)
        throw std::invalid_argument("degenerate task: the two digits are equal");

    const auto img = read_file(images_path);
    if (img.size() < 16) throw DataError(images_path + ": truncated IDX header");
    const std::uint32_t img_magic = read_be32(img, 0);
    if (img_magic != 0x00000803u)
        throw DataError(images_path + ": bad IDX magic " + std::to_string(img_magic) +
                        " (expected 2051 for images)");
    const std::size_t n = read_be32(img, 4);
    const std::size_t rows = read_be32(img, 8);
    const std::size_t cols = read_be32(img, 12);
    const std::size_t pixels = rows * cols;
    if (img.size() < 16 + n * pixels)
        throw DataError(images_path + ": truncated image data (" +
                        std::to_string(img.size() - 16) + " bytes for " +
                        std::to_string(n) + " images of " + std::to_string(pixels) +
                        " pixels)");

    const auto lab = read_file(labels_path);
    if (lab.size() < 8) throw DataError(labels_path + ": truncated IDX header");
    const std::uint32_t lab_magic = read_be32(lab, 0);
    if (lab_magic != 0x00000801u)
        throw DataError(labels_path + ": bad IDX magic " + std::to_string(lab_magic) +
                        " (expected 2049 for labels)");
    const std::size_t n_labels = read_be32(lab, 4);
    if (n_labels != n)
        throw DataError("image/label count mismatch: " + std::to_string(n) +
                        " images vs " + std::to_string(n_labels) + " labels");
    if (lab.size() < 8 + n_labels)
        throw DataError(labels_path + ": truncated label data");

    Dataset data;
    for (std::size_t i = 0; i < n; ++i) {
        const int digit = lab[8 + i];
        if (digit != digit_a && digit != digit_b) continue;
        std::vector<double> x(pixels);
        const unsigned char* src = img.data() + 16 + i * pixels;
        for (std::size_t k = 0; k < pixels; ++k)
            x[k] = static_cast<double>(src[k]) / 255.0;
        data.points.push_back(std::move(x));
        data.labels.push_back(digit == digit_a ? 1 : -1);
    }
    return data;
}

namespace {

bool parse_double(std::string_view field, double& out) {
    // Trim surrounding whitespace; from_chars is strict about the rest.
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
        field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' ||
                              field.back() == '\r'))
        field.remove_suffix(1);
    if (field.empty()) return false;
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, out);
    return ec == std::errc() && ptr == end;
}

bool parse_row(std::string_view line, std::vector<double>& row) {
    row.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        const std::string_view field =
            line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                               : comma - start);
        double v = 0.0;
        if (!parse_double(field, v)) return false;
        row.push_back(v);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return true;
}

bool blank(const std::string& line) {
    for (char c : line)
        if (c != ' ' && c != '\t' && c != '\r') return false;
    return true;
}

}  // namespace

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        std::vector<double> row;
        if (!parse_row(line, row)) {
            if (first_content) {  // optional header
                first_content = false;
                continue;
            }
            throw DataError(path + ": line " + std::to_string(line_no) +
                            ": non-numeric field");
        }
        first_content = false;
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError(path + ": line " + std::to_string(line_no) +
                            ": expected " + std::to_string(rows.front().size()) +
                            " columns, got " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path + ": no data rows");

    for (const auto& row : rows)
        for (double v : row)
            if (!std::isfinite(v))
                throw DataError(path + ": non-finite value");

    // The last column is a label column iff every entry is exactly +-1.
    const std::size_t cols = rows.front().size();
    bool labeled = cols >= 2;
    for (const auto& row : rows) {
        const double last = row.back();
        if (last != 1.0 && last != -1.0) {
            labeled = false;
            break;
        }
    }

    Dataset data;
    data.points.reserve(rows.size());
    for (auto& row : rows) {
        if (labeled) {
            data.labels.push_back(row.back() > 0 ? 1 : -1);
            row.pop_back();
        }
        data.points.push_back(std::move(row));
    }
    return data;
}

void save_csv(const Dataset& data, const std::string& path) {
    if (data.labeled() && data.labels.size() != data.points.size())
        throw std::invalid_argument("save_csv: labels and points differ in length");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    char buf[64];
    for (std::size_t i = 0; i < data.points.size(); ++i) {
        const auto& x = data.points[i];
        for (std::size_t k = 0; k < x.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", x[k]);
            out << (k ? "," : "") << buf;
        }
        if (data.labeled()) out << "," << data.labels[i];
        out << "\n";
    }
    if (!out) throw IoError("failed writing " + path);
}

}  // namespace ecosvm
