#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sbniva {

using Vec = std::vector<double>;

// Dense row-major matrix. Column vectors are rows x 1, scalars 1 x 1.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::size_t size() const { return data.size(); }

    static Mat column(Vec v) {
        Mat m;
        m.rows = v.size();
        m.cols = 1;
        m.data = std::move(v);
        return m;
    }
};

// Bad user input or configuration; the CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string to_hex(std::uint64_t value);

// Deterministic helpers over the shared engine type. The standard
// distributions are avoided so that streams are identical across libstdc++
// versions.
using Rng = std::mt19937_64;

double uniform_real(Rng& rng, double lo, double hi);
// Uniform integer in [lo, hi], inclusive.
std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi);
// Standard normal via Box-Muller.
double normal(Rng& rng);

// Shortest representation that parses back to the identical double.
std::string format_double(double v);

}  // namespace sbniva
