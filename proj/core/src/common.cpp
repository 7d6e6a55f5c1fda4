#include "sbniva/common.hpp"

#include <charconv>
#include <cmath>

namespace sbniva {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

double uniform_real(Rng& rng, double lo, double hi) {
    // 53 random bits -> [0, 1)
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
    auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    // Rejection sampling to stay unbiased.
    std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return lo + static_cast<std::int64_t>(v % span);
}

double normal(Rng& rng) {
    double u1 = uniform_real(rng, 0.0, 1.0);
    double u2 = uniform_real(rng, 0.0, 1.0);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace sbniva
