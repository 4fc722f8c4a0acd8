#include "noma/util.hpp"

#include <cmath>
#include <cstdio>

namespace noma {

double log2_1p(double x) { return std::log1p(x) * kInvLn2; }

namespace {

double pairwise_sum_rec(const double* xs, std::size_t n) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += xs[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_rec(xs, half) + pairwise_sum_rec(xs + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> xs) {
    return pairwise_sum_rec(xs.data(), xs.size());
}

std::string format_sig9(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

void check_positive(double v, const char* what) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be > 0");
}

void check_nonneg(double v, const char* what) {
    if (!(v >= 0.0)) throw std::invalid_argument(std::string(what) + " must be >= 0");
}

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}

}  // namespace noma
