#pragma once

// Small shared utilities: deterministic reductions, numeric formatting and
// precondition checks used across the library.

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace noma {

inline constexpr double kInvLn2 = 1.4426950408889634073599246810019;  // 1/ln(2)
inline constexpr double kLn2 = 0.6931471805599453094172321214582;

// log2(1+x) with the natural-log ratio; well conditioned for small x and
// immune to -ffast-math style rewrites of std::log2.
double log2_1p(double x);

// Fixed-order pairwise (tree) summation. Unlike a running sum, the reduction
// order does not depend on chunking decisions made by callers, which keeps
// ensemble averages bit-identical across runs.
double pairwise_sum(std::span<const double> xs);

inline double pairwise_mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("pairwise_mean: empty range");
    return pairwise_sum(xs) / static_cast<double>(xs.size());
}

// Locale-free formatting with 9 significant digits (general format), the
// repository-wide convention for CSV and ensemble headers.
std::string format_sig9(double v);

// Precondition helpers.
void check_positive(double v, const char* what);
void check_nonneg(double v, const char* what);
void check_finite(double v, const char* what);

}  // namespace noma
