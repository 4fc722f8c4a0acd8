#pragma once

// Test-side oracles, deliberately implemented through routes independent of
// the library under test: direct quadrature instead of series/continued
// fractions, brute-force grids instead of candidate enumerations, interval
// probabilities instead of region classification, and the standard library's
// Mersenne Twister instead of the product's counter RNG.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "noma/channel.hpp"
#include "noma/ergodic.hpp"
#include "noma/rates.hpp"

namespace oracle {

// Adaptive Simpson quadrature to absolute tolerance tol.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol);

// E1(x) and -e^x E1(x) via direct quadrature of int_0^inf e^-u/(u+x) du.
double e1_quadrature(double x);
double f_kernel_quadrature(double x);

// Brute-force maxima of the per-state ergodic Lagrangians over power (and
// bandwidth-share) grids; n_per_axis is the number of steps per dimension.
// The orthogonal-adaptive version scans the two single-user faces at full
// resolution plus a coarser three-dimensional interior sweep (n_interior per
// axis), since a full product grid at face resolution is unaffordable.
double p1_noma_grid_max(const noma::FadingState& state, const noma::DualTriple& duals,
                        double phat_w, double objective_weight, int n_per_axis);
double p1_oma2_grid_max(const noma::FadingState& state, const noma::DualTriple& duals,
                        double phat_w, double objective_weight, int n_per_axis,
                        int n_interior);
double p1_oma1_grid_max(const noma::FadingState& state, const noma::DualTriple& duals,
                        double phat_w, double objective_weight, int n_per_axis);

// Brute-force minima of the per-state throughput Lagrangians (service
// indicators weighted by target-scaled prices plus a power price).
double p2_noma_grid_min(const noma::FadingState& state, const noma::DualTriple& duals,
                        const noma::TargetRates& targets, double phat_w,
                        double objective_weight, int n_per_axis);
double p2_oma2_grid_min(const noma::FadingState& state, const noma::DualTriple& duals,
                        const noma::TargetRates& targets, double phat_w,
                        double objective_weight, int n_per_axis);
double p2_oma1_grid_min(const noma::FadingState& state, const noma::DualTriple& duals,
                        const noma::TargetRates& targets, double phat_w,
                        double objective_weight, int n_per_axis);

// Ordering-only outage probability assembled directly from the decode-event
// intervals of the larger/smaller order statistic; no region classification.
double partial_outage_interval(double lambda_own, double lambda_other, double sigma2,
                               double ps_w, double pw_w, double target_own,
                               double target_other);

// Kolmogorov-Smirnov distance between a sample and Exp(rate).
double ks_distance_exponential(std::span<const double> xs, double rate);

// Normalized-gain states drawn with std::mt19937_64 (route independent of the
// product RNG); gains are exponential(lambda_k) divided by sigma2.
std::vector<noma::FadingState> mc_states(double lambda1, double lambda2, double sigma2,
                                         std::size_t n, std::uint64_t seed);

}  // namespace oracle
