#pragma once

// Sum delivered-throughput maximization: each user has a fixed target rate and
// counts R̄_k(1 - outage_k); the optimizer chooses which users to serve per
// state at minimum power, subject to average/peak power and optional per-user
// outage caps. Same dual decomposition shape as the ergodic problem: per-state
// candidate enumeration plus an ellipsoid over (lambda, delta, mu).

#include <span>

#include "noma/channel.hpp"
#include "noma/ellipsoid.hpp"
#include "noma/ergodic.hpp"
#include "noma/rates.hpp"

namespace noma {

struct DltProblemSpec {
    double pbar_w = 0.0;
    double phat_w = 0.0;
    TargetRates targets;
    double zetabar = 1.0;  // per-user outage cap; 1 disables the constraint
};

struct DltCandidate {
    double p1 = 0.0;
    double p2 = 0.0;
    double alpha1 = -1.0;  // bandwidth share for orthogonal schemes
    double x1 = 0.0;       // outage indicators implied by the serving choice
    double x2 = 0.0;
    double lagrangian = 0.0;
    int candidate_index = -1;
};

// Per-state minimizer of
//   (rbar1 + delta) X1 + (rbar2 + mu) X2 + lambda (p1 + p2)
// over the four serving choices (idle / strong only / weak only / both), each
// at its minimum admissible power, gated by the peak power. objective_weight
// scales the rbar part (0 gives the feasibility probe). A user with target 0
// is always served at zero power with indicator 0.
DltCandidate solve_p2_noma_sub(const FadingState& state, const DualTriple& duals,
                               const TargetRates& targets, double phat_w,
                               double objective_weight = 1.0);
struct AlphaSolution {
    double alpha1 = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
    double total = 0.0;
};

// both_served, when provided, is the precomputed minimum-power two-user split
// for this state (it depends only on state and targets, so sweeps compute it
// once per state instead of once per dual iteration).
DltCandidate solve_p2_oma2_sub(const FadingState& state, const DualTriple& duals,
                               const TargetRates& targets, double phat_w,
                               double objective_weight = 1.0,
                               const AlphaSolution* both_served = nullptr);
DltCandidate solve_p2_oma1_sub(const FadingState& state, const DualTriple& duals,
                               const TargetRates& targets, double phat_w,
                               double objective_weight = 1.0);

// Minimum total power serving both users orthogonally at their exact targets:
//   min over alpha of alpha (2^(r1/alpha) - 1)/g1 + (1-alpha)(2^(r2/(1-alpha)) - 1)/g2.
// Convex in alpha; solved by bisection on the derivative sign. A zero target
// sends its user's bandwidth share to zero.
AlphaSolution solve_alpha_min_power(const TargetRates& targets, double g1, double g2,
                                    double tol = 1e-12);

struct PowerGap {
    double p_noma = 0.0;   // minimum superposition power meeting all targets
    double p_oma2 = 0.0;   // minimum orthogonal power (two users)
    double alpha1 = 0.0;   // optimal bandwidth share of the orthogonal solution
};

// Minimum power to hit every target exactly, superposition vs orthogonal.
// gains_desc must be sorted descending (strongest first), targets aligned;
// superposition handles any user count, the orthogonal part needs exactly 2.
PowerGap lemma41_power_gap(std::span<const double> gains_desc,
                           std::span<const double> targets);

// One minimum-power two-user split per ensemble state, for reuse across dual
// iterations of the orthogonal-adaptive scheme.
std::vector<AlphaSolution> precompute_alpha_solutions(const FadingEnsemble& ensemble,
                                                      const TargetRates& targets);

struct DltDualEval {
    double dual_value = 0.0;
    std::array<double, 3> subgrad{};  // d/d(lambda, delta, mu)
    double mean_power = 0.0;
    double mean_x1 = 0.0;
    double mean_x2 = 0.0;
};

// Dual value assembled as
//   ow (rbar1 + rbar2) + lambda Pbar + (delta + mu) zetabar - E[min L2],
// an upper bound on the sum delivered throughput by weak duality.
DltDualEval eval_dlt_dual_and_subgradient(
    const FadingEnsemble& ensemble, const DualTriple& duals,
    const DltProblemSpec& spec, Scheme scheme, double objective_weight = 1.0,
    const std::vector<AlphaSolution>* alpha_cache = nullptr);

struct DltPrimalRecovery {
    double sum_dlt = 0.0;
    double dlt1 = 0.0;
    double dlt2 = 0.0;
    double outage1 = 0.0;
    double outage2 = 0.0;
    double mean_power = 0.0;
    bool feasible = false;
    double max_violation = 0.0;
};

DltPrimalRecovery recover_dlt_primal(const FadingEnsemble& ensemble,
                                     const DualTriple& duals, const DltProblemSpec& spec,
                                     Scheme scheme, double tol = 1e-3,
                                     const std::vector<AlphaSolution>* alpha_cache = nullptr);

struct P2Solution {
    DualTriple duals;
    double dual_value = 0.0;
    DltPrimalRecovery primal;
    EllipsoidResult diagnostics;
    bool feasible = true;
};

// Full dual solve. Every feasible policy has value >= 0 (sum of nonnegative
// throughputs), so best dual below zero certifies that the outage caps and
// power budget cannot be met together. warm_start, when given, centers the
// ellipsoid there (sweeps pass the previous point's duals).
P2Solution solve_p2(const FadingEnsemble& ensemble, const DltProblemSpec& spec,
                    Scheme scheme, const EllipsoidOptions& options = {},
                    const DualTriple* warm_start = nullptr);

bool p2_is_feasible(const FadingEnsemble& ensemble, const DltProblemSpec& spec,
                    Scheme scheme, double tol = 1e-6);

}  // namespace noma
