#pragma once

// Ergodic sum-rate maximization with per-user minimum average rates under
// average and peak power constraints, solved by Lagrangian decomposition:
// closed-form per-state subproblems plus an ellipsoid search over the three
// dual variables (lambda for average power, delta and mu for the two
// minimum-rate constraints).

#include <array>
#include <optional>
#include <vector>

#include "noma/channel.hpp"
#include "noma/ellipsoid.hpp"
#include "noma/rates.hpp"

namespace noma {

enum class Scheme { kNoma, kOma1, kOma2 };

const char* scheme_name(Scheme s);

struct DualTriple {
    double lambda = 0.0;  // average power price
    double delta = 0.0;   // user 1 minimum-rate multiplier
    double mu = 0.0;      // user 2 minimum-rate multiplier
};

struct ErgodicProblemSpec {
    double pbar_w = 0.0;       // average power budget
    double phat_w = 0.0;       // per-state peak power budget
    double rbar_bps_hz = 0.0;  // common minimum average rate target
};

struct SubproblemSolution {
    double p1 = 0.0;
    double p2 = 0.0;
    double alpha1 = -1.0;   // bandwidth share; -1 when not applicable (superposition)
    double objective = 0.0; // per-state Lagrangian value at the maximizer
    double r1 = 0.0;
    double r2 = 0.0;
    int candidate_index = -1;
};

// Per-state Lagrangian maximizers. objective_weight scales the rate part of
// the objective: 1 for the real dual, 0 for the homogeneous feasibility probe
// (the rate weights become objective_weight + delta/mu).
SubproblemSolution solve_p1_noma_sub(const FadingState& state, const DualTriple& duals,
                                     double phat_w, double objective_weight = 1.0);
SubproblemSolution solve_p1_oma2_sub(const FadingState& state, const DualTriple& duals,
                                     double phat_w, double objective_weight = 1.0);
// Fixed equal bandwidth split: separable water-filling with a peak-power face
// search; both users may be active simultaneously.
SubproblemSolution solve_p1_oma1_sub(const FadingState& state, const DualTriple& duals,
                                     double phat_w, double objective_weight = 1.0);

// Gradient of the per-state superposition Lagrangian at interior (p1, p2) in
// role-sorted coordinates (ps = strong user's power); used by the
// stationarity diagnostics and their finite-difference checks.
std::array<double, 2> p1_noma_lagrangian_gradient(const FadingState& state,
                                                  const DualTriple& duals,
                                                  double ps, double pw,
                                                  double objective_weight = 1.0);
// |dL/dps| + |dL/dpw| at the given point.
double stationarity_residual_noma(const FadingState& state, const DualTriple& duals,
                                  double ps, double pw, double objective_weight = 1.0);

struct DualEvalResult {
    double dual_value = 0.0;
    std::array<double, 3> subgrad{};  // d/d(lambda, delta, mu)
    double mean_power = 0.0;
    double mean_r1 = 0.0;
    double mean_r2 = 0.0;
};

// Evaluates the dual function
//   g = E[max per-state Lagrangian] + lambda Pbar - (delta + mu) Rbar
// and its subgradient (Pbar - E[p], E[R1] - Rbar, E[R2] - Rbar).
DualEvalResult eval_dual_and_subgradient(const FadingEnsemble& ensemble,
                                         const DualTriple& duals,
                                         const ErgodicProblemSpec& spec, Scheme scheme,
                                         double objective_weight = 1.0);

struct PrimalRecovery {
    double esr = 0.0;  // E[R1] + E[R2] of the recovered policy
    double r1 = 0.0;
    double r2 = 0.0;
    double mean_power = 0.0;
    bool feasible = false;
    double max_violation = 0.0;  // relative constraint violation of the recovery
};

// Re-runs the per-state subproblems at fixed duals and averages the resulting
// policies; flags the recovery infeasible when a constraint is violated by
// more than the tolerance (relative).
PrimalRecovery recover_primal(const FadingEnsemble& ensemble, const DualTriple& duals,
                              const ErgodicProblemSpec& spec, Scheme scheme,
                              double tol = 1e-3);

struct P1Solution {
    DualTriple duals;
    double dual_value = 0.0;
    PrimalRecovery primal;
    EllipsoidResult diagnostics;
    bool feasible = true;  // false when an infeasibility certificate was found
};

// Full dual solve: ellipsoid over (lambda, delta, mu) >= 0. The dual value of
// a feasible instance is at least rbar1 + rbar2, so best dual below zero
// certifies infeasibility.
P1Solution solve_p1(const FadingEnsemble& ensemble, const ErgodicProblemSpec& spec,
                    Scheme scheme, const EllipsoidOptions& options = {});

// True iff some policy meets the spec's constraints, decided by minimizing the
// homogeneous zero-objective dual (negative values certify infeasibility).
bool p1_is_feasible(const FadingEnsemble& ensemble, const ErgodicProblemSpec& spec,
                    Scheme scheme, double tol = 1e-6);

struct RmaxResult {
    double rmax = 0.0;
    int iterations = 0;
};

// Largest common rate target that keeps the instance feasible, by bisection
// over the feasibility probe.
RmaxResult rmax_bisection(const FadingEnsemble& ensemble, double pbar_w, double phat_w,
                          Scheme scheme, double tol = 1e-4);

struct DominanceConstruction {
    std::vector<StatePolicy> policies;  // superposition policies, per state
    double r1 = 0.0;                    // ergodic rates they achieve
    double r2 = 0.0;
    std::size_t fallback_count = 0;     // states where the input had both users active
};

// Maps per-state orthogonal policies onto superposition policies achieving
// rates at least as large, state by state. Single-user inputs map exactly
// (full band, same power); two-user inputs fall back to granting the total
// power to the better channel and are counted, since an exact per-user
// guarantee is not available for them.
DominanceConstruction noma_dominates_oma2_construction(
    const FadingEnsemble& ensemble, const std::vector<StatePolicy>& oma2_policies);

}  // namespace noma
