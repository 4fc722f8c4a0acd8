#pragma once

// Closed forms and grid optimizers for the ordering-only feedback regime: the
// transmitter knows which user currently has the better channel (plus the
// fading statistics), not the gains themselves. Power ps always goes to the
// instantaneously stronger user and pw to the weaker one; the adaptive
// orthogonal variant additionally gives each user a fixed bandwidth share.
// Ergodic rates and outage probabilities then reduce to exponential-integral
// and exponential expressions in (lambda_own, lambda_other, sigma^2).

#include <span>

#include "noma/channel.hpp"
#include "noma/ergodic.hpp"
#include "noma/rates.hpp"

namespace noma {

struct PartialPolicy {
    double ps_w = 0.0;
    double pw_w = 0.0;
    double alpha1 = 0.5;  // user 1 bandwidth share; orthogonal schemes only
};

struct PartialSpec {
    double pbar_w = 0.0;
    double rbar_prime = 0.0;     // minimum ergodic rate per user
    double zetabar_prime = 1.0;  // outage cap per user
    TargetRates targets;
};

// E[rate] for the user with statistics `own` against opponent `other`, under
// superposition with role-based powers. Zero-power edges are evaluated as
// analytic limits rather than by feeding infinite kernel arguments.
double ergodic_rate_noma_partial(const UserProfile& own, const UserProfile& other,
                                 double ps_w, double pw_w);

// Orthogonal variant: the user keeps bandwidth share alpha_own in both roles,
// with power ps when stronger and pw when weaker. alpha_own = 0 gives rate 0.
double ergodic_rate_oma2_partial(const UserProfile& own, const UserProfile& other,
                                 double ps_w, double pw_w, double alpha_own);

// d/dpw of ergodic_rate_noma_partial; positive for all ps+pw > 0, which is why
// the optimizers spend the whole budget (pw = pbar - ps).
double ergodic_rate_noma_partial_pw_derivative(const UserProfile& own,
                                               const UserProfile& other, double ps_w,
                                               double pw_w);

// True iff the closed-form rate is nondecreasing along pw_grid at fixed ps.
// alpha_own is ignored for the superposition scheme.
bool ergodic_rate_monotone_in_pw_check(Scheme scheme, const UserProfile& own,
                                       const UserProfile& other, double ps_w,
                                       double alpha_own,
                                       std::span<const double> pw_grid);

enum class PartialOutageCase {
    kBothBounded,            // strong side gated by a decode bound, weak side below its bound
    kWeakSaturated,          // strong side gated, weak side always in outage
    kWeakSaturatedLowRatio,  // same, gated by the free-decode bound at low ps/pw
    kStrongSaturated,        // strong side always in outage, weak side gated
    kBothSaturated,          // certain outage
    kZeroTarget,             // zero own target never misses
};

struct PartialOutageResult {
    double value = 0.0;
    PartialOutageCase outage_case = PartialOutageCase::kZeroTarget;
    int strong_bound_index = 0;  // which eps bound gates the strong side: 1, 2, or 4
    bool near_region_boundary = false;
};

// Outage probability for the `own` user at its target, with the other user's
// target entering through the cancellation-feasibility bound. The power-ratio
// classifier picks the active bound; at a ratio threshold both neighbouring
// branches are evaluated and must agree to 1e-9 (the probability is continuous
// there), else a logic error is raised.
PartialOutageResult outage_noma_partial_detail(const UserProfile& own,
                                               const UserProfile& other, double ps_w,
                                               double pw_w, double target_own,
                                               double target_other);
double outage_noma_partial(const UserProfile& own, const UserProfile& other,
                           double ps_w, double pw_w, double target_own,
                           double target_other);

// Orthogonal outage: no cancellation, so only the own target matters.
// alpha_own = 0 with a positive target is certain outage.
double outage_oma2_partial(const UserProfile& own, const UserProfile& other,
                           double ps_w, double pw_w, double alpha_own,
                           double target_own);

struct PartialGridOptions {
    int grid_points = 1001;  // per dimension
    bool refine = true;      // one 10x local pass around the incumbent
};

struct PartialErgodicSolution {
    PartialPolicy policy;
    double r1 = 0.0;
    double r2 = 0.0;
    double esr = 0.0;
    bool feasible = false;  // false: no grid point met the min-rate floor; the
                            // reported point then maximizes min(r1, r2)
};

// Maximize r1 + r2 over ps in [0, pbar] (pw = pbar - ps by monotonicity)
// subject to both rates >= rbar_prime. Ties keep the lowest grid index.
PartialErgodicSolution solve_p1_prime_noma(const UserProfile& user1,
                                           const UserProfile& user2, double pbar_w,
                                           double rbar_prime,
                                           const PartialGridOptions& options = {});
// 2-D variant over (ps, alpha1); user 2's share is 1 - alpha1.
PartialErgodicSolution solve_p1_prime_oma2(const UserProfile& user1,
                                           const UserProfile& user2, double pbar_w,
                                           double rbar_prime,
                                           const PartialGridOptions& options = {});
// Fixed equal split alpha1 = 1/2.
PartialErgodicSolution solve_p1_prime_oma1(const UserProfile& user1,
                                           const UserProfile& user2, double pbar_w,
                                           double rbar_prime,
                                           const PartialGridOptions& options = {});

struct PartialDltSolution {
    PartialPolicy policy;
    double outage1 = 1.0;
    double outage2 = 1.0;
    double dlt1 = 0.0;
    double dlt2 = 0.0;
    double sum_dlt = 0.0;
    bool feasible = false;  // false: no grid point met the outage caps; the
                            // reported point then minimizes max(outage1, outage2)
};

// Maximize rbar1 (1 - outage1) + rbar2 (1 - outage2) subject to both closed-form
// outages <= zetabar_prime, over the same grids as the ergodic solvers.
PartialDltSolution solve_p2_prime(const UserProfile& user1, const UserProfile& user2,
                                  double pbar_w, const TargetRates& targets,
                                  double zetabar_prime, Scheme scheme,
                                  const PartialGridOptions& options = {});

struct PartialMinMaxSolution {
    PartialPolicy policy;
    double outage1 = 1.0;
    double outage2 = 1.0;
    double max_outage = 1.0;
};

// Minimize max(outage1, outage2) over the policy grid.
PartialMinMaxSolution min_max_outage_partial(const UserProfile& user1,
                                             const UserProfile& user2, double pbar_w,
                                             const TargetRates& targets, Scheme scheme,
                                             const PartialGridOptions& options = {});

}  // namespace noma
