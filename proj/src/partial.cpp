#include "noma/partial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "noma/special.hpp"
#include "noma/util.hpp"

namespace noma {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Both profiles must describe the same receiver noise floor; the closed forms
// share one sigma^2 across the ordering statistics.
double shared_noise_w(const UserProfile& own, const UserProfile& other) {
    const double a = own.noise_power_w;
    const double b = other.noise_power_w;
    if (std::abs(a - b) > 1e-12 * std::max(a, b)) {
        throw std::invalid_argument("user profiles disagree on noise power");
    }
    return a;
}

// P(min exceeds x) for two independent exponentials is exp(-S x); the own
// gain's marginal tail is exp(-lambda_own x). Arguments may be +inf.
double tail_own(double lambda_own, double x) { return std::exp(-lambda_own * x); }
double tail_min(double sum_rates, double x) { return std::exp(-sum_rates * x); }

// P(own gain in (a, b] and own gain is the larger of the pair), a <= b.
double prob_larger_between(double lambda_own, double sum_rates, double a, double b) {
    const double ratio = lambda_own / sum_rates;
    return (tail_own(lambda_own, a) - tail_own(lambda_own, b)) -
           ratio * (tail_min(sum_rates, a) - tail_min(sum_rates, b));
}

// P(own gain <= b and own gain is the smaller of the pair).
double prob_smaller_below(double lambda_own, double sum_rates, double b) {
    return lambda_own / sum_rates * (1.0 - tail_min(sum_rates, b));
}

double snr_threshold(double target_bps_hz) { return std::exp2(target_bps_hz) - 1.0; }

void check_power_pair(double ps_w, double pw_w) {
    check_finite(ps_w, "ps_w");
    check_finite(pw_w, "pw_w");
    if (ps_w < 0.0 || pw_w < 0.0) {
        throw std::invalid_argument("role powers must be nonnegative");
    }
}

// ---------------------------------------------------------------------------
// Outage classification. All decode events are threshold crossings of the own
// gain g; each bound eps_j below is the gain level where one decode condition
// turns on, and which conditions are reachable depends only on the power
// ratio r = ps/pw.
// ---------------------------------------------------------------------------

struct OutageBounds {
    double eps_own_free = kInf;      // own message alone at power ps (eps_1)
    double eps_own_residual = kInf;  // own message under the weak-power residual (eps_2)
    double eps_weak_role = kInf;     // own message in the weak role (eps_3)
    double eps_cancel = kInf;        // other message decodable for cancellation (eps_4)
};

double positive_ratio_or_inf(double num, double den) {
    if (den <= 0.0) {
        return kInf;
    }
    return num / den;
}

OutageBounds make_bounds(double sigma2, double ps, double pw, double tau_own,
                         double tau_other) {
    OutageBounds b;
    if (ps > 0.0) {
        b.eps_own_free = sigma2 * tau_own / ps;
    }
    b.eps_own_residual = positive_ratio_or_inf(sigma2 * tau_own, ps - pw * tau_own);
    b.eps_weak_role = positive_ratio_or_inf(sigma2 * tau_own, pw - ps * tau_own);
    if (tau_other == 0.0) {
        b.eps_cancel = 0.0;  // nothing to cancel
    } else {
        b.eps_cancel = positive_ratio_or_inf(sigma2 * tau_other, pw - ps * tau_other);
    }
    return b;
}

struct RegionThresholds {
    double free_only = kInf;    // below this ratio the free bound is the binding one
    double cancel_dies = kInf;  // at this ratio cancellation becomes impossible
    double residual_on = 0.0;   // above this ratio the residual bound is finite
    double cancel_vs_residual = kInf;  // where the two surviving bounds cross
    double weak_dies = kInf;    // at this ratio the weak role saturates
};

RegionThresholds make_thresholds(double tau_own, double tau_other) {
    RegionThresholds t;
    t.residual_on = tau_own;
    t.weak_dies = 1.0 / tau_own;
    if (tau_other > 0.0) {
        t.free_only = tau_own / (tau_other * (tau_own + 1.0));
        t.cancel_dies = 1.0 / tau_other;
        t.cancel_vs_residual = tau_own * (tau_other + 1.0) / (tau_other * (tau_own + 1.0));
    }
    return t;
}

// Which bound gates the strong role at power ratio r: 1 = free, 4 = cancel
// then free, 2 = residual without cancellation, 0 = saturated (no gain level
// decodes). The weak role is independently saturated iff r >= weak_dies.
int classify_strong(double r, const RegionThresholds& t) {
    if (r < t.free_only) {
        return 1;
    }
    if (r < t.cancel_dies && (r <= t.residual_on || r <= t.cancel_vs_residual)) {
        return 4;
    }
    if (r > t.residual_on && (r >= t.cancel_dies || r >= t.cancel_vs_residual)) {
        return 2;
    }
    return 0;
}

struct BranchValue {
    double value = 0.0;
    int strong_bound = 0;
    bool weak_saturated = false;
};

BranchValue evaluate_branch(double r, const RegionThresholds& t, const OutageBounds& b,
                            double lambda_own, double sum_rates) {
    BranchValue out;
    out.strong_bound = classify_strong(r, t);
    out.weak_saturated = !(r < t.weak_dies);
    const double ratio = lambda_own / sum_rates;

    double strong_part;
    switch (out.strong_bound) {
        case 1:
            strong_part = 1.0 - prob_larger_between(lambda_own, sum_rates, b.eps_own_free, kInf);
            break;
        case 2:
            strong_part = 1.0 - prob_larger_between(lambda_own, sum_rates, b.eps_own_residual, kInf);
            break;
        case 4:
            // In this ratio region the cancel bound dominates the free bound,
            // and the residual bound sits above it, so cancellation is the
            // pivotal event: above eps_cancel the own message decodes too.
            strong_part = 1.0 - prob_larger_between(lambda_own, sum_rates, b.eps_cancel, kInf);
            break;
        default:
            strong_part = 1.0;  // being the larger never suffices
            break;
    }
    // prob(own is larger) = 1 - ratio, so the strong-role failure mass below
    // works out to strong_part - ratio once the roles are summed.
    double weak_part;
    if (out.weak_saturated) {
        weak_part = ratio;
    } else {
        weak_part = prob_smaller_below(lambda_own, sum_rates, b.eps_weak_role);
    }
    out.value = (strong_part - ratio) + weak_part;
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Ergodic rates
// ---------------------------------------------------------------------------

double ergodic_rate_noma_partial(const UserProfile& own, const UserProfile& other,
                                 double ps_w, double pw_w) {
    check_power_pair(ps_w, pw_w);
    const double sigma2 = shared_noise_w(own, other);
    const double lo = own.lambda_k;
    const double s = own.lambda_k + other.lambda_k;
    const double ratio = lo / s;
    if (ps_w <= 0.0) {
        if (pw_w <= 0.0) {
            return 0.0;
        }
        return -ratio * f_kernel(s * sigma2 / pw_w) * kInvLn2;
    }
    if (pw_w <= 0.0) {
        return (ratio * f_kernel(s * sigma2 / ps_w) - f_kernel(lo * sigma2 / ps_w)) *
               kInvLn2;
    }
    return (ratio * (2.0 * f_kernel(s * sigma2 / ps_w) -
                     f_kernel(s * sigma2 / (ps_w + pw_w))) -
            f_kernel(lo * sigma2 / ps_w)) *
           kInvLn2;
}

double ergodic_rate_oma2_partial(const UserProfile& own, const UserProfile& other,
                                 double ps_w, double pw_w, double alpha_own) {
    check_power_pair(ps_w, pw_w);
    check_finite(alpha_own, "alpha_own");
    if (alpha_own < 0.0 || alpha_own > 1.0) {
        throw std::invalid_argument("alpha_own must lie in [0, 1]");
    }
    if (alpha_own == 0.0) {
        return 0.0;
    }
    const double sigma2 = shared_noise_w(own, other) * alpha_own;
    const double lo = own.lambda_k;
    const double s = own.lambda_k + other.lambda_k;
    const double ratio = lo / s;
    double sum = 0.0;
    if (ps_w > 0.0) {
        sum += ratio * f_kernel(s * sigma2 / ps_w) - f_kernel(lo * sigma2 / ps_w);
    }
    if (pw_w > 0.0) {
        sum += -ratio * f_kernel(s * sigma2 / pw_w);
    }
    return alpha_own * sum * kInvLn2;
}

double ergodic_rate_noma_partial_pw_derivative(const UserProfile& own,
                                               const UserProfile& other, double ps_w,
                                               double pw_w) {
    check_power_pair(ps_w, pw_w);
    const double total = ps_w + pw_w;
    if (total <= 0.0) {
        throw std::invalid_argument("derivative needs positive total power");
    }
    const double sigma2 = shared_noise_w(own, other);
    const double lo = own.lambda_k;
    const double s = own.lambda_k + other.lambda_k;
    const double u = s * sigma2 / total;
    return (lo / s) * f_kernel_derivative(u) * u / total * kInvLn2;
}

bool ergodic_rate_monotone_in_pw_check(Scheme scheme, const UserProfile& own,
                                       const UserProfile& other, double ps_w,
                                       double alpha_own,
                                       std::span<const double> pw_grid) {
    double previous = -kInf;
    for (double pw : pw_grid) {
        double rate;
        if (scheme == Scheme::kNoma) {
            rate = ergodic_rate_noma_partial(own, other, ps_w, pw);
        } else {
            const double alpha = scheme == Scheme::kOma1 ? 0.5 : alpha_own;
            rate = ergodic_rate_oma2_partial(own, other, ps_w, pw, alpha);
        }
        if (rate < previous - 1e-12 * (1.0 + std::abs(previous))) {
            return false;
        }
        previous = rate;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Outage
// ---------------------------------------------------------------------------

PartialOutageResult outage_noma_partial_detail(const UserProfile& own,
                                               const UserProfile& other, double ps_w,
                                               double pw_w, double target_own,
                                               double target_other) {
    check_power_pair(ps_w, pw_w);
    check_nonneg(target_own, "target_own");
    check_nonneg(target_other, "target_other");
    PartialOutageResult result;
    const double tau_own = snr_threshold(target_own);
    const double tau_other = snr_threshold(target_other);
    if (tau_own <= 0.0) {
        result.outage_case = PartialOutageCase::kZeroTarget;
        result.value = 0.0;
        return result;
    }
    if (ps_w + pw_w <= 0.0) {
        result.outage_case = PartialOutageCase::kBothSaturated;
        result.value = 1.0;
        return result;
    }
    const double sigma2 = shared_noise_w(own, other);
    const double lo = own.lambda_k;
    const double s = own.lambda_k + other.lambda_k;
    const OutageBounds bounds = make_bounds(sigma2, ps_w, pw_w, tau_own, tau_other);
    const RegionThresholds thresholds = make_thresholds(tau_own, tau_other);
    const double r = pw_w > 0.0 ? ps_w / pw_w : kInf;

    const BranchValue branch = evaluate_branch(r, thresholds, bounds, lo, s);

    // The outage probability is continuous in the power ratio, so a ratio that
    // sits on a region threshold must give the same value from either side.
    // Evaluate both neighbours with the same bounds and compare.
    const std::array<double, 5> edges = {thresholds.free_only, thresholds.cancel_dies,
                                         thresholds.residual_on,
                                         thresholds.cancel_vs_residual,
                                         thresholds.weak_dies};
    if (std::isfinite(r)) {
        for (double edge : edges) {
            if (!std::isfinite(edge)) {
                continue;
            }
            if (std::abs(r - edge) <= 1e-12 * std::max({1.0, r, edge})) {
                result.near_region_boundary = true;
                const double lo_side = edge * (1.0 - 1e-9) - 1e-18;
                const double hi_side = edge * (1.0 + 1e-9) + 1e-18;
                const BranchValue below =
                    evaluate_branch(lo_side, thresholds, bounds, lo, s);
                const BranchValue above =
                    evaluate_branch(hi_side, thresholds, bounds, lo, s);
                if (std::abs(below.value - above.value) > 1e-9) {
                    throw std::logic_error(
                        "outage value discontinuous across a region boundary");
                }
            }
        }
    }

    result.strong_bound_index = branch.strong_bound;
    if (branch.strong_bound == 0) {
        result.outage_case = branch.weak_saturated ? PartialOutageCase::kBothSaturated
                                                   : PartialOutageCase::kStrongSaturated;
    } else if (!branch.weak_saturated) {
        result.outage_case = PartialOutageCase::kBothBounded;
    } else {
        result.outage_case = branch.strong_bound == 1
                                 ? PartialOutageCase::kWeakSaturatedLowRatio
                                 : PartialOutageCase::kWeakSaturated;
    }
    result.value = std::clamp(branch.value, 0.0, 1.0);
    return result;
}

double outage_noma_partial(const UserProfile& own, const UserProfile& other,
                           double ps_w, double pw_w, double target_own,
                           double target_other) {
    return outage_noma_partial_detail(own, other, ps_w, pw_w, target_own, target_other)
        .value;
}

double outage_oma2_partial(const UserProfile& own, const UserProfile& other,
                           double ps_w, double pw_w, double alpha_own,
                           double target_own) {
    check_power_pair(ps_w, pw_w);
    check_finite(alpha_own, "alpha_own");
    check_nonneg(target_own, "target_own");
    if (target_own <= 0.0) {
        return 0.0;
    }
    if (alpha_own <= 0.0) {
        return 1.0;
    }
    const double sigma2 = shared_noise_w(own, other);
    const double lo = own.lambda_k;
    const double s = own.lambda_k + other.lambda_k;
    const double xi = std::exp2(target_own / alpha_own) - 1.0;
    const double strong_level =
        ps_w > 0.0 ? alpha_own * sigma2 * xi / ps_w : kInf;
    const double weak_level = pw_w > 0.0 ? alpha_own * sigma2 * xi / pw_w : kInf;
    // Outage = P(own is larger and below strong_level) + P(own is smaller and
    // below weak_level); no cancellation event enters here.
    const double part_strong = (1.0 - tail_own(lo, strong_level)) -
                               lo / s * (1.0 - tail_min(s, strong_level));
    const double part_weak = prob_smaller_below(lo, s, weak_level);
    return std::clamp(part_strong + part_weak, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Grid optimizers
// ---------------------------------------------------------------------------

namespace {

struct ScanPoint {
    double objective = -kInf;  // -inf marks an inadmissible point
    double metric1 = 0.0;
    double metric2 = 0.0;
};

struct ScanOutcome {
    PartialPolicy policy;
    double metric1 = 0.0;
    double metric2 = 0.0;
    double objective = -kInf;
    bool found = false;
};

// Maximizes eval(ps, pw, alpha) over a uniform ps grid (pw = pbar - ps) and,
// when with_alpha, a uniform alpha grid; ties keep the earliest point in
// ps-major order. Optionally one refinement pass samples 21 points per
// dimension within one coarse step of the incumbent, replacing it only when
// strictly better.
ScanOutcome scan_policies(
    double pbar_w, const PartialGridOptions& options, bool with_alpha,
    double fixed_alpha,
    const std::function<ScanPoint(double ps, double pw, double alpha)>& eval) {
    if (options.grid_points < 2) {
        throw std::invalid_argument("grid_points must be at least 2");
    }
    const int n = options.grid_points;
    ScanOutcome best;

    auto consider = [&](double ps, double alpha) {
        ps = std::clamp(ps, 0.0, pbar_w);
        alpha = std::clamp(alpha, 0.0, 1.0);
        const double pw = std::max(0.0, pbar_w - ps);
        const ScanPoint point = eval(ps, pw, alpha);
        if (point.objective > best.objective) {
            best.objective = point.objective;
            best.metric1 = point.metric1;
            best.metric2 = point.metric2;
            best.policy = {ps, pw, alpha};
            best.found = true;
        }
    };

    const int alpha_n = with_alpha ? n : 1;
    for (int i = 0; i < n; ++i) {
        const double ps = pbar_w * static_cast<double>(i) / (n - 1);
        for (int j = 0; j < alpha_n; ++j) {
            const double alpha =
                with_alpha ? static_cast<double>(j) / (n - 1) : fixed_alpha;
            consider(ps, alpha);
        }
    }
    if (!best.found || best.objective == -kInf) {
        best.found = false;
        return best;
    }

    if (options.refine) {
        const double ps_step = pbar_w / (n - 1);
        const double alpha_step = with_alpha ? 1.0 / (n - 1) : 0.0;
        const PartialPolicy center = best.policy;
        constexpr int kFine = 21;
        for (int i = 0; i < kFine; ++i) {
            const double ps =
                center.ps_w + ps_step * (2.0 * i / (kFine - 1) - 1.0);
            if (with_alpha) {
                for (int j = 0; j < kFine; ++j) {
                    const double alpha =
                        center.alpha1 + alpha_step * (2.0 * j / (kFine - 1) - 1.0);
                    consider(ps, alpha);
                }
            } else {
                consider(ps, fixed_alpha);
            }
        }
    }
    return best;
}

ScanPoint ergodic_point(const UserProfile& user1, const UserProfile& user2,
                        Scheme scheme, double rbar_prime, bool constrained,
                        double ps, double pw, double alpha) {
    double r1;
    double r2;
    if (scheme == Scheme::kNoma) {
        r1 = ergodic_rate_noma_partial(user1, user2, ps, pw);
        r2 = ergodic_rate_noma_partial(user2, user1, ps, pw);
    } else {
        r1 = ergodic_rate_oma2_partial(user1, user2, ps, pw, alpha);
        r2 = ergodic_rate_oma2_partial(user2, user1, ps, pw, 1.0 - alpha);
    }
    ScanPoint point;
    point.metric1 = r1;
    point.metric2 = r2;
    if (constrained) {
        point.objective =
            (r1 >= rbar_prime && r2 >= rbar_prime) ? r1 + r2 : -kInf;
    } else {
        point.objective = std::min(r1, r2);
    }
    return point;
}

PartialErgodicSolution solve_p1_prime(const UserProfile& user1,
                                      const UserProfile& user2, double pbar_w,
                                      double rbar_prime, Scheme scheme,
                                      const PartialGridOptions& options) {
    check_positive(pbar_w, "pbar_w");
    check_nonneg(rbar_prime, "rbar_prime");
    const bool with_alpha = scheme == Scheme::kOma2;
    auto constrained = [&](double ps, double pw, double alpha) {
        return ergodic_point(user1, user2, scheme, rbar_prime, true, ps, pw, alpha);
    };
    ScanOutcome best = scan_policies(pbar_w, options, with_alpha, 0.5, constrained);
    PartialErgodicSolution solution;
    if (best.found) {
        solution.feasible = true;
    } else {
        // Report the least-infeasible point: the max-min rate policy.
        auto relaxed = [&](double ps, double pw, double alpha) {
            return ergodic_point(user1, user2, scheme, rbar_prime, false, ps, pw,
                                 alpha);
        };
        best = scan_policies(pbar_w, options, with_alpha, 0.5, relaxed);
        solution.feasible = false;
    }
    solution.policy = best.policy;
    solution.r1 = best.metric1;
    solution.r2 = best.metric2;
    solution.esr = best.metric1 + best.metric2;
    return solution;
}

ScanPoint outage_pair_point(const UserProfile& user1, const UserProfile& user2,
                            Scheme scheme, const TargetRates& targets, double ps,
                            double pw, double alpha) {
    double z1;
    double z2;
    if (scheme == Scheme::kNoma) {
        z1 = outage_noma_partial(user1, user2, ps, pw, targets.rbar1,
                                 targets.rbar2);
        z2 = outage_noma_partial(user2, user1, ps, pw, targets.rbar2,
                                 targets.rbar1);
    } else {
        z1 = outage_oma2_partial(user1, user2, ps, pw, alpha, targets.rbar1);
        z2 = outage_oma2_partial(user2, user1, ps, pw, 1.0 - alpha,
                                 targets.rbar2);
    }
    ScanPoint point;
    point.metric1 = z1;
    point.metric2 = z2;
    return point;
}

}  // namespace

PartialErgodicSolution solve_p1_prime_noma(const UserProfile& user1,
                                           const UserProfile& user2, double pbar_w,
                                           double rbar_prime,
                                           const PartialGridOptions& options) {
    return solve_p1_prime(user1, user2, pbar_w, rbar_prime, Scheme::kNoma, options);
}

PartialErgodicSolution solve_p1_prime_oma2(const UserProfile& user1,
                                           const UserProfile& user2, double pbar_w,
                                           double rbar_prime,
                                           const PartialGridOptions& options) {
    return solve_p1_prime(user1, user2, pbar_w, rbar_prime, Scheme::kOma2, options);
}

PartialErgodicSolution solve_p1_prime_oma1(const UserProfile& user1,
                                           const UserProfile& user2, double pbar_w,
                                           double rbar_prime,
                                           const PartialGridOptions& options) {
    return solve_p1_prime(user1, user2, pbar_w, rbar_prime, Scheme::kOma1, options);
}

PartialDltSolution solve_p2_prime(const UserProfile& user1, const UserProfile& user2,
                                  double pbar_w, const TargetRates& targets,
                                  double zetabar_prime, Scheme scheme,
                                  const PartialGridOptions& options) {
    check_positive(pbar_w, "pbar_w");
    check_nonneg(targets.rbar1, "rbar1");
    check_nonneg(targets.rbar2, "rbar2");
    if (!(zetabar_prime >= 0.0 && zetabar_prime <= 1.0)) {
        throw std::invalid_argument("zetabar_prime must lie in [0, 1]");
    }
    const bool with_alpha = scheme == Scheme::kOma2;
    auto constrained = [&](double ps, double pw, double alpha) {
        ScanPoint point = outage_pair_point(user1, user2, scheme, targets, ps, pw, alpha);
        if (point.metric1 <= zetabar_prime && point.metric2 <= zetabar_prime) {
            point.objective = targets.rbar1 * (1.0 - point.metric1) +
                              targets.rbar2 * (1.0 - point.metric2);
        }
        return point;
    };
    ScanOutcome best = scan_policies(pbar_w, options, with_alpha, 0.5, constrained);
    PartialDltSolution solution;
    if (best.found) {
        solution.feasible = true;
    } else {
        auto relaxed = [&](double ps, double pw, double alpha) {
            ScanPoint point =
                outage_pair_point(user1, user2, scheme, targets, ps, pw, alpha);
            point.objective = -std::max(point.metric1, point.metric2);
            return point;
        };
        best = scan_policies(pbar_w, options, with_alpha, 0.5, relaxed);
        solution.feasible = false;
    }
    solution.policy = best.policy;
    solution.outage1 = best.metric1;
    solution.outage2 = best.metric2;
    solution.dlt1 = targets.rbar1 * (1.0 - best.metric1);
    solution.dlt2 = targets.rbar2 * (1.0 - best.metric2);
    solution.sum_dlt = solution.dlt1 + solution.dlt2;
    return solution;
}

PartialMinMaxSolution min_max_outage_partial(const UserProfile& user1,
                                             const UserProfile& user2, double pbar_w,
                                             const TargetRates& targets, Scheme scheme,
                                             const PartialGridOptions& options) {
    check_positive(pbar_w, "pbar_w");
    const bool with_alpha = scheme == Scheme::kOma2;
    auto eval = [&](double ps, double pw, double alpha) {
        ScanPoint point = outage_pair_point(user1, user2, scheme, targets, ps, pw, alpha);
        point.objective = -std::max(point.metric1, point.metric2);
        return point;
    };
    const ScanOutcome best = scan_policies(pbar_w, options, with_alpha, 0.5, eval);
    PartialMinMaxSolution solution;
    solution.policy = best.policy;
    solution.outage1 = best.metric1;
    solution.outage2 = best.metric2;
    solution.max_outage = std::max(best.metric1, best.metric2);
    return solution;
}

}  // namespace noma
