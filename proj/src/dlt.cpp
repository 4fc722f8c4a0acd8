#include "noma/dlt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "noma/util.hpp"

namespace noma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tie-break for P2 candidates: lower Lagrangian, then fewer served users,
// then lower total power, then lower index. Serving fewer users at equal cost
// keeps the recovered primal conservative about outage.
struct DltTracker {
    DltCandidate best;
    bool has = false;

    void offer(const DltCandidate& cand) {
        if (!std::isfinite(cand.lagrangian)) return;
        if (!has) {
            best = cand;
            has = true;
            return;
        }
        if (cand.lagrangian < best.lagrangian) {
            best = cand;
            return;
        }
        if (cand.lagrangian > best.lagrangian) return;
        const int served_cand = (cand.x1 == 0.0 ? 1 : 0) + (cand.x2 == 0.0 ? 1 : 0);
        const int served_best = (best.x1 == 0.0 ? 1 : 0) + (best.x2 == 0.0 ? 1 : 0);
        if (served_cand < served_best) {
            best = cand;
            return;
        }
        if (served_cand > served_best) return;
        const double pc = cand.p1 + cand.p2;
        const double pb = best.p1 + best.p2;
        if (pc < pb || (pc == pb && cand.candidate_index < best.candidate_index)) {
            best = cand;
        }
    }
};

double snr_threshold(double rbar) { return std::exp2(rbar) - 1.0; }

}  // namespace

DltCandidate solve_p2_noma_sub(const FadingState& state, const DualTriple& duals,
                               const TargetRates& targets, double phat_w,
                               double objective_weight) {
    const bool u1_strong = user1_is_strong(state);
    const double gs = u1_strong ? state.g1 : state.g2;
    const double gw = u1_strong ? state.g2 : state.g1;
    const double rbar_s = u1_strong ? targets.rbar1 : targets.rbar2;
    const double rbar_w = u1_strong ? targets.rbar2 : targets.rbar1;
    // Cost of an outage for each role: the lost target rate plus the dual
    // price of the outage cap.
    const double cost_s =
        objective_weight * rbar_s + (u1_strong ? duals.delta : duals.mu);
    const double cost_w =
        objective_weight * rbar_w + (u1_strong ? duals.mu : duals.delta);
    const double tau_s = snr_threshold(rbar_s);
    const double tau_w = snr_threshold(rbar_w);

    DltTracker tracker;
    auto offer = [&](double ps, double pw, double xs, double xw, int index) {
        DltCandidate cand;
        cand.p1 = u1_strong ? ps : pw;
        cand.p2 = u1_strong ? pw : ps;
        cand.x1 = u1_strong ? xs : xw;
        cand.x2 = u1_strong ? xw : xs;
        cand.lagrangian = cost_s * xs + cost_w * xw + duals.lambda * (ps + pw);
        cand.candidate_index = index;
        tracker.offer(cand);
    };

    // Candidate 0: serve nobody. A zero-target user never counts as in outage.
    offer(0.0, 0.0, rbar_s > 0.0 ? 1.0 : 0.0, rbar_w > 0.0 ? 1.0 : 0.0, 0);

    // Candidate 1: strong only, exact-target power with no interference.
    {
        const double ps = tau_s / gs;
        if (ps <= phat_w) offer(ps, 0.0, 0.0, rbar_w > 0.0 ? 1.0 : 0.0, 1);
    }

    // Candidate 2: weak only. With no strong-user power the weak link is
    // interference free.
    {
        const double pw = tau_w / gw;
        if (pw <= phat_w) offer(0.0, pw, rbar_s > 0.0 ? 1.0 : 0.0, 0.0, 2);
    }

    // Candidate 3: serve both. Strong user decodes its own signal after
    // removing the weak user's (the cross rate at these powers meets the weak
    // target by construction), weak user treats the strong signal as noise.
    {
        const double ps = tau_s / gs;
        const double pw = tau_w * (ps + 1.0 / gw);
        if (ps + pw <= phat_w) offer(ps, pw, 0.0, 0.0, 3);
    }

    DltCandidate out = tracker.best;
    return out;
}

DltCandidate solve_p2_oma2_sub(const FadingState& state, const DualTriple& duals,
                               const TargetRates& targets, double phat_w,
                               double objective_weight, const AlphaSolution* both_served) {
    const double cost_1 = objective_weight * targets.rbar1 + duals.delta;
    const double cost_2 = objective_weight * targets.rbar2 + duals.mu;

    DltTracker tracker;
    auto offer = [&](double p1, double p2, double alpha1, double x1, double x2,
                     int index) {
        DltCandidate cand;
        cand.p1 = p1;
        cand.p2 = p2;
        cand.alpha1 = alpha1;
        cand.x1 = x1;
        cand.x2 = x2;
        cand.lagrangian = cost_1 * x1 + cost_2 * x2 + duals.lambda * (p1 + p2);
        cand.candidate_index = index;
        tracker.offer(cand);
    };

    const double x1_idle = targets.rbar1 > 0.0 ? 1.0 : 0.0;
    const double x2_idle = targets.rbar2 > 0.0 ? 1.0 : 0.0;
    offer(0.0, 0.0, 0.5, x1_idle, x2_idle, 0);

    // Single-user candidates get the whole band.
    {
        const double p1 = snr_threshold(targets.rbar1) / state.g1;
        if (p1 <= phat_w) offer(p1, 0.0, 1.0, 0.0, x2_idle, 1);
    }
    {
        const double p2 = snr_threshold(targets.rbar2) / state.g2;
        if (p2 <= phat_w) offer(0.0, p2, 0.0, x1_idle, 0.0, 2);
    }

    // Both served: optimal bandwidth split at minimum total power.
    {
        AlphaSolution local;
        if (both_served == nullptr) {
            local = solve_alpha_min_power(targets, state.g1, state.g2);
            both_served = &local;
        }
        if (both_served->total <= phat_w) {
            offer(both_served->p1, both_served->p2, both_served->alpha1, 0.0, 0.0, 3);
        }
    }

    return tracker.best;
}

DltCandidate solve_p2_oma1_sub(const FadingState& state, const DualTriple& duals,
                               const TargetRates& targets, double phat_w,
                               double objective_weight) {
    const double cost_1 = objective_weight * targets.rbar1 + duals.delta;
    const double cost_2 = objective_weight * targets.rbar2 + duals.mu;

    DltTracker tracker;
    auto offer = [&](double p1, double p2, double x1, double x2, int index) {
        DltCandidate cand;
        cand.p1 = p1;
        cand.p2 = p2;
        cand.alpha1 = 0.5;
        cand.x1 = x1;
        cand.x2 = x2;
        cand.lagrangian = cost_1 * x1 + cost_2 * x2 + duals.lambda * (p1 + p2);
        cand.candidate_index = index;
        tracker.offer(cand);
    };

    // Fixed half band each; serving decisions remain independent across users.
    const double p1_min = 0.5 * (std::exp2(2.0 * targets.rbar1) - 1.0) / state.g1;
    const double p2_min = 0.5 * (std::exp2(2.0 * targets.rbar2) - 1.0) / state.g2;
    const double x1_idle = targets.rbar1 > 0.0 ? 1.0 : 0.0;
    const double x2_idle = targets.rbar2 > 0.0 ? 1.0 : 0.0;

    offer(0.0, 0.0, x1_idle, x2_idle, 0);
    if (p1_min <= phat_w) offer(p1_min, 0.0, 0.0, x2_idle, 1);
    if (p2_min <= phat_w) offer(0.0, p2_min, x1_idle, 0.0, 2);
    if (p1_min + p2_min <= phat_w) offer(p1_min, p2_min, 0.0, 0.0, 3);

    return tracker.best;
}

AlphaSolution solve_alpha_min_power(const TargetRates& targets, double g1, double g2,
                                    double tol) {
    check_positive(g1, "g1");
    check_positive(g2, "g2");
    const double r1 = targets.rbar1;
    const double r2 = targets.rbar2;

    AlphaSolution out;
    if (r1 <= 0.0 && r2 <= 0.0) {
        out.alpha1 = 0.5;
        return out;
    }
    if (r1 <= 0.0) {
        out.alpha1 = 0.0;
        out.p2 = (std::exp2(r2) - 1.0) / g2;
        out.total = out.p2;
        return out;
    }
    if (r2 <= 0.0) {
        out.alpha1 = 1.0;
        out.p1 = (std::exp2(r1) - 1.0) / g1;
        out.total = out.p1;
        return out;
    }

    // Total power alpha (2^(r1/alpha)-1)/g1 + (1-alpha)(2^(r2/(1-alpha))-1)/g2
    // is convex on (0,1) and blows up at both ends; bisect on the derivative
    //   d/dalpha = [2^(r1/a)(1 - r1 ln2 / a) - 1]/g1
    //            - [2^(r2/(1-a))(1 - r2 ln2 / (1-a)) - 1]/g2.
    auto derivative = [&](double a) {
        const double e1 = r1 / a;
        const double e2 = r2 / (1.0 - a);
        // Near the edges the exponent overflows; the sign is then dominated
        // by the blowing-up side.
        double term1;
        if (e1 * kLn2 > 690.0) {
            term1 = -kInf;
        } else {
            term1 = (std::exp2(e1) * (1.0 - r1 * kLn2 / a) - 1.0) / g1;
        }
        double term2;
        if (e2 * kLn2 > 690.0) {
            term2 = -kInf;
        } else {
            term2 = (std::exp2(e2) * (1.0 - r2 * kLn2 / (1.0 - a)) - 1.0) / g2;
        }
        if (std::isinf(term1) && std::isinf(term2)) return 0.0;
        return term1 - term2;
    };

    double lo = 1e-12;
    double hi = 1.0 - 1e-12;
    for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (derivative(mid) <= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double a = 0.5 * (lo + hi);
    out.alpha1 = a;
    out.p1 = a * (std::exp2(r1 / a) - 1.0) / g1;
    out.p2 = (1.0 - a) * (std::exp2(r2 / (1.0 - a)) - 1.0) / g2;
    out.total = out.p1 + out.p2;
    return out;
}

PowerGap lemma41_power_gap(std::span<const double> gains_desc,
                           std::span<const double> targets) {
    if (gains_desc.size() != targets.size() || gains_desc.empty()) {
        throw std::invalid_argument("lemma41_power_gap: size mismatch or empty");
    }
    for (size_t k = 0; k + 1 < gains_desc.size(); ++k) {
        if (gains_desc[k] < gains_desc[k + 1]) {
            throw std::invalid_argument("lemma41_power_gap: gains must be descending");
        }
    }

    PowerGap out;
    // Superposition: allocate strongest-first; each user's power must clear
    // its SNR threshold over the interference of all earlier (stronger)
    // layers plus its own noise.
    double accumulated = 0.0;
    for (size_t k = 0; k < gains_desc.size(); ++k) {
        check_positive(gains_desc[k], "gain");
        const double tau = snr_threshold(targets[k]);
        const double pk = tau * (accumulated + 1.0 / gains_desc[k]);
        accumulated += pk;
    }
    out.p_noma = accumulated;

    if (gains_desc.size() == 2) {
        TargetRates t;
        t.rbar1 = targets[0];
        t.rbar2 = targets[1];
        const AlphaSolution alpha =
            solve_alpha_min_power(t, gains_desc[0], gains_desc[1]);
        out.p_oma2 = alpha.total;
        out.alpha1 = alpha.alpha1;
    } else {
        throw std::invalid_argument("lemma41_power_gap: orthogonal part needs 2 users");
    }
    return out;
}

std::vector<AlphaSolution> precompute_alpha_solutions(const FadingEnsemble& ensemble,
                                                      const TargetRates& targets) {
    std::vector<AlphaSolution> out;
    out.reserve(ensemble.states.size());
    for (const FadingState& state : ensemble.states) {
        out.push_back(solve_alpha_min_power(targets, state.g1, state.g2));
    }
    return out;
}

DltDualEval eval_dlt_dual_and_subgradient(const FadingEnsemble& ensemble,
                                          const DualTriple& duals,
                                          const DltProblemSpec& spec, Scheme scheme,
                                          double objective_weight,
                                          const std::vector<AlphaSolution>* alpha_cache) {
    const size_t n = ensemble.states.size();
    std::vector<double> lagr(n), power(n), x1(n), x2(n);

    for (size_t i = 0; i < n; ++i) {
        const FadingState& state = ensemble.states[i];
        DltCandidate cand;
        switch (scheme) {
            case Scheme::kNoma:
                cand = solve_p2_noma_sub(state, duals, spec.targets, spec.phat_w,
                                         objective_weight);
                break;
            case Scheme::kOma2:
                cand = solve_p2_oma2_sub(state, duals, spec.targets, spec.phat_w,
                                         objective_weight,
                                         alpha_cache ? &(*alpha_cache)[i] : nullptr);
                break;
            case Scheme::kOma1:
                cand = solve_p2_oma1_sub(state, duals, spec.targets, spec.phat_w,
                                         objective_weight);
                break;
        }
        lagr[i] = cand.lagrangian;
        power[i] = cand.p1 + cand.p2;
        x1[i] = cand.x1;
        x2[i] = cand.x2;
    }

    DltDualEval out;
    const double mean_lagr = pairwise_mean(lagr);
    out.mean_power = pairwise_mean(power);
    out.mean_x1 = pairwise_mean(x1);
    out.mean_x2 = pairwise_mean(x2);
    out.dual_value = objective_weight * (spec.targets.rbar1 + spec.targets.rbar2) +
                     duals.lambda * spec.pbar_w +
                     (duals.delta + duals.mu) * spec.zetabar - mean_lagr;
    out.subgrad[0] = spec.pbar_w - out.mean_power;
    out.subgrad[1] = spec.zetabar - out.mean_x1;
    out.subgrad[2] = spec.zetabar - out.mean_x2;
    return out;
}

DltPrimalRecovery recover_dlt_primal(const FadingEnsemble& ensemble,
                                     const DualTriple& duals, const DltProblemSpec& spec,
                                     Scheme scheme, double tol,
                                     const std::vector<AlphaSolution>* alpha_cache) {
    // Replay the per-state choices under the final duals.
    const size_t n = ensemble.states.size();
    std::vector<double> x1(n), x2(n), power(n);
    for (size_t i = 0; i < n; ++i) {
        const FadingState& state = ensemble.states[i];
        DltCandidate cand;
        switch (scheme) {
            case Scheme::kNoma:
                cand = solve_p2_noma_sub(state, duals, spec.targets, spec.phat_w);
                break;
            case Scheme::kOma2:
                cand = solve_p2_oma2_sub(state, duals, spec.targets, spec.phat_w, 1.0,
                                         alpha_cache ? &(*alpha_cache)[i] : nullptr);
                break;
            case Scheme::kOma1:
                cand = solve_p2_oma1_sub(state, duals, spec.targets, spec.phat_w);
                break;
        }
        x1[i] = cand.x1;
        x2[i] = cand.x2;
        power[i] = cand.p1 + cand.p2;
    }

    DltPrimalRecovery out;
    out.outage1 = pairwise_mean(x1);
    out.outage2 = pairwise_mean(x2);
    out.mean_power = pairwise_mean(power);
    out.dlt1 = spec.targets.rbar1 * (1.0 - out.outage1);
    out.dlt2 = spec.targets.rbar2 * (1.0 - out.outage2);
    out.sum_dlt = out.dlt1 + out.dlt2;

    const double power_violation =
        (out.mean_power - spec.pbar_w) / std::max(1.0, spec.pbar_w);
    const double outage_violation =
        std::max(out.outage1 - spec.zetabar, out.outage2 - spec.zetabar);
    out.max_violation = std::max({power_violation, outage_violation, 0.0});
    out.feasible = out.max_violation <= tol;
    return out;
}

namespace {

// The ellipsoid stops within a tolerance of the dual optimum, and the
// per-state argmin is discontinuous in the duals, so the replayed policy can
// land a hair on the wrong side of a cap. Each cap has a dedicated multiplier
// whose constraint mean is monotone in that multiplier (the dual is convex,
// so its subgradient coordinate is nondecreasing along its own axis). Lifting
// the multiplier across the violation and bisecting back to the boundary
// restores feasibility at negligible cost in the objective.
DltPrimalRecovery repair_dlt_recovery(const FadingEnsemble& ensemble, DualTriple& duals,
                                      const DltProblemSpec& spec, Scheme scheme,
                                      double tol,
                                      const std::vector<AlphaSolution>* alpha_cache) {
    auto recover = [&](const DualTriple& d) {
        return recover_dlt_primal(ensemble, d, spec, scheme, tol, alpha_cache);
    };
    auto dirty = [&](const DltPrimalRecovery& r) {
        return r.mean_power > spec.pbar_w || r.outage1 > spec.zetabar ||
               r.outage2 > spec.zetabar;
    };
    DltPrimalRecovery rec = recover(duals);
    for (int round = 0; round < 4 && dirty(rec); ++round) {
        for (int c = 0; c < 3; ++c) {
            double DualTriple::*coord = c == 0   ? &DualTriple::lambda
                                        : c == 1 ? &DualTriple::delta
                                                 : &DualTriple::mu;
            auto clean = [&](const DltPrimalRecovery& r) {
                switch (c) {
                    case 0: return r.mean_power <= spec.pbar_w;
                    case 1: return r.outage1 <= spec.zetabar;
                    default: return r.outage2 <= spec.zetabar;
                }
            };
            if (clean(rec)) continue;
            double lo = duals.*coord;
            double hi = std::max(2.0 * lo, 1.0);
            DualTriple probe = duals;
            DltPrimalRecovery rec_at_hi;
            bool bracketed = false;
            for (int k = 0; k < 40; ++k) {
                probe.*coord = hi;
                rec_at_hi = recover(probe);
                if (clean(rec_at_hi)) {
                    bracketed = true;
                    break;
                }
                hi *= 2.0;
            }
            if (!bracketed) return rec_at_hi;  // cap unreachable at any price
            for (int k = 0; k < 50; ++k) {
                const double mid = 0.5 * (lo + hi);
                probe.*coord = mid;
                const DltPrimalRecovery mid_rec = recover(probe);
                if (clean(mid_rec)) {
                    hi = mid;
                    rec_at_hi = mid_rec;
                } else {
                    lo = mid;
                }
            }
            duals.*coord = hi;
            rec = rec_at_hi;
        }
    }
    return rec;
}

}  // namespace

P2Solution solve_p2(const FadingEnsemble& ensemble, const DltProblemSpec& spec,
                    Scheme scheme, const EllipsoidOptions& options,
                    const DualTriple* warm_start) {
    check_positive(spec.pbar_w, "pbar_w");
    check_positive(spec.phat_w, "phat_w");
    check_nonneg(spec.targets.rbar1, "rbar1");
    check_nonneg(spec.targets.rbar2, "rbar2");

    std::vector<AlphaSolution> alpha_cache;
    const std::vector<AlphaSolution>* cache_ptr = nullptr;
    if (scheme == Scheme::kOma2) {
        alpha_cache = precompute_alpha_solutions(ensemble, spec.targets);
        cache_ptr = &alpha_cache;
    }

    EllipsoidOracle oracle = [&](const Eigen::VectorXd& point) {
        DualTriple duals{point(0), point(1), point(2)};
        const DltDualEval eval =
            eval_dlt_dual_and_subgradient(ensemble, duals, spec, scheme, 1.0, cache_ptr);
        EllipsoidCut cut;
        cut.value = eval.dual_value;
        cut.subgrad = Eigen::Vector3d(eval.subgrad[0], eval.subgrad[1], eval.subgrad[2]);
        return cut;
    };

    // Every feasible policy has value >= 0, so a dual value below zero
    // certifies infeasibility of the caps.
    const double cutoff = -1e-6;
    Eigen::VectorXd init(3);
    if (warm_start != nullptr) {
        init << std::max(warm_start->lambda, 0.0), std::max(warm_start->delta, 0.0),
            std::max(warm_start->mu, 0.0);
    } else {
        init << 1.0, 1.0, 1.0;
    }
    P2Solution out;
    out.diagnostics = ellipsoid_minimize(oracle, init, options, cutoff);
    out.duals = DualTriple{out.diagnostics.best_point(0), out.diagnostics.best_point(1),
                           out.diagnostics.best_point(2)};
    out.dual_value = out.diagnostics.best_value;
    if (out.diagnostics.cutoff_hit) {
        out.feasible = false;
        return out;
    }
    out.primal = repair_dlt_recovery(ensemble, out.duals, spec, scheme, 1e-3, cache_ptr);
    out.feasible = out.primal.feasible;
    return out;
}

bool p2_is_feasible(const FadingEnsemble& ensemble, const DltProblemSpec& spec,
                    Scheme scheme, double tol) {
    // Homogeneous probe: drop the throughput part of the objective so the dual
    // depends on the constraint system alone; it stays >= 0 for all duals when
    // a feasible policy exists, and is driven below -tol otherwise.
    std::vector<AlphaSolution> alpha_cache;
    const std::vector<AlphaSolution>* cache_ptr = nullptr;
    if (scheme == Scheme::kOma2) {
        alpha_cache = precompute_alpha_solutions(ensemble, spec.targets);
        cache_ptr = &alpha_cache;
    }
    EllipsoidOracle oracle = [&](const Eigen::VectorXd& point) {
        DualTriple duals{point(0), point(1), point(2)};
        const DltDualEval eval = eval_dlt_dual_and_subgradient(ensemble, duals, spec,
                                                               scheme, 0.0, cache_ptr);
        EllipsoidCut cut;
        cut.value = eval.dual_value;
        cut.subgrad = Eigen::Vector3d(eval.subgrad[0], eval.subgrad[1], eval.subgrad[2]);
        return cut;
    };
    const double cutoff = -tol * (1.0 + spec.zetabar);
    Eigen::VectorXd init(3);
    init << 1.0, 1.0, 1.0;
    EllipsoidOptions options;
    options.tol = 0.1 * tol;
    const EllipsoidResult result = ellipsoid_minimize(oracle, init, options, cutoff);
    return !result.cutoff_hit;
}

}  // namespace noma
