#include "noma/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "noma/util.hpp"

namespace noma {

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::kNoma: return "NOMA";
        case Scheme::kOma1: return "OMA1";
        case Scheme::kOma2: return "OMA2";
    }
    return "?";
}

namespace {

struct Candidate {
    double p1 = 0.0;  // role-sorted or per-user, depending on solver
    double p2 = 0.0;
    double alpha1 = -1.0;
    int index = -1;
};

// Deterministic argmax: larger value, then lower total power, then lower
// candidate index. Exact comparisons on purpose; duplicated candidates
// produce exact float ties.
struct BestTracker {
    double value = -std::numeric_limits<double>::infinity();
    Candidate cand;
    bool valid = false;

    void offer(double v, const Candidate& c) {
        const double total = c.p1 + c.p2;
        const double best_total = cand.p1 + cand.p2;
        if (!valid || v > value ||
            (v == value && (total < best_total ||
                            (total == best_total && c.index < cand.index)))) {
            value = v;
            cand = c;
            valid = true;
        }
    }
};

}  // namespace

SubproblemSolution solve_p1_noma_sub(const FadingState& state, const DualTriple& duals,
                                     double phat_w, double objective_weight) {
    const bool strong1 = user1_is_strong(state);
    const double gs = strong1 ? state.g1 : state.g2;
    const double gw = strong1 ? state.g2 : state.g1;
    const double ws = objective_weight + (strong1 ? duals.delta : duals.mu);
    const double wk = objective_weight + (strong1 ? duals.mu : duals.delta);
    const double lam = duals.lambda;
    const double phat = phat_w;

    // Role-sorted rates: strong decodes free, weak treats interference as noise.
    const auto rates = [&](double ps, double pw) {
        return std::pair<double, double>{log2_1p(ps * gs),
                                         log2_1p(pw * gw / (ps * gw + 1.0))};
    };
    const auto lagr = [&](double ps, double pw) {
        const auto [rs, rw] = rates(ps, pw);
        return ws * rs + wk * rw - lam * (ps + pw);
    };

    BestTracker best;
    const auto offer = [&](double ps, double pw, int idx) {
        Candidate c;
        c.p1 = ps;
        c.p2 = pw;
        c.index = idx;
        best.offer(lagr(ps, pw), c);
    };

    offer(0.0, 0.0, 0);
    offer(0.0, phat, 1);
    offer(phat, 0.0, 2);
    if (lam > 0.0) {
        // Single-user water levels; the vertex candidates cover lambda = 0.
        offer(0.0, std::clamp(wk / (lam * kLn2) - 1.0 / gw, 0.0, phat), 3);
        offer(std::clamp(ws / (lam * kLn2) - 1.0 / gs, 0.0, phat), 0.0, 4);
    }
    if (std::fabs(ws - wk) > 1e-12 * (1.0 + ws + wk)) {
        // Interior split point where the two marginal utilities cross.
        const double q = (wk / gs - ws / gw) / (ws - wk);
        const double qc = std::clamp(q, 0.0, phat);
        offer(qc, phat - qc, 5);
        if (lam > 0.0) {
            const double t = wk / (lam * kLn2) - 1.0 / gw;
            if (q >= 0.0 && t - q >= 0.0 && t <= phat) offer(q, t - q, 6);
        }
    }

    SubproblemSolution sol;
    const double ps = best.cand.p1;
    const double pw = best.cand.p2;
    const auto [rs, rw] = rates(ps, pw);
    sol.p1 = strong1 ? ps : pw;
    sol.p2 = strong1 ? pw : ps;
    sol.alpha1 = -1.0;
    sol.objective = best.value;
    sol.r1 = strong1 ? rs : rw;
    sol.r2 = strong1 ? rw : rs;
    sol.candidate_index = best.cand.index;
    return sol;
}

SubproblemSolution solve_p1_oma2_sub(const FadingState& state, const DualTriple& duals,
                                     double phat_w, double objective_weight) {
    const double w1 = objective_weight + duals.delta;
    const double w2 = objective_weight + duals.mu;
    const double lam = duals.lambda;
    const double phat = phat_w;

    const auto rate = [&](double p, double g, double alpha) {
        return alpha <= 0.0 ? 0.0 : alpha * log2_1p(p * g / alpha);
    };
    const auto lagr = [&](double p1, double p2, double a1) {
        return w1 * rate(p1, state.g1, a1) + w2 * rate(p2, state.g2, 1.0 - a1) -
               lam * (p1 + p2);
    };

    BestTracker best;
    const auto offer = [&](double p1, double p2, double a1, int idx) {
        Candidate c;
        c.p1 = p1;
        c.p2 = p2;
        c.alpha1 = a1;
        c.index = idx;
        best.offer(lagr(p1, p2, a1), c);
    };

    // Single-user candidates: the vertices plus the two water levels.  These
    // cover every optimum whose total power sits strictly inside the peak,
    // because there the value is linear in the band share.
    offer(0.0, 0.0, 0.0, 0);
    offer(0.0, phat, 0.0, 1);
    offer(phat, 0.0, 1.0, 2);
    if (lam > 0.0) {
        const double c2 = w2 / (lam * kLn2) - 1.0 / state.g2;
        if (c2 >= 0.0 && c2 <= phat) offer(0.0, c2, 0.0, 3);
        const double c1 = w1 / (lam * kLn2) - 1.0 / state.g1;
        if (c1 >= 0.0 && c1 <= phat) offer(c1, 0.0, 1.0, 4);
    }

    // On the peak-power face the power term is constant, so a band split
    // between both users can beat every single-user candidate when their
    // full-band weighted rate curves cross.  Exact activation test: the split
    // wins over the vertices iff the tangent of the dominant vertex curve at
    // phat fails to dominate the other curve (both curves are concave, so the
    // tangent is the only line that could separate them).
    const double v1 = w1 * log2_1p(phat * state.g1);
    const double v2 = w2 * log2_1p(phat * state.g2);
    const bool one_dominant = v1 >= v2;
    const double wi = one_dominant ? w1 : w2;
    const double gi = one_dominant ? state.g1 : state.g2;
    const double wj = one_dominant ? w2 : w1;
    const double gj = one_dominant ? state.g2 : state.g1;
    const double slope = wi * gi / ((1.0 + phat * gi) * kLn2);
    if (slope > 0.0 && wj > 0.0) {
        const double uj = wj / (slope * kLn2) - 1.0 / gj;
        const bool face_wins =
            uj > 0.0 &&
            wj * log2_1p(uj * gj) - slope * uj > std::max(v1, v2) - slope * phat;
        if (face_wins) {
            // Equal weighted marginal rates give the inner split in closed
            // form (linear in p1); the maximized face profile is concave in
            // the band share, so a ternary search finds its peak.
            const auto face_p1 = [&](double a) {
                const double num =
                    a * (1.0 - a) * (w1 * state.g1 - w2 * state.g2) +
                    w1 * state.g1 * state.g2 * a * phat;
                const double den =
                    state.g1 * state.g2 * (w1 * a + w2 * (1.0 - a));
                return std::clamp(num / den, 0.0, phat);
            };
            const auto face_value = [&](double a) {
                const double p1 = face_p1(a);
                return lagr(p1, phat - p1, a);
            };
            double a_lo = 0.0, a_hi = 1.0;
            for (int i = 0; i < 120 && a_hi - a_lo > 1e-13; ++i) {
                const double m1 = a_lo + (a_hi - a_lo) / 3.0;
                const double m2 = a_hi - (a_hi - a_lo) / 3.0;
                if (face_value(m1) < face_value(m2)) {
                    a_lo = m1;
                } else {
                    a_hi = m2;
                }
            }
            const double a_face = 0.5 * (a_lo + a_hi);
            const double p1_face = face_p1(a_face);
            offer(p1_face, phat - p1_face, a_face, 5);
        }
    }

    SubproblemSolution sol;
    sol.p1 = best.cand.p1;
    sol.p2 = best.cand.p2;
    sol.alpha1 = best.cand.alpha1;
    sol.objective = best.value;
    sol.r1 = rate(sol.p1, state.g1, sol.alpha1);
    sol.r2 = rate(sol.p2, state.g2, 1.0 - sol.alpha1);
    sol.candidate_index = best.cand.index;
    return sol;
}

SubproblemSolution solve_p1_oma1_sub(const FadingState& state, const DualTriple& duals,
                                     double phat_w, double objective_weight) {
    const double w1 = objective_weight + duals.delta;
    const double w2 = objective_weight + duals.mu;
    const double lam = duals.lambda;
    constexpr double kAlpha = 0.5;

    const auto rate = [&](double p, double g) {
        return kAlpha * log2_1p(p * g / kAlpha);
    };
    const auto lagr = [&](double p1, double p2) {
        return w1 * rate(p1, state.g1) + w2 * rate(p2, state.g2) - lam * (p1 + p2);
    };

    double p1, p2;
    int idx;
    if (lam > 0.0) {
        // Separable water-filling, then the peak-power face if the sum busts it.
        p1 = std::max(kAlpha * (w1 / (lam * kLn2) - 1.0 / state.g1), 0.0);
        p2 = std::max(kAlpha * (w2 / (lam * kLn2) - 1.0 / state.g2), 0.0);
        idx = 0;
    } else {
        p1 = phat_w;  // forces the face search below
        p2 = phat_w;
        idx = 1;
    }
    if (p1 + p2 > phat_w) {
        // Concave in p1 on the face p1 + p2 = phat; derivative is decreasing,
        // bisection on its root.
        const auto deriv = [&](double q1) {
            const double d1 = w1 * state.g1 / ((1.0 + q1 * state.g1 / kAlpha) * kLn2);
            const double q2 = phat_w - q1;
            const double d2 = w2 * state.g2 / ((1.0 + q2 * state.g2 / kAlpha) * kLn2);
            return d1 - d2;
        };
        double lo = 0.0, hi = phat_w;
        if (deriv(lo) <= 0.0) {
            p1 = 0.0;
        } else if (deriv(hi) >= 0.0) {
            p1 = phat_w;
        } else {
            for (int i = 0; i < 100; ++i) {
                const double mid = 0.5 * (lo + hi);
                (deriv(mid) > 0.0 ? lo : hi) = mid;
            }
            p1 = 0.5 * (lo + hi);
        }
        p2 = phat_w - p1;
        idx = 2;
    }

    SubproblemSolution sol;
    sol.p1 = p1;
    sol.p2 = p2;
    sol.alpha1 = kAlpha;
    sol.objective = lagr(p1, p2);
    sol.r1 = rate(p1, state.g1);
    sol.r2 = rate(p2, state.g2);
    sol.candidate_index = idx;
    return sol;
}

std::array<double, 2> p1_noma_lagrangian_gradient(const FadingState& state,
                                                  const DualTriple& duals,
                                                  double ps, double pw,
                                                  double objective_weight) {
    const bool strong1 = user1_is_strong(state);
    const double gs = strong1 ? state.g1 : state.g2;
    const double gw = strong1 ? state.g2 : state.g1;
    const double ws = objective_weight + (strong1 ? duals.delta : duals.mu);
    const double wk = objective_weight + (strong1 ? duals.mu : duals.delta);
    const double lam = duals.lambda;
    const double t = ps + pw;
    // L = ws log2(1+ps gs) + wk [log2(1+t gw) - log2(1+ps gw)] - lam t
    const double dps = ws * gs / ((1.0 + ps * gs) * kLn2) +
                       wk * gw / ((1.0 + t * gw) * kLn2) -
                       wk * gw / ((1.0 + ps * gw) * kLn2) - lam;
    const double dpw = wk * gw / ((1.0 + t * gw) * kLn2) - lam;
    return {dps, dpw};
}

double stationarity_residual_noma(const FadingState& state, const DualTriple& duals,
                                  double ps, double pw, double objective_weight) {
    const auto g = p1_noma_lagrangian_gradient(state, duals, ps, pw, objective_weight);
    return std::fabs(g[0]) + std::fabs(g[1]);
}

namespace {

SubproblemSolution solve_p1_sub(const FadingState& state, const DualTriple& duals,
                                double phat, Scheme scheme, double ow) {
    switch (scheme) {
        case Scheme::kNoma: return solve_p1_noma_sub(state, duals, phat, ow);
        case Scheme::kOma1: return solve_p1_oma1_sub(state, duals, phat, ow);
        case Scheme::kOma2: return solve_p1_oma2_sub(state, duals, phat, ow);
    }
    throw std::logic_error("unknown scheme");
}

}  // namespace

DualEvalResult eval_dual_and_subgradient(const FadingEnsemble& ensemble,
                                         const DualTriple& duals,
                                         const ErgodicProblemSpec& spec, Scheme scheme,
                                         double objective_weight) {
    const std::size_t n = ensemble.states.size();
    std::vector<double> power(n), r1(n), r2(n), lval(n);
    for (std::size_t i = 0; i < n; ++i) {
        const SubproblemSolution s =
            solve_p1_sub(ensemble.states[i], duals, spec.phat_w, scheme, objective_weight);
        power[i] = s.p1 + s.p2;
        r1[i] = s.r1;
        r2[i] = s.r2;
        lval[i] = s.objective;
    }
    DualEvalResult res;
    res.mean_power = pairwise_mean(power);
    res.mean_r1 = pairwise_mean(r1);
    res.mean_r2 = pairwise_mean(r2);
    res.dual_value = pairwise_mean(lval) + duals.lambda * spec.pbar_w -
                     (duals.delta + duals.mu) * spec.rbar_bps_hz;
    res.subgrad = {spec.pbar_w - res.mean_power, res.mean_r1 - spec.rbar_bps_hz,
                   res.mean_r2 - spec.rbar_bps_hz};
    return res;
}

PrimalRecovery recover_primal(const FadingEnsemble& ensemble, const DualTriple& duals,
                              const ErgodicProblemSpec& spec, Scheme scheme,
                              double tol) {
    const DualEvalResult ev = eval_dual_and_subgradient(ensemble, duals, spec, scheme);
    PrimalRecovery rec;
    rec.r1 = ev.mean_r1;
    rec.r2 = ev.mean_r2;
    rec.esr = ev.mean_r1 + ev.mean_r2;
    rec.mean_power = ev.mean_power;
    const double scale_p = 1.0 + spec.pbar_w;
    const double scale_r = 1.0 + spec.rbar_bps_hz;
    rec.max_violation = std::max({(rec.mean_power - spec.pbar_w) / scale_p,
                                  (spec.rbar_bps_hz - rec.r1) / scale_r,
                                  (spec.rbar_bps_hz - rec.r2) / scale_r, 0.0});
    rec.feasible = rec.max_violation <= tol;
    return rec;
}

namespace {

DualTriple from_vec(const Eigen::VectorXd& v) {
    DualTriple d;
    d.lambda = std::max(v[0], 0.0);
    d.delta = std::max(v[1], 0.0);
    d.mu = std::max(v[2], 0.0);
    return d;
}

// The ellipsoid stops within a tolerance of the dual optimum, and the
// per-state argmax is discontinuous in the duals, so the replayed policy can
// land a hair on the wrong side of a constraint. Each constraint has a
// dedicated multiplier whose constraint mean is monotone in that multiplier
// (the dual is convex, so its subgradient coordinate is nondecreasing along
// its own axis). Lifting the multiplier across the violation and bisecting
// back to the boundary restores feasibility at negligible objective cost.
PrimalRecovery repair_recovery(const FadingEnsemble& ensemble, DualTriple& duals,
                               const ErgodicProblemSpec& spec, Scheme scheme) {
    auto recover = [&](const DualTriple& d) {
        return recover_primal(ensemble, d, spec, scheme);
    };
    auto dirty = [&](const PrimalRecovery& r) {
        return r.mean_power > spec.pbar_w || r.r1 < spec.rbar_bps_hz ||
               r.r2 < spec.rbar_bps_hz;
    };
    PrimalRecovery rec = recover(duals);
    for (int round = 0; round < 4 && dirty(rec); ++round) {
        for (int c = 0; c < 3; ++c) {
            double DualTriple::*coord = c == 0   ? &DualTriple::lambda
                                        : c == 1 ? &DualTriple::delta
                                                 : &DualTriple::mu;
            auto clean = [&](const PrimalRecovery& r) {
                switch (c) {
                    case 0: return r.mean_power <= spec.pbar_w;
                    case 1: return r.r1 >= spec.rbar_bps_hz;
                    default: return r.r2 >= spec.rbar_bps_hz;
                }
            };
            if (clean(rec)) continue;
            double lo = duals.*coord;
            double hi = std::max(2.0 * lo, 1.0);
            DualTriple probe = duals;
            PrimalRecovery rec_at_hi;
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
            if (!bracketed) return rec_at_hi;  // constraint unreachable
            for (int k = 0; k < 50; ++k) {
                const double mid = 0.5 * (lo + hi);
                probe.*coord = mid;
                const PrimalRecovery mid_rec = recover(probe);
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

P1Solution solve_p1(const FadingEnsemble& ensemble, const ErgodicProblemSpec& spec,
                    Scheme scheme, const EllipsoidOptions& options) {
    const EllipsoidOracle oracle = [&](const Eigen::VectorXd& x) {
        const DualEvalResult ev =
            eval_dual_and_subgradient(ensemble, from_vec(x), spec, scheme);
        EllipsoidCut cut;
        cut.value = ev.dual_value;
        cut.subgrad = Eigen::Vector3d(ev.subgrad[0], ev.subgrad[1], ev.subgrad[2]);
        return cut;
    };
    // A feasible instance has optimum >= rbar1 + rbar2 = 2 rbar, so any dual
    // value below that (minus slack) certifies infeasibility via weak duality.
    const double floor = 2.0 * spec.rbar_bps_hz;
    const double cutoff = floor - 1e-6 * (1.0 + floor);
    Eigen::VectorXd init(3);
    init << 1.0, 1.0, 1.0;
    P1Solution sol;
    sol.diagnostics = ellipsoid_minimize(oracle, init, options, cutoff);
    sol.duals = from_vec(sol.diagnostics.best_point);
    sol.dual_value = sol.diagnostics.best_value;
    sol.feasible = !sol.diagnostics.cutoff_hit;
    if (sol.feasible) sol.primal = repair_recovery(ensemble, sol.duals, spec, scheme);
    return sol;
}

bool p1_is_feasible(const FadingEnsemble& ensemble, const ErgodicProblemSpec& spec,
                    Scheme scheme, double tol) {
    const double cutoff = -tol * (1.0 + spec.rbar_bps_hz);
    const EllipsoidOracle oracle = [&](const Eigen::VectorXd& x) {
        const DualEvalResult ev =
            eval_dual_and_subgradient(ensemble, from_vec(x), spec, scheme,
                                      /*objective_weight=*/0.0);
        EllipsoidCut cut;
        cut.value = ev.dual_value;
        cut.subgrad = Eigen::Vector3d(ev.subgrad[0], ev.subgrad[1], ev.subgrad[2]);
        return cut;
    };
    Eigen::VectorXd init(3);
    init << 1.0, 1.0, 1.0;
    EllipsoidOptions opts;
    opts.tol = 0.1 * tol;
    const EllipsoidResult res = ellipsoid_minimize(oracle, init, opts, cutoff);
    return !res.cutoff_hit;
}

RmaxResult rmax_bisection(const FadingEnsemble& ensemble, double pbar_w, double phat_w,
                          Scheme scheme, double tol) {
    if (pbar_w <= 0.0) {
        return {0.0, 0};  // no power, no rate
    }
    check_positive(phat_w, "phat_w");
    // Upper bracket: even a genie handing the peak power and the best gain to
    // both users cannot beat E[log2(1 + phat max g)], and the common target is
    // at most half the sum.
    std::vector<double> cap(ensemble.states.size());
    for (std::size_t i = 0; i < ensemble.states.size(); ++i)
        cap[i] = log2_1p(phat_w * std::max(ensemble.states[i].g1, ensemble.states[i].g2));
    double hi = 0.5 * pairwise_mean(cap) + 1.0;
    double lo = 0.0;

    ErgodicProblemSpec spec;
    spec.pbar_w = pbar_w;
    spec.phat_w = phat_w;

    RmaxResult res;
    spec.rbar_bps_hz = hi;
    if (p1_is_feasible(ensemble, spec, scheme)) {  // bracket failed upward; give up high
        res.rmax = hi;
        return res;
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        spec.rbar_bps_hz = mid;
        (p1_is_feasible(ensemble, spec, scheme) ? lo : hi) = mid;
        ++res.iterations;
        if (res.iterations > 200) break;
    }
    res.rmax = lo;
    return res;
}

DominanceConstruction noma_dominates_oma2_construction(
    const FadingEnsemble& ensemble, const std::vector<StatePolicy>& oma2_policies) {
    if (ensemble.states.size() != oma2_policies.size())
        throw std::invalid_argument("dominance construction: policy count mismatch");
    DominanceConstruction out;
    const std::size_t n = ensemble.states.size();
    out.policies.resize(n);
    std::vector<double> r1(n), r2(n);
    for (std::size_t i = 0; i < n; ++i) {
        const StatePolicy& in = oma2_policies[i];
        StatePolicy sp;  // superposition policy, full band
        sp.alpha1 = 1.0;
        if (in.p1 > 0.0 && in.p2 > 0.0) {
            // No exact per-user mapping exists for a genuinely two-user
            // orthogonal state; grant the pooled power to the better channel.
            ++out.fallback_count;
            if (user1_is_strong(ensemble.states[i]))
                sp.p1 = in.p1 + in.p2;
            else
                sp.p2 = in.p1 + in.p2;
        } else {
            sp.p1 = in.p1;
            sp.p2 = in.p2;
        }
        const RatePair r = noma_rates_full(sp, ensemble.states[i]);
        out.policies[i] = sp;
        r1[i] = r.r1;
        r2[i] = r.r2;
    }
    out.r1 = pairwise_mean(r1);
    out.r2 = pairwise_mean(r2);
    return out;
}

}  // namespace noma
