#include "noma/rates.hpp"

#include "noma/util.hpp"

namespace noma {

namespace {

// log2(1 + p g / (q g + 1)): rate under residual interference q.
double tian_rate(double p, double q, double g) {
    return log2_1p(p * g / (q * g + 1.0));
}

double oma_rate(double p, double g, double alpha) {
    if (alpha <= 0.0) return 0.0;
    return alpha * log2_1p(p * g / alpha);
}

// Outage uses a strict comparison (rate exactly at target is served), but a
// policy constructed to meet a target exactly lands within a few ulp of it, so
// the comparison carries a rounding guard rather than a raw <.
bool below_target(double rate, double target) {
    return rate < target - 1e-12 * (1.0 + target);
}

}  // namespace

double noma_rate_cross(double p_own, double p_other, double g) {
    return tian_rate(p_other, p_own, g);
}

RatePair noma_rates_full(const StatePolicy& policy, const FadingState& state) {
    RatePair r;
    if (user1_is_strong(state)) {
        r.r1 = log2_1p(policy.p1 * state.g1);
        r.r2 = tian_rate(policy.p2, policy.p1, state.g2);
    } else {
        r.r2 = log2_1p(policy.p2 * state.g2);
        r.r1 = tian_rate(policy.p1, policy.p2, state.g1);
    }
    return r;
}

RatePair oma2_rates_full(const StatePolicy& policy, const FadingState& state) {
    RatePair r;
    r.r1 = oma_rate(policy.p1, state.g1, policy.alpha1);
    r.r2 = oma_rate(policy.p2, state.g2, 1.0 - policy.alpha1);
    return r;
}

RatePair noma_rates_partial(double ps, double pw, const FadingState& state) {
    StatePolicy policy;
    if (user1_is_strong(state)) {
        policy.p1 = ps;
        policy.p2 = pw;
    } else {
        policy.p1 = pw;
        policy.p2 = ps;
    }
    return noma_rates_full(policy, state);
}

RatePair oma2_rates_partial(double ps, double pw, double alpha1,
                            const FadingState& state) {
    StatePolicy policy;
    policy.alpha1 = alpha1;
    if (user1_is_strong(state)) {
        policy.p1 = ps;
        policy.p2 = pw;
    } else {
        policy.p1 = pw;
        policy.p2 = ps;
    }
    return oma2_rates_full(policy, state);
}

OutagePair noma_outage_indicators(const StatePolicy& policy, const FadingState& state,
                                  const TargetRates& targets) {
    const bool strong1 = user1_is_strong(state);
    const double gs = strong1 ? state.g1 : state.g2;
    const double gw = strong1 ? state.g2 : state.g1;
    const double ps = strong1 ? policy.p1 : policy.p2;
    const double pw = strong1 ? policy.p2 : policy.p1;
    const double rbar_s = strong1 ? targets.rbar1 : targets.rbar2;
    const double rbar_w = strong1 ? targets.rbar2 : targets.rbar1;

    // Strong user: SIC attempt on the weak message, then its own message,
    // either interference-free (SIC succeeded) or with residual interference.
    double xs;
    if (!below_target(noma_rate_cross(ps, pw, gs), rbar_w)) {
        xs = below_target(log2_1p(ps * gs), rbar_s) ? 1.0 : 0.0;
    } else {
        xs = below_target(tian_rate(ps, pw, gs), rbar_s) ? 1.0 : 0.0;
    }
    const double xw = below_target(tian_rate(pw, ps, gw), rbar_w) ? 1.0 : 0.0;

    OutagePair out;
    out.x1 = strong1 ? xs : xw;
    out.x2 = strong1 ? xw : xs;
    return out;
}

OutagePair oma2_outage_indicators(const StatePolicy& policy, const FadingState& state,
                                  const TargetRates& targets) {
    const RatePair r = oma2_rates_full(policy, state);
    OutagePair out;
    out.x1 = below_target(r.r1, targets.rbar1) ? 1.0 : 0.0;
    out.x2 = below_target(r.r2, targets.rbar2) ? 1.0 : 0.0;
    return out;
}

}  // namespace noma
