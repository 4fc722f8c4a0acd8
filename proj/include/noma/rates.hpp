#pragma once

// Per-state rate and outage kernels for the two transmission schemes:
// superposition with SIC at the stronger receiver (NOMA) and orthogonal
// bandwidth splitting (OMA). Everything here is a pure function of one fading
// state; ensemble averaging lives with the callers.
//
// Role convention: the user with the larger normalized gain is "strong"; on an
// exact tie user 1 is treated as strong everywhere.

#include "noma/channel.hpp"

namespace noma {

struct StatePolicy {
    double p1 = 0.0;      // user 1 transmit power (W)
    double p2 = 0.0;      // user 2 transmit power (W)
    double alpha1 = 1.0;  // user 1 bandwidth fraction; OMA only, user 2 gets 1 - alpha1
};

struct TargetRates {
    double rbar1 = 0.0;  // bps/Hz
    double rbar2 = 0.0;
};

struct RatePair {
    double r1 = 0.0;
    double r2 = 0.0;
};

struct OutagePair {
    double x1 = 0.0;  // 1.0 in outage, 0.0 otherwise
    double x2 = 0.0;
};

inline bool user1_is_strong(const FadingState& s) { return s.g1 >= s.g2; }

// Rate at which a receiver with gain g decodes the companion message of power
// p_other while its own signal (power p_own) is still superimposed:
//   log2(1 + p_other g / (p_own g + 1)).
double noma_rate_cross(double p_own, double p_other, double g);

// Superposition rates: the strong user decodes the weak message first and
// cancels it, so it sees an interference-free channel; the weak user treats
// the strong signal as noise.
RatePair noma_rates_full(const StatePolicy& policy, const FadingState& state);

// Orthogonal rates r_k = alpha_k log2(1 + p_k g_k / alpha_k), defined as 0
// when alpha_k = 0.
RatePair oma2_rates_full(const StatePolicy& policy, const FadingState& state);

// Partial-CSIT policy applied to one state: the instantaneously stronger user
// receives power ps, the weaker pw; returns per-user rates.
RatePair noma_rates_partial(double ps, double pw, const FadingState& state);
RatePair oma2_rates_partial(double ps, double pw, double alpha1,
                            const FadingState& state);

// Outage indicators under the decoding chain. The strong user first attempts
// SIC on the weak message at the weak user's target; if that fails it falls
// back to treating the weak signal as noise. The weak user always treats
// interference as noise. Outage is rate strictly below target, so meeting a
// target with equality is NOT an outage.
OutagePair noma_outage_indicators(const StatePolicy& policy, const FadingState& state,
                                  const TargetRates& targets);
OutagePair oma2_outage_indicators(const StatePolicy& policy, const FadingState& state,
                                  const TargetRates& targets);

}  // namespace noma
