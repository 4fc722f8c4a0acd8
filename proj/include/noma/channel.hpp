#pragma once

// Two-user downlink channel model: distance-based path loss, thermal noise,
// and Rayleigh block-fading ensembles of normalized channel gains.
//
// Conventions:
//   - |h_k|^2 is exponential with rate lambda_k = 10^(PL_dB/10), i.e. mean
//     10^(-PL_dB/10).
//   - g_k = |h_k|^2 / sigma^2 is the noise-normalized gain actually consumed
//     by the rate formulas; sigma^2 is the same for both users.
//   - User 1 is the near user by convention in shipped configs, but nothing
//     below assumes an ordering.

#include <cstdint>
#include <string>
#include <vector>

namespace noma {

struct UserProfile {
    double distance_km = 0.0;
    double pathloss_db = 0.0;
    double lambda_k = 0.0;       // rate of |h|^2 (1/mean)
    double noise_power_w = 0.0;  // sigma^2 in watts
};

struct FadingState {
    double g1 = 0.0;  // normalized gain of user 1
    double g2 = 0.0;  // normalized gain of user 2
};

struct FadingEnsemble {
    std::vector<FadingState> states;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double sigma2_w = 0.0;
    // States where g1 == g2 exactly; user 1 is then treated as the stronger
    // one by every role-sorting consumer. Tracked purely as a diagnostic.
    std::size_t tie_count = 0;
};

// 128.1 + 37.6 log10(d_km); valid for d > 0.
double pathloss_db(double distance_km);

// Thermal noise in watts for a PSD in dBm/Hz over the given bandwidth.
double noise_power(double psd_dbm_per_hz, double bandwidth_hz);

// Profile for one user at the given distance under the shared link budget.
UserProfile make_user_profile(double distance_km, double psd_dbm_per_hz,
                              double bandwidth_hz);

// Draw an i.i.d. block-fading ensemble of n states for the two profiles.
// Deterministic in (seed, n, profiles); independent of call order.
FadingEnsemble draw_ensemble(const UserProfile& user1, const UserProfile& user2,
                             std::size_t n, std::uint64_t seed);

// Binary round trip with a self-describing header (seed, n, lambda1, lambda2,
// sigma^2). save writes atomically enough for test use; load validates the
// magic, version and payload size.
void save_ensemble(const FadingEnsemble& ens, const std::string& path);
FadingEnsemble load_ensemble(const std::string& path);

}  // namespace noma
