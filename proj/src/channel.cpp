#include "noma/channel.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "noma/rng.hpp"
#include "noma/util.hpp"

namespace noma {

double pathloss_db(double distance_km) {
    check_positive(distance_km, "distance_km");
    return 128.1 + 37.6 * std::log10(distance_km);
}

double noise_power(double psd_dbm_per_hz, double bandwidth_hz) {
    check_positive(bandwidth_hz, "bandwidth_hz");
    check_finite(psd_dbm_per_hz, "psd_dbm_per_hz");
    const double total_dbm = psd_dbm_per_hz + 10.0 * std::log10(bandwidth_hz);
    return std::pow(10.0, (total_dbm - 30.0) / 10.0);
}

UserProfile make_user_profile(double distance_km, double psd_dbm_per_hz,
                              double bandwidth_hz) {
    UserProfile p;
    p.distance_km = distance_km;
    p.pathloss_db = pathloss_db(distance_km);
    p.lambda_k = std::pow(10.0, p.pathloss_db / 10.0);
    p.noise_power_w = noise_power(psd_dbm_per_hz, bandwidth_hz);
    return p;
}

FadingEnsemble draw_ensemble(const UserProfile& user1, const UserProfile& user2,
                             std::size_t n, std::uint64_t seed) {
    check_positive(user1.lambda_k, "user1.lambda_k");
    check_positive(user2.lambda_k, "user2.lambda_k");
    check_positive(user1.noise_power_w, "noise_power_w");
    if (user1.noise_power_w != user2.noise_power_w)
        throw std::invalid_argument("draw_ensemble: users must share one noise power");
    if (n == 0) throw std::invalid_argument("draw_ensemble: n must be > 0");

    FadingEnsemble ens;
    ens.states.resize(n);
    ens.seed = seed;
    ens.n = n;
    ens.lambda1 = user1.lambda_k;
    ens.lambda2 = user2.lambda_k;
    ens.sigma2_w = user1.noise_power_w;
    const double inv_sigma2 = 1.0 / ens.sigma2_w;
    for (std::size_t i = 0; i < n; ++i) {
        const double h1 = counter_exponential(seed, 0, i, ens.lambda1);
        const double h2 = counter_exponential(seed, 1, i, ens.lambda2);
        ens.states[i].g1 = h1 * inv_sigma2;
        ens.states[i].g2 = h2 * inv_sigma2;
        if (ens.states[i].g1 == ens.states[i].g2) ++ens.tie_count;
    }
    return ens;
}

namespace {

constexpr char kMagic[8] = {'N', 'O', 'M', 'A', 'E', 'N', 'S', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void save_ensemble(const FadingEnsemble& ens, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_ensemble: cannot open " + path);
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, ens.seed);
    const std::uint64_t n64 = ens.n;
    write_pod(out, n64);
    write_pod(out, ens.lambda1);
    write_pod(out, ens.lambda2);
    write_pod(out, ens.sigma2_w);
    const std::uint64_t ties = ens.tie_count;
    write_pod(out, ties);
    for (const FadingState& s : ens.states) {
        write_pod(out, s.g1);
        write_pod(out, s.g2);
    }
    if (!out) throw std::runtime_error("save_ensemble: write failed for " + path);
}

FadingEnsemble load_ensemble(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_ensemble: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("load_ensemble: bad magic in " + path);
    FadingEnsemble ens;
    std::uint64_t n64 = 0, ties = 0;
    read_pod(in, ens.seed);
    read_pod(in, n64);
    read_pod(in, ens.lambda1);
    read_pod(in, ens.lambda2);
    read_pod(in, ens.sigma2_w);
    read_pod(in, ties);
    if (!in) throw std::runtime_error("load_ensemble: truncated header in " + path);
    ens.n = static_cast<std::size_t>(n64);
    ens.tie_count = static_cast<std::size_t>(ties);
    ens.states.resize(ens.n);
    for (FadingState& s : ens.states) {
        read_pod(in, s.g1);
        read_pod(in, s.g2);
    }
    if (!in) throw std::runtime_error("load_ensemble: truncated payload in " + path);
    return ens;
}

}  // namespace noma
