#include "noma/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace noma {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240;

// Power series around 0, reliable for 0 < x <= 1:
//   E1(x) = -gamma - ln x + sum_{k>=1} (-1)^(k+1) x^k / (k * k!)
double e1_series(double x) {
    double term = x;  // k = 1
    double sum = x;
    for (int k = 2; k <= 64; ++k) {
        term *= -x * static_cast<double>(k - 1) / (static_cast<double>(k) * k);
        sum += term;
        if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
    }
    return -kEulerGamma - std::log(x) + sum;
}

// Modified Lentz evaluation of the continued fraction
//   x + 1 - 1^2/(x + 3 - 2^2/(x + 5 - ...))
// whose reciprocal equals e^x E1(x). Reliable for x >= 1.
double scaled_e1_lentz(double x) {
    constexpr double tiny = 1e-300;
    constexpr int min_levels = 30;
    double f = x + 1.0;
    if (f == 0.0) f = tiny;
    double c = f;
    double d = 0.0;
    for (int n = 1; n <= 200; ++n) {
        const double an = -static_cast<double>(n) * n;
        const double bn = x + 2.0 * n + 1.0;
        d = bn + an * d;
        if (d == 0.0) d = tiny;
        c = bn + an / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (n >= min_levels && std::fabs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 / f;  // = e^x E1(x)
}

void check_domain(double x, const char* fn) {
    if (std::isnan(x) || x <= 0.0)
        throw std::domain_error(std::string(fn) + ": argument must be > 0");
}

}  // namespace

double expint_e1(double x) {
    check_domain(x, "expint_e1");
    if (std::isinf(x)) return 0.0;
    if (x <= 1.0) return e1_series(x);
    // exp(-x) underflows to 0 beyond ~745; the true value is below DBL_MIN there.
    return std::exp(-x) * scaled_e1_lentz(x);
}

double f_kernel(double x) {
    check_domain(x, "f_kernel");
    if (std::isinf(x)) return 0.0;
    if (x <= 1.0) return -std::exp(x) * e1_series(x);
    return -scaled_e1_lentz(x);  // fused: no exp(-x)*exp(x) round trip
}

double f_kernel_derivative(double x) {
    check_domain(x, "f_kernel_derivative");
    if (std::isinf(x)) return 0.0;
    return 1.0 / x + f_kernel(x);
}

}  // namespace noma
