#pragma once

// Exponential-integral machinery shared by every closed-form ergodic-rate
// expression in the library.
//
// expint_e1(x) = E1(x) = int_x^inf e^-t / t dt, x > 0.
// f_kernel(x)  = -e^x E1(x); this combination is what the Rayleigh-average
//                of log(1 + c/X) style integrals produce, and evaluating it
//                fused avoids the e^-x underflow / e^x overflow round trip
//                that the separate factors hit for x beyond ~700.

namespace noma {

// Relative accuracy target ~1e-14; contract is <= 1e-12 relative error.
// Throws std::domain_error for x <= 0 or NaN.
double expint_e1(double x);

// f_kernel(x) in (-log(1 + 1/x), 0) for all x > 0, increasing, -> 0 as x -> inf.
// Throws std::domain_error for x <= 0 or NaN; +infinity is accepted and maps
// to the limit 0 so policy edge cases (zero power => infinite argument) fold
// into the general formulas.
double f_kernel(double x);

// Derivative d f_kernel / dx = 1/x + f_kernel(x); positive for x > 0.
double f_kernel_derivative(double x);

}  // namespace noma
