#pragma once

namespace sgt::special {

// Modified Bessel function K0(z), z > 0. Relative error < 1e-13 over the
// full double range.
double bessel_k0(double z);

// exp(z) * K0(z); stable for large z.
double bessel_k0_scaled(double z);

// Modified Bessel function K1(z), z > 0.
double bessel_k1(double z);
double bessel_k1_scaled(double z);

// Modified Bessel function I0(z).
double bessel_i0(double z);

// Bessel functions of the first and second kind, order zero.
double bessel_j0(double x);
double bessel_y0(double x);  // x > 0

// Sine integral Si(z) = int_0^z sin(t)/t dt.
double sine_integral(double z);

}  // namespace sgt::special
