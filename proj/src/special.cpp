#include "sgt/special.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "sgt/params.hpp"

namespace sgt::special {

namespace {

#include "bessel_chebyshev.inc"

// Evaluate an n-term Chebyshev series at x in [-1, 1] (SLATEC dcsevl).
double dcsevl(double x, const double* cs, int n) {
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    const double twox = 2.0 * x;
    for (int i = n - 1; i >= 0; --i) {
        b2 = b1;
        b1 = b0;
        b0 = twox * b1 - b2 + cs[i];
    }
    return 0.5 * (b0 - b2);
}

// Term counts chosen for ~1e-16 weighted error (SLATEC initds at this eps).
constexpr int ntbi0 = 12, ntai0 = 23, ntai02 = 25;
constexpr int ntbi1 = 11, ntai1 = 23, ntai12 = 25;
constexpr int ntbk0 = 11, ntak0 = 18, ntak02 = 14;
constexpr int ntbk1 = 11, ntak1 = 18, ntak12 = 14;
constexpr int ntbj0 = 12, ntbm0 = 15, ntbt02 = 16, ntbm02 = 13, ntbth0 = 14;
constexpr int ntby0 = 13;

double dbsi0e(double x) {
    const double y = std::fabs(x);
    if (y <= 3.0) return std::exp(-y) * (2.75 + dcsevl(y * y / 4.5 - 1.0, bi0cs, ntbi0));
    if (y <= 8.0) return (0.375 + dcsevl((48.0 / y - 11.0) / 5.0, ai0cs, ntai0)) / std::sqrt(y);
    return (0.375 + dcsevl(16.0 / y - 1.0, ai02cs, ntai02)) / std::sqrt(y);
}

double dbesi0(double x) {
    const double y = std::fabs(x);
    if (y <= 3.0) return 2.75 + dcsevl(y * y / 4.5 - 1.0, bi0cs, ntbi0);
    return std::exp(y) * dbsi0e(x);
}

double dbsi1e(double x) {
    const double y = std::fabs(x);
    if (y <= 3.0) return std::exp(-y) * x * (0.875 + dcsevl(y * y / 4.5 - 1.0, bi1cs, ntbi1));
    double r;
    if (y <= 8.0)
        r = (0.375 + dcsevl((48.0 / y - 11.0) / 5.0, ai1cs, ntai1)) / std::sqrt(y);
    else
        r = (0.375 + dcsevl(16.0 / y - 1.0, ai12cs, ntai12)) / std::sqrt(y);
    return x > 0.0 ? r : -r;
}

double dbesi1(double x) {
    const double y = std::fabs(x);
    if (y == 0.0) return 0.0;
    if (y <= 3.0) return x * (0.875 + dcsevl(y * y / 4.5 - 1.0, bi1cs, ntbi1));
    return std::exp(y) * dbsi1e(x);
}

double dbsk0e(double x) {
    if (x <= 2.0) {
        const double y = x * x;
        return std::exp(x) *
               (-std::log(0.5 * x) * dbesi0(x) - 0.25 + dcsevl(0.5 * y - 1.0, bk0cs, ntbk0));
    }
    if (x <= 8.0) return (dcsevl((16.0 / x - 5.0) / 3.0, ak0cs, ntak0) + 1.25) / std::sqrt(x);
    return (dcsevl(16.0 / x - 1.0, ak02cs, ntak02) + 1.25) / std::sqrt(x);
}

double dbsk1e(double x) {
    if (x <= 2.0) {
        const double y = x * x;
        return std::exp(x) * (std::log(0.5 * x) * dbesi1(x) +
                              (0.75 + dcsevl(0.5 * y - 1.0, bk1cs, ntbk1)) / x);
    }
    if (x <= 8.0) return (dcsevl((16.0 / x - 5.0) / 3.0, ak1cs, ntak1) + 1.25) / std::sqrt(x);
    return (dcsevl(16.0 / x - 1.0, ak12cs, ntak12) + 1.25) / std::sqrt(x);
}

// Amplitude/phase of J0, Y0 for x > 4 (SLATEC d9b0mp).
void d9b0mp(double x, double& ampl, double& theta) {
    const double pi4 = 0.785398163397448309615660845819876;
    if (x <= 8.0) {
        const double z = (128.0 / (x * x) - 5.0) / 3.0;
        ampl = (0.75 + dcsevl(z, bm0cs, ntbm0)) / std::sqrt(x);
        theta = x - pi4 + dcsevl(z, bt02cs, ntbt02) / x;
    } else {
        const double z = 128.0 / (x * x) - 1.0;
        ampl = (0.75 + dcsevl(z, bm02cs, ntbm02)) / std::sqrt(x);
        theta = x - pi4 + dcsevl(z, bth0cs, ntbth0) / x;
    }
}

}  // namespace

double bessel_i0(double z) { return dbesi0(z); }

double bessel_k0(double z) {
    if (!(z > 0.0)) throw std::domain_error("bessel_k0: argument must be > 0");
    if (z <= 2.0) {
        const double y = z * z;
        return -std::log(0.5 * z) * dbesi0(z) - 0.25 + dcsevl(0.5 * y - 1.0, bk0cs, ntbk0);
    }
    if (z > 700.0) return 0.0;  // underflow
    return std::exp(-z) * dbsk0e(z);
}

double bessel_k0_scaled(double z) {
    if (!(z > 0.0)) throw std::domain_error("bessel_k0_scaled: argument must be > 0");
    return dbsk0e(z);
}

double bessel_k1(double z) {
    if (!(z > 0.0)) throw std::domain_error("bessel_k1: argument must be > 0");
    if (z <= 2.0) {
        const double y = z * z;
        return std::log(0.5 * z) * dbesi1(z) + (0.75 + dcsevl(0.5 * y - 1.0, bk1cs, ntbk1)) / z;
    }
    if (z > 700.0) return 0.0;
    return std::exp(-z) * dbsk1e(z);
}

double bessel_k1_scaled(double z) {
    if (!(z > 0.0)) throw std::domain_error("bessel_k1_scaled: argument must be > 0");
    return dbsk1e(z);
}

double bessel_j0(double x) {
    const double y = std::fabs(x);
    if (y <= 4.0) {
        if (y < 1e-150) return 1.0;
        return dcsevl(0.125 * y * y - 1.0, bj0cs, ntbj0);
    }
    double a, t;
    d9b0mp(y, a, t);
    return a * std::cos(t);
}

double bessel_y0(double x) {
    if (!(x > 0.0)) throw std::domain_error("bessel_y0: argument must be > 0");
    if (x <= 4.0) {
        const double twodpi = 0.636619772367581343075535053490057;
        return twodpi * std::log(0.5 * x) * bessel_j0(x) + 0.375 +
               dcsevl(0.125 * x * x - 1.0, by0cs, ntby0);
    }
    double a, t;
    d9b0mp(x, a, t);
    return a * std::sin(t);
}

namespace {

// E1(z) by modified Lentz continued fraction; valid for |arg z| < pi.
std::complex<double> expint_e1_cf(std::complex<double> z) {
    const double tiny = 1e-290;
    std::complex<double> b = z + 1.0;
    std::complex<double> c = 1.0 / tiny;
    std::complex<double> d = 1.0 / b;
    std::complex<double> h = d;
    for (int i = 1; i <= 400; ++i) {
        const double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const std::complex<double> del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-17) break;
    }
    return std::exp(-z) * h;
}

}  // namespace

double sine_integral(double z) {
    if (z < 0.0) return -sine_integral(-z);
    if (z == 0.0) return 0.0;
    if (z <= 4.0) {
        // Si(z) = sum (-1)^k z^(2k+1) / ((2k+1)(2k+1)!)
        double term = z, sum = z;
        const double z2 = z * z;
        for (int k = 1; k <= 40; ++k) {
            term *= -z2 / ((2.0 * k) * (2.0 * k + 1.0));
            const double contrib = term / (2.0 * k + 1.0);
            sum += contrib;
            if (std::fabs(contrib) < 1e-18 * std::fabs(sum)) break;
        }
        return sum;
    }
    // Si(x) = pi/2 + Im E1(ix)
    const std::complex<double> e1 = expint_e1_cf(std::complex<double>(0.0, z));
    return 0.5 * kPi + e1.imag();
}

}  // namespace sgt::special
