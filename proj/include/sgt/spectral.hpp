#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "sgt/params.hpp"

namespace sgt::spectral {

// Smooth window in difference coordinates: product of two even plateau
// profiles in the null coordinates, identically 1 on D_{2 mu}, supported in
// D_{2 mu + decay_width}.
struct WindowFunction {
    double mu = 1.0;
    double decay_width = 1.0;

    double profile(double s) const;             // 1 for |s| <= 2 mu, 0 beyond
    double operator()(double nu, double nv) const {
        return profile(nu) * profile(nv);
    }
    double extent() const { return 2.0 * mu + decay_width; }
};

// FFT lattice in null coordinates; power-of-two points per axis.
struct NullGrid {
    double extent = 0.0;  // covers [-extent, extent] per axis
    int n = 256;
};

void validate_grid(const WindowFunction& win, const NullGrid& grid);

// Comparison kernel W = (H0_mu - H_m) Omega sampled on the null lattice.
// Nodes and cells on the light cone use the analytic log decomposition:
// the kernel extends continuously with cone value (gamma + log(m mu))/(2 pi).
Eigen::MatrixXd comparison_kernel(const ThermalParams& p, const WindowFunction& win,
                                  const NullGrid& grid);

// Difference kernel as a function of the Lorentzian square x^2 (= -uv).
double comparison_difference(const ThermalParams& p, double lorentz_sq);
double comparison_cone_value(const ThermalParams& p);
// Non-analytic piece -(1/4 pi) log(|x^2|/4) (1 - I0-type factor).
double s0_piece(const ThermalParams& p, double lorentz_sq);

struct SpectralSplit {
    double K = 0.0;           // Richardson-extrapolated || What ||_1
    double K_finest = 0.0;    // finest-grid Riemann value
    double pos_l1 = 0.0;      // || Phat ||_1 on the finest grid
    double neg_l1 = 0.0;      // || Nhat ||_1 on the finest grid
    double parseval_kernel = 0.0;
    double parseval_transform = 0.0;
    double im_ratio = 0.0;    // max |Im| / max |Re| of the transform
    double order = 0.0;       // estimated refinement order
    std::vector<std::pair<double, double>> refinement;  // (h, K(h))
    // negative/positive parts as interpolable kernels of (dt, dx)
    std::function<double(double, double)> n_part;
    std::function<double(double, double)> p_part;
    std::string provenance_json() const;
    double mu = 0.0, decay_width = 0.0, mass = 0.0;
    int base_n = 0;
};

// 2-D FFT of the sampled kernel over >= 3 dyadic refinements with Richardson
// extrapolation of K = || What ||_1.
SpectralSplit k_constant(const ThermalParams& p, const WindowFunction& win, const NullGrid& base,
                         int refinements = 3);

}  // namespace sgt::spectral
