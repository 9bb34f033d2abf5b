#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sgt/params.hpp"

namespace sgt::cov {

// Thermal covariance on the strip [0, beta] x R:
//
//   C(u, x) = (1/(2 pi)) int_0^inf dp (1/w_p) cosh((beta/2 - u) w_p)
//                                    / sinh(beta w_p / 2) cos(x p)
//           = (1/beta) sum_n exp(-eps_n |x|) / (2 eps_n) cos(2 pi n u / beta)
//
// with w_p = sqrt(p^2 + m^2) and eps_n = sqrt(m^2 + (2 pi n / beta)^2).
// The 1/(2 pi) front factor is the one fixed by the spectral form of the
// KMS two-point function; it reproduces the vacuum kernel (1/(2 pi)) K0(m r)
// in the beta -> inf limit and makes the two routes above agree identically.

// (1/(2 pi)) K0(m sqrt(u^2 + x^2)); strictly positive off the origin.
double vacuum_covariance(const ThermalParams& p, double u, double x);
double vacuum_covariance_du(const ThermalParams& p, double u, double x);

struct MatsubaraEval {
    double value = 0.0;
    double tail_bound = 0.0;
    int n_terms = 0;
};

// Mode sum truncated at |n| <= n_max; requires x != 0. The tail bound is the
// geometric estimate eps_n >= (m + 2 pi n / beta)/sqrt(2).
MatsubaraEval thermal_matsubara(const ThermalParams& p, double u, double x, int n_max);
MatsubaraEval thermal_matsubara_du(const ThermalParams& p, double u, double x, int n_max);

// Smallest n_max whose certified tail bound is below tol.
int matsubara_terms_for_tol(const ThermalParams& p, double x, double tol);

// Momentum-integral route: vacuum part by K0 plus an adaptive Gauss-Kronrod
// integral of the exponentially damped thermal remainder. Valid for
// u in [0, beta] as long as (u, x) is not a lattice image of the origin.
double thermal_quadrature(const ThermalParams& p, double u, double x, double tol = 1e-11);
double thermal_quadrature_du(const ThermalParams& p, double u, double x, double tol = 1e-11);

// Raw integrand of the defining momentum integral, integrated directly;
// needs interior u (the envelope decays like exp(-min(u, beta-u) p)).
double thermal_quadrature_direct(const ThermalParams& p, double u, double x, double tol = 1e-11);

// Hybrid dispatch: Matsubara when few modes certify the tolerance, else the
// quadrature route. u is folded with the KMS symmetries into [0, beta/2].
double thermal_covariance(const ThermalParams& p, double u, double x, double tol = 1e-10);
double thermal_covariance_du(const ThermalParams& p, double u, double x, double tol = 1e-10);

// Symmetric extension in u: Ctilde(u, x) = C(|u|, x) for |u| <= beta.
double thermal_covariance_periodic(const ThermalParams& p, double du, double x,
                                   double tol = 1e-10);

// Massless kernel -(1/(4 pi)) log|x^2 / (4 mu^2)|, x^2 = -x0^2 + x1^2.
double massless_hadamard(const ThermalParams& p, double x0, double x1);

// Real part of the massive kernel: (1/(2 pi)) K0(m sqrt(x^2)) at spacelike
// separation, -(1/4) Y0(m sqrt(-x^2)) at timelike separation (principal
// branch of the K0(i z) continuation).
double massive_hadamard(const ThermalParams& p, double x0, double x1);

// Uniform-in-u decay certificate |C(u,x)| <= c_beta exp(-m|x|/sqrt(2))/m
// for |x| > alpha_cut, c_beta = (2/beta) / (1 - exp(-(alpha_cut/sqrt 2)(2 pi/beta))).
struct DecayReport {
    struct Row {
        double u, x, value, bound, margin;
    };
    double c_beta = 0.0;
    double alpha_cut = 0.0;
    std::vector<Row> rows;
    bool all_ok = true;
    double min_margin = 0.0;
};
DecayReport decay_bound_report(const ThermalParams& p, double alpha_cut,
                               std::span<const EuclideanPoint> grid);

struct LpNormResult {
    double norm = 0.0;
    double tail_bound = 0.0;
    bool conclusive = true;
};
// ( int |C(u, x)|^pexp dx )^(1/pexp) at fixed interior u; pexp = inf handled
// by a grid maximum when pexp is +infinity.
LpNormResult lp_norm_slice(const ThermalParams& p, double u, double pexp, double tol = 1e-9);

// Uniform bound on C - C_vacuum for u in [0, beta/2], from the mode estimate
// (1/(2 pi)) (2/(beta m)) (1 + 2/(beta m)).
double vacuum_limit_bound(const ThermalParams& p);

// Equal-point thermal-minus-vacuum difference (finite): value of
// (C - C_vac)(0, 0) = (1/pi) int_0^inf dp / (w_p (exp(beta w_p) - 1)).
double thermal_vacuum_diagonal(const ThermalParams& p, double tol = 1e-11);

// Uniform evaluator facade.
enum class CovKind { ThermalQuadrature, ThermalMatsubara, Vacuum, MasslessHadamard, MassiveHadamard };

struct CovarianceEval {
    CovKind kind = CovKind::ThermalQuadrature;
    ThermalParams params;
    int truncation = 64;  // Matsubara order / quadrature refinement cap

    // Thermal/vacuum kinds read (u, x); Hadamard kinds read (x0, x1).
    double operator()(double a, double b) const;
};

// Kernel abstraction consumed by every integrand: K((t1,x1),(t2,x2)).
struct CovarianceModel {
    std::string name;
    std::function<double(double, double, double, double)> eval;
    double operator()(double t1, double x1, double t2, double x2) const {
        return eval(t1, x1, t2, x2);
    }
};

CovarianceModel make_thermal_model(const ThermalParams& p, double tol = 1e-10);
CovarianceModel make_vacuum_model(const ThermalParams& p);
CovarianceModel make_massless_hadamard_model(const ThermalParams& p);
CovarianceModel make_massive_hadamard_model(const ThermalParams& p);

}  // namespace sgt::cov
