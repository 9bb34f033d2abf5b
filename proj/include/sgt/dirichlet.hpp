#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sgt/covariance.hpp"
#include "sgt/mc.hpp"
#include "sgt/params.hpp"

namespace sgt::dirichlet {

// Strictly increasing set of integer bonds; may be empty.
using BondSet = std::vector<int>;

void validate_bonds(const BondSet& bonds);

// Scalar base kernel f(u, x) that image sums act on; lets the same image
// algebra serve the covariance and its u-derivative.
using BaseKernel = std::function<double(double u, double x)>;

BaseKernel thermal_base(const ThermalParams& p, double tol = 1e-10);
BaseKernel thermal_base_du(const ThermalParams& p, double tol = 1e-10);

// Zero-Dirichlet data at x = b: C(u, x1 - x2) - C(u, x1 + x2 - 2 b) when
// x1, x2 lie on the same side of b, exactly 0 otherwise.
double half_line_covariance(const ThermalParams& p, int b, double u, double x1, double x2,
                            double tol = 1e-10);

struct IntervalEval {
    double value = 0.0;
    double tail_bound = 0.0;
    int images = 0;
};

// Interval (a, b) Dirichlet kernel by the doubly reflected image sum; the
// truncation tail is certified with the exponential decay bound.
IntervalEval interval_covariance(const ThermalParams& p, int a, int b, double u, double x1,
                                 double x2, int n_images = -1, double tol = 1e-10);

// Dispatch across the connected components of R minus the bond set.
double gamma_covariance(const ThermalParams& p, const BondSet& gamma, double u, double x1,
                        double x2, int n_images = -1, double tol = 1e-10);

// Generic-image variants used for d/du kernels.
double half_line_generic(const BaseKernel& base, int b, double u, double x1, double x2);
double interval_generic(const ThermalParams& p, const BaseKernel& base, int a, int b, double u,
                        double x1, double x2, int n_images);
double gamma_generic(const ThermalParams& p, const BaseKernel& base, const BondSet& gamma,
                     double u, double x1, double x2, int n_images, double image_tol = 1e-10);

struct InterpolationVector {
    BondSet active;
    std::vector<double> s;  // one value in [0, 1] per active bond
};

void validate_interpolation(const InterpolationVector& iv, std::size_t max_active = 14);

// Convex combination over subsets of the active window:
//   C(s) = sum_{G subset active} prod_{i in G} s_i prod_{j notin G} (1-s_j) C^{active \ G}.
double interpolated_covariance(const ThermalParams& p, const InterpolationVector& iv, double u,
                               double x1, double x2, int n_images = -1, double tol = 1e-10);
double interpolated_generic(const ThermalParams& p, const BaseKernel& base,
                            const InterpolationVector& iv, double u, double x1, double x2,
                            int n_images);

// Exact mixed partial d^Gamma C(s): the kernel is affine in each s_b, so the
// alternating corner sum is the derivative itself, not an approximation.
double partial_gamma_covariance(const ThermalParams& p, const InterpolationVector& iv,
                                const BondSet& gamma, double u, double x1, double x2,
                                int n_images = -1, double tol = 1e-10);

// Decay certificate for D_Gamma C (paths forced through every bond of Gamma).
struct DGammaReport {
    struct Row {
        double u, x, y;
        double estimate, std_error;
        double bound, margin;
        bool via_reflection;  // exact reflection identity applied
        double reflection_value;
    };
    double c_const = 0.0;  // calibrated constant (2 c_beta at alpha_cut = 1)
    std::vector<Row> rows;
    bool all_ok = true;
};

struct PathPair {
    double u, x, y;
};

DGammaReport dgamma_bound_report(const ThermalParams& p, const BondSet& gamma,
                                 std::span<const PathPair> pairs, const McConfig& cfg);

}  // namespace sgt::dirichlet
