#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sgt/covariance.hpp"
#include "sgt/mc.hpp"
#include "sgt/params.hpp"

namespace sgt::gas {

// Coulomb-gas microstate: n points with charges in {+a, -a}.
struct ChargeConfiguration {
    std::vector<double> t, x;      // equal length
    std::vector<double> charges;   // each +a or -a
};

// exp( - sum_{i<j} a_i a_j hbar w(x_i, x_j) ); strictly positive.
double gas_weight(const cov::CovarianceModel& w, const ChargeConfiguration& cfg, double hbar);

// Compactly supported cutoff with values in [0, 1].
struct CutoffFunction {
    enum class Kind { CharacteristicInterval, CharacteristicSquare, CharacteristicDiamond, SmoothBump };
    Kind kind = Kind::CharacteristicSquare;
    double t0 = 0.0, t1 = 1.0;  // time extent of the support box
    double x0 = 0.0, x1 = 1.0;  // space extent
    double bump_width = 0.25;   // SmoothBump edge width (inside the box)

    double operator()(double t, double x) const;
    // sampling measure of the support: box area, or the segment length for
    // fixed-time interval cutoffs
    double box_volume() const {
        return kind == Kind::CharacteristicInterval ? (x1 - x0) : (t1 - t0) * (x1 - x0);
    }
    // || g ||_q; closed form (support measure)^(1/q) for characteristic kinds.
    double norm_q(double q) const;
};

CutoffFunction characteristic_square(double t0, double t1, double x0, double x1);
// fixed-time segment {t} x [x0, x1]
CutoffFunction characteristic_interval(double t, double x0, double x1);
// characteristic function of the diamond D_mu = {|t+x|<mu, |t-x|<mu},
// sampled through its bounding box
CutoffFunction characteristic_diamond(double mu);

struct FieldConfiguration {
    std::function<double(double, double)> eval;  // phi(t, x)
    double operator()(double t, double x) const { return eval ? eval(t, x) : 0.0; }
};

// ev_0 of the k-fold cosine vertex power under kernel w, with the external
// field phase; signs enumerated exactly for k <= 6.
ComplexMcEstimate cos_power_moment(const ThermalParams& p, const cov::CovarianceModel& w,
                                   const CutoffFunction& g, int k, const FieldConfiguration& phi,
                                   const McConfig& cfg);

// S-matrix coefficient |route|: (i lambda / hbar)^n / n! times the time-ordered
// vertex moment computed with the real massive kernel.
ComplexMcEstimate smatrix_coefficient_mc(const ThermalParams& p, const CutoffFunction& g, int n,
                                         const FieldConfiguration& phi, const McConfig& cfg);

// Both sides of the Cauchy-determinant identity in null coordinates.
struct CauchySides {
    double lhs = 0.0, rhs = 0.0;
};
struct Point2 {
    double t, x;
};
CauchySides cauchy_identity_sides(std::span<const Point2> xs, std::span<const Point2> ys);

// Z^{2q}_{2n}(w, g): n+q positive and n-q negative charges.
McEstimate canonical_partition(const ThermalParams& p, const cov::CovarianceModel& w,
                               const CutoffFunction& g, int n, int q, const McConfig& cfg);
// Same point stream for several q at once (common random numbers).
std::vector<McEstimate> canonical_partition_set(const ThermalParams& p,
                                                const cov::CovarianceModel& w,
                                                const CutoffFunction& g, int n,
                                                std::span<const int> qs, const McConfig& cfg);

struct GrandPartitions {
    double xi = 0.0, xi_err = 0.0;
    double xi_cosh = 0.0, xi_cosh_err = 0.0;
    double z_grand = 0.0, z_err = 0.0;
    std::vector<McEstimate> cos_moments;  // per order
    std::vector<McEstimate> z_terms;      // Z_n per n
    bool truncation_controlled = true;
};
GrandPartitions grand_partitions(const ThermalParams& p, const cov::CovarianceModel& w,
                                 const CutoffFunction& g, double z, int n_max,
                                 const McConfig& cfg);

// One row of an inequality report: lhs <= rhs within the MC band.
struct InequalityRow {
    std::string name;
    double lhs = 0.0, rhs = 0.0;
    double combined_err = 0.0;
    bool ok = true;
};
struct InequalityReport {
    std::vector<InequalityRow> rows;
    bool all_ok = true;
    void add(const std::string& name, double lhs, double rhs, double err) {
        const bool ok = lhs <= rhs + 3.0 * err;
        rows.push_back({name, lhs, rhs, err, ok});
        all_ok = all_ok && ok;
    }
};

// Kernel pair with an analytic diagonal for the difference big - small
// (pointwise kernel differences stay finite where the kernels themselves
// diverge at coincident points).
struct KernelPair {
    cov::CovarianceModel big, small;
    std::function<double(double, double)> diff_diag;  // (t, x) -> (big-small)(pt, pt)
};

// ev_0(exp_{w_big}) >= ev_0(exp_{w_small}) at truncation order, after the
// discretized PSD precondition on the difference Gram matrix.
InequalityReport conditioning_check(const ThermalParams& p, const KernelPair& pair,
                                    const CutoffFunction& g, int n_max, const McConfig& cfg);

// Z_n(w1, g) <= e^{n a^2 hbar K} Z_n(w0, g) and the grand-canonical
// Xi(w1, g) <= 2 Xi(w0, 2 e^{a^2 hbar K / 2} g); K is the kernel-diagonal
// bound sup (w1 - w0)(x, x) without the hbar factor.
InequalityReport inverse_conditioning_check(const ThermalParams& p, const KernelPair& pair,
                                            const CutoffFunction& g, double K, int n_max,
                                            const McConfig& cfg);

// E[f(G(phi))] >= f(E[G(phi)]) for Gaussian phi with covariance w on a grid.
struct JensenSetup {
    std::vector<Point2> grid;
    std::function<double(const std::vector<double>&)> functional;  // G(phi samples)
    std::vector<double> convex_poly;  // f coefficients, f(x) = sum c_k x^k
};
InequalityReport jensen_check(const ThermalParams& p, const cov::CovarianceModel& w,
                              const JensenSetup& setup, const McConfig& cfg);

// |ev_0(prod A_i)| <= ev_0(|A|^n) for translates A_i of a unit-square vertex
// functional, plus the Cauchy-Schwarz special case.
InequalityReport holder_translation_check(const ThermalParams& p, const cov::CovarianceModel& w,
                                          int n, const McConfig& cfg);

// Closed-form per-permutation cell constant of the determinant bound:
//   C = (2 mu)^(2-c) / ((1-c)(2-c)),  c = alpha * p.
double cauchy_cell_constant(double alpha_p, double mu);

// Assembled convergence majorant for |S_n|:
//   2 (2 mu)^(n alpha) / (n!)^(1-1/p) (2 lambda V e^{a^2 hbar K / 2}/hbar)^n
//     ||g||_q^n C^(n/p)
struct MajorantParts {
    double K_kernel = 0.0;   // spectral-split K (kernel units, no hbar)
    double p_exp = 2.0;      // Hoelder exponent in [1, 1/alpha)
    double mu = 1.0;
    double g_norm_q = 1.0;
    double volume_factor = 1.0;  // V_g of the square covering
};
double convergence_majorant_term(const ThermalParams& p, const MajorantParts& parts, int n);

// Index past which successive majorant terms decrease.
int majorant_ratio_threshold(const ThermalParams& p, const MajorantParts& parts);

}  // namespace sgt::gas
