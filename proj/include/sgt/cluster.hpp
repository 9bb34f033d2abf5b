#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "sgt/covariance.hpp"
#include "sgt/dirichlet.hpp"
#include "sgt/mc.hpp"
#include "sgt/params.hpp"

namespace sgt::cluster {

// Integer interval [lo, hi] on the spatial line.
struct Region {
    int lo = 0, hi = 1;
    int volume() const { return hi - lo; }
    bool contains(const Region& o) const { return lo <= o.lo && hi >= o.hi; }
    std::vector<int> cells() const {  // unit cells by their left edge
        std::vector<int> c;
        for (int i = lo; i < hi; ++i) c.push_back(i);
        return c;
    }
    std::vector<int> interior_bonds() const {
        std::vector<int> b;
        for (int i = lo + 1; i < hi; ++i) b.push_back(i);
        return b;
    }
};

void validate_region(const Region& r);

// Localization interval with its bond set. Admissibility for base region Y0:
//   (a) Y0 inside Y, integer endpoints;
//   (b) gamma inside the open interval Y;
//   (c) every interior bond of Y outside the open Y0 belongs to gamma.
struct ClusterTerm {
    Region y;
    std::vector<int> gamma;
};

std::vector<ClusterTerm> enumerate_cluster_terms(const Region& y0, const Region& window,
                                                 std::size_t cap = 200000);

// Piecewise-linear sources on a uniform grid over Sigma_0; zero outside.
struct TestSource {
    double x_left = 0.0;
    double dx = 0.25;
    std::vector<double> psi;
    std::vector<double> psi_prime;

    bool zero() const;
    double x_right() const;
    double psi_at(double x) const;
    double psi_prime_at(double x) const;
    // slope of the piecewise-linear psi_prime on cell k
    int cells() const { return psi.empty() ? 0 : static_cast<int>(psi.size()) - 1; }
};

// Covariance bundle the generating functional consumes: the symmetric
// extension in u, the u-derivative, both position-dependent in general.
struct KernelBundle {
    std::string name;
    std::function<double(double du, double x1, double x2)> val;
    std::function<double(double u, double x1, double x2)> dval_du;
};

KernelBundle thermal_bundle(const ThermalParams& p, double tol = 2e-8);
KernelBundle gamma_bundle(const ThermalParams& p, const dirichlet::BondSet& bonds,
                          double tol = 2e-8);

// Per-charge source factor exp(-a hbar int psi C) exp(+i a hbar int psi' dC/du),
// quadratures by the trapezoid rule on the source grid.
std::complex<double> source_coupling(const ThermalParams& p, const KernelBundle& k,
                                     const TestSource& src, double u_i, double x_i, double a_i);
// its logarithm split: log = -a hbar A + i a hbar B
void source_coupling_parts(const ThermalParams& p, const KernelBundle& k, const TestSource& src,
                           double u_i, double x_i, double& A, double& B);

// Free Gaussian factor of the slice source pair under kernel k:
//   exp(i hbar/2 int psi psi') exp(-hbar/2 [Q_phi(psi) + Q_pi(psi')])
std::complex<double> gaussian_source_factor(const ThermalParams& p, const KernelBundle& k,
                                            const TestSource& src);
double source_quadratic_form_phi(const ThermalParams& p, const KernelBundle& k,
                                 const TestSource& src);
double source_quadratic_form_pi(const ThermalParams& p, const KernelBundle& k,
                                const TestSource& src);

struct TermEstimate {
    std::complex<double> value;
    double std_error = 0.0;
};

// Order-n term of the generating functional on the cell decomposition of
// `region`:  (lambda/hbar)^n / (n! 2^n) int_{[0,beta]^n} du int dX
//   sum_{signs} prod_i source factors  exp(-sum_{i<j} a_i a_j hbar Ctilde).
// Cell tuples carry deterministic seeds keyed by their absolute labels, so
// shared cells are sampled identically across regions and kernels.
TermEstimate generating_term(const ThermalParams& p, const KernelBundle& k, const TestSource& src,
                             const Region& region, int n, const McConfig& cfg);

// per-sample integrand after the exact sign sum (testing hook for the KMS
// symmetry checks)
std::complex<double> signsummed_integrand(const ThermalParams& p, const KernelBundle& k,
                                          const TestSource& src, const std::vector<double>& us,
                                          const std::vector<double>& xs);

struct FZResult {
    std::complex<double> F;
    double F_err = 0.0;
    double Z = 0.0;
    double Z_err = 0.0;
    std::complex<double> ratio;
    double ratio_err = 0.0;
    std::vector<TermEstimate> f_terms, z_terms;
};

// Truncated numerator / denominator and their ratio; F carries the free
// Gaussian source factor, Z is the source-free sum.
FZResult f_and_z(const ThermalParams& p, const KernelBundle& k, const TestSource& src,
                 const Region& region, int n_max, const McConfig& cfg);

struct DecouplingReport {
    struct Row {
        std::string name;
        double lhs, rhs, err;
        bool ok;
    };
    std::vector<Row> rows;
    bool all_ok = true;
};

// Z and F factorization across the connected components of the bond set.
DecouplingReport decoupling_check(const ThermalParams& p, const dirichlet::BondSet& gamma,
                                  const TestSource& src, const Region& region, int n_max,
                                  const McConfig& cfg);

enum class SigmaMode { GaussLegendre, CornerExact };

struct ClusterTermResult {
    ClusterTerm term;
    std::complex<double> sigma_integral;  // int_0^1^Gamma d^Gamma F dsigma
    double sigma_err = 0.0;
    int gl_degree = 0;
    double z_ratio = 0.0;  // Z_{C^{dY}}(Lambda \ Y) / Z(Lambda)
    double z_ratio_err = 0.0;
    std::complex<double> contribution;
    double contribution_err = 0.0;
};

struct ClusterSumResult {
    std::complex<double> value;
    double std_error = 0.0;
    std::vector<ClusterTermResult> table;
};

// The (Y, Gamma) expansion of F/Z over the window; sigma integrals by
// per-bond Gauss-Legendre with degree escalation (or the exact corner
// telescoping for cross-checks).
ClusterSumResult cluster_sum(const ThermalParams& p, const TestSource& src, const Region& y0,
                             const Region& window, int n_max, const McConfig& cfg,
                             SigmaMode mode = SigmaMode::GaussLegendre);

struct ScanRow {
    Region window;
    std::complex<double> value;
    double err = 0.0;
    double gap = 0.0;      // |S_k - S_{k-1}|
    double gap_err = 0.0;
};

struct ScanResult {
    std::vector<ScanRow> rows;
    bool gaps_monotone = true;
    bool converged = false;     // final gap below 5 x its error
    bool inconclusive = false;  // non-monotone beyond the error band
};

// S(Lambda_k) = F/Z over nested windows; cell-keyed seeds make the gaps
// noise-cancelling on shared cells.
ScanResult adiabatic_scan(const ThermalParams& p, const TestSource& src, const Region& y0,
                          const std::vector<Region>& windows, int n_max, const McConfig& cfg);

struct BoundSuiteReport {
    struct Row {
        std::string name;
        double lhs, rhs;
        bool ok;
    };
    std::vector<Row> rows;
    double ratio_rate = 0.0;               // fitted k of |Z_dY/Z| <= e^{k|Y|}
    std::vector<double> k1_by_mass;        // fitted decay rates of the sigma integrals
    std::vector<double> masses;
    bool all_ok = true;
};

BoundSuiteReport bound_suite(const ThermalParams& base, const McConfig& cfg);

// Exact partition-combinatorics checks (n(A) and the partition-sum bound).
struct CombinatoricsReport {
    struct Row {
        std::string name;
        double lhs, rhs;
        bool ok;
    };
    std::vector<Row> rows;
    bool all_ok = true;
    long long partitions_checked = 0;
};

CombinatoricsReport combinatorics_check(int max_gamma, double mass);

// all set partitions of {0..n-1} as lists of blocks (restricted growth)
std::vector<std::vector<std::vector<int>>> set_partitions(int n);

}  // namespace sgt::cluster
