#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sgt/dirichlet.hpp"
#include "sgt/gas.hpp"
#include "sgt/quadrature.hpp"
#include "sgt/rng.hpp"
#include "sgt/spectral.hpp"

using namespace sgt;
using namespace sgt::gas;

namespace {

ThermalParams base_params() {
    ThermalParams p;
    p.beta = 2.0;
    p.mass = 1.0;
    p.coupling_a = 1.0;  // alpha = 1/(4 pi)
    return p;
}

}  // namespace

TEST_CASE("gas weight basics") {
    const ThermalParams p = base_params();
    const cov::CovarianceModel w = cov::make_massive_hadamard_model(p);
    ChargeConfiguration single{{0.1}, {0.2}, {p.coupling_a}};
    CHECK(gas_weight(w, single, p.hbar) == 1.0);
    // two like charges at spacelike separation: H_m > 0 makes the weight < 1
    ChargeConfiguration like{{0.0, 0.1}, {0.0, 1.5}, {p.coupling_a, p.coupling_a}};
    CHECK(gas_weight(w, like, p.hbar) < 1.0);
    // invariant under a global sign flip
    ChargeConfiguration flipped = like;
    for (auto& c : flipped.charges) c = -c;
    CHECK(gas_weight(w, flipped, p.hbar) == doctest::Approx(gas_weight(w, like, p.hbar)));
}

TEST_CASE("cauchy identity n = 1..3") {
    Rng rng(55);
    for (int n = 1; n <= 3; ++n) {
        for (int rep = 0; rep < 60; ++rep) {
            std::vector<Point2> xs, ys;
            for (int i = 0; i < n; ++i) {
                xs.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
                ys.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
            }
            CauchySides sides;
            try {
                sides = cauchy_identity_sides(xs, ys);
            } catch (const PreconditionError&) {
                continue;  // cone-degenerate draw
            }
            CHECK(std::fabs(sides.lhs - sides.rhs) <=
                  1e-10 * std::max(sides.lhs, sides.rhs));
        }
    }
    // permutation of the y list leaves both sides unchanged
    std::vector<Point2> xs = {{0.1, 0.7}, {-0.4, 0.2}};
    std::vector<Point2> ys = {{0.5, -0.3}, {0.8, 0.9}};
    const CauchySides a = cauchy_identity_sides(xs, ys);
    std::swap(ys[0], ys[1]);
    const CauchySides b = cauchy_identity_sides(xs, ys);
    CHECK(a.lhs == doctest::Approx(b.lhs));
    CHECK(a.rhs == doctest::Approx(b.rhs).epsilon(1e-12));
}

TEST_CASE("smatrix coefficients: order zero and one") {
    const ThermalParams p = base_params();
    const CutoffFunction g = characteristic_square(-0.5, 0.5, -0.5, 0.5);
    McConfig cfg;
    cfg.seed = 99;
    cfg.samples = 4000;
    FieldConfiguration zero{};
    const auto s0 = smatrix_coefficient_mc(p, g, 0, zero, cfg);
    CHECK(s0.value.real() == 1.0);
    CHECK(s0.std_error == 0.0);
    // phi = 0, n = 1: |S_1| = (lambda/hbar) integral g
    const auto s1 = smatrix_coefficient_mc(p, g, 1, zero, cfg);
    CHECK(std::abs(s1.value) ==
          doctest::Approx(p.coupling_lambda / p.hbar * g.box_volume()).epsilon(1e-12));
    // pure phase prefactor i^n
    CHECK(s1.value.real() == doctest::Approx(0.0));
}

TEST_CASE("canonical partitions") {
    const ThermalParams p = base_params();
    const cov::CovarianceModel w = cov::make_massive_hadamard_model(p);
    const CutoffFunction g = characteristic_square(-0.5, 0.5, -0.5, 0.5);
    McConfig cfg;
    cfg.seed = 7;
    cfg.samples = 30000;
    const McEstimate z0 = canonical_partition(p, w, g, 0, 0, cfg);
    CHECK(z0.value == 1.0);
    // positivity and neutral-sector dominance with common random numbers
    for (int n : {1, 2}) {
        std::vector<int> qs;
        for (int q = 0; q <= n; ++q) qs.push_back(q);
        const auto zs = canonical_partition_set(p, w, g, n, qs, cfg);
        for (std::size_t i = 0; i < zs.size(); ++i) {
            CHECK(zs[i].value >= -3.0 * zs[i].std_error);
            if (i > 0) {
                const double err = std::hypot(zs[i].std_error, zs[0].std_error);
                CHECK(zs[i].value <= zs[0].value + 3.0 * err);
            }
        }
    }
}

TEST_CASE("grand partition sandwich") {
    const ThermalParams p = base_params();
    const cov::CovarianceModel w = cov::make_massive_hadamard_model(p);
    const CutoffFunction g = characteristic_square(-0.5, 0.5, -0.5, 0.5);
    McConfig cfg;
    cfg.seed = 11;
    cfg.samples = 30000;
    const GrandPartitions gp1 = grand_partitions(p, w, g, 1.0, 4, cfg);
    const GrandPartitions gp2 = grand_partitions(p, w, g, 2.0, 4, cfg);
    // z = 0: all three equal 1
    const GrandPartitions gp0 = grand_partitions(p, w, g, 0.0, 4, cfg);
    CHECK(gp0.xi == doctest::Approx(1.0));
    CHECK(gp0.xi_cosh == doctest::Approx(1.0));
    CHECK(gp0.z_grand == doctest::Approx(1.0));
    // Xi_cosh(g) <= Z <= Xi_cosh(2g) within the common-random-number band
    double err = std::hypot(gp1.xi_cosh_err, gp1.z_err);
    CHECK(gp1.xi_cosh <= gp1.z_grand + 3.0 * err);
    err = std::hypot(gp1.z_err, gp2.xi_cosh_err);
    CHECK(gp1.z_grand <= gp2.xi_cosh + 3.0 * err);
    // Xi <= 2 Xi_cosh
    err = std::hypot(gp1.xi_err, 2.0 * gp1.xi_cosh_err);
    CHECK(gp1.xi <= 2.0 * gp1.xi_cosh + 3.0 * err);
}

TEST_CASE("conditioning: trivial equality and a monotone thermal pair") {
    ThermalParams p = base_params();
    p.coupling_lambda = 0.6;
    const cov::CovarianceModel therm = cov::make_thermal_model(p);
    // equal kernels: every margin is zero
    KernelPair same{therm, therm, [](double, double) { return 0.0; }};
    const CutoffFunction strip = characteristic_square(0.0, p.beta, 0.2, 0.8);
    McConfig cfg;
    cfg.seed = 21;
    cfg.samples = 12000;
    const InequalityReport eq = conditioning_check(p, same, strip, 3, cfg);
    CHECK(eq.all_ok);
    for (const auto& row : eq.rows) CHECK(row.lhs == doctest::Approx(row.rhs));

    // free thermal kernel dominates the two-bond Dirichlet kernel
    const sgt::dirichlet::BondSet bonds = {0, 1};
    cov::CovarianceModel dir{
        "dirichlet01", [p, bonds](double t1, double x1, double t2, double x2) {
            return sgt::dirichlet::gamma_covariance(p, bonds, std::fabs(t1 - t2), x1, x2);
        }};
    // difference diagonal: image contributions at coincident points
    auto diag = [p, bonds](double /*t*/, double x) {
        // (free - interval)(pt, pt): the divergent direct terms cancel and the
        // image sum at u = 0 remains
        const double L = 1.0;
        double d = 0.0;
        for (int n = -8; n <= 8; ++n) {
            if (n != 0) d -= cov::thermal_covariance(p, 0.0, 2.0 * L * n);
            d += cov::thermal_covariance(p, 0.0, 2.0 * (x - bonds[1]) + 2.0 * L * n);
        }
        return d;
    };
    KernelPair pair{therm, dir, diag};
    const InequalityReport rep = conditioning_check(p, pair, strip, 3, cfg);
    CHECK(rep.all_ok);
}

TEST_CASE("inverse conditioning for the thermal / vacuum pair") {
    ThermalParams p = base_params();
    p.coupling_lambda = 0.5;
    // equal-time slice: there the spatial transform of C - C_vac is positive,
    // so the mean-zero form precondition provably holds
    const cov::CovarianceModel therm = cov::make_thermal_model(p);
    const cov::CovarianceModel vac = cov::make_vacuum_model(p);
    const double diag = cov::thermal_vacuum_diagonal(p);
    KernelPair pair{therm, vac, [diag](double, double) { return diag; }};
    const double K = cov::vacuum_limit_bound(p);
    const CutoffFunction strip = characteristic_interval(0.55, -0.5, 0.5);
    McConfig cfg;
    cfg.seed = 23;
    cfg.samples = 12000;
    const InequalityReport rep = inverse_conditioning_check(p, pair, strip, K, 3, cfg);
    CHECK(rep.all_ok);
    // n = 1 analytic: Z_1(w1)/Z_1(w0) <= e^{a^2 hbar K}; Z_1 has no pair term,
    // so the ratio is exactly 1
    CHECK(rep.rows[0].lhs <= rep.rows[0].rhs + 1e-12);
    // K = 0 with equal kernels: equality at every order
    KernelPair same{therm, therm, [](double, double) { return 0.0; }};
    const InequalityReport eq = inverse_conditioning_check(p, same, strip, 0.0, 2, cfg);
    for (const auto& row : eq.rows)
        if (row.name.rfind("Z_", 0) == 0)
            CHECK(row.lhs == doctest::Approx(row.rhs).epsilon(1e-10));
}

TEST_CASE("jensen inequality on a gaussian grid") {
    const ThermalParams p = base_params();
    // thermal-minus-vacuum kernel: positive definite with a finite diagonal,
    // the natural lattice Gaussian of the thermal sector
    const double diag = cov::thermal_vacuum_diagonal(p);
    cov::CovarianceModel vac{
        "thermal_excess", [p, diag](double t1, double x1, double t2, double x2) {
            if (std::fabs(t1 - t2) < 1e-12 && std::fabs(x1 - x2) < 1e-12) return diag;
            return cov::thermal_covariance(p, 0.0, x1 - x2) -
                   cov::vacuum_covariance(p, t1 - t2, x1 - x2);
        }};
    JensenSetup setup;
    for (int i = 0; i < 8; ++i) setup.grid.push_back({0.0, 0.45 * i});
    McConfig cfg;
    cfg.seed = 31;
    cfg.samples = 20000;
    // f linear: equality
    setup.functional = [](const std::vector<double>& f) { return f[0] + 0.5 * f[3]; };
    setup.convex_poly = {0.3, 2.0};  // 0.3 + 2 x
    InequalityReport lin = jensen_check(p, vac, setup, cfg);
    CHECK(lin.rows[0].lhs == doctest::Approx(lin.rows[0].rhs).epsilon(1e-9));
    // f = x^2, G linear: the gap equals Var(G)
    setup.convex_poly = {0.0, 0.0, 1.0};
    InequalityReport sq = jensen_check(p, vac, setup, cfg);
    CHECK(sq.all_ok);
    CHECK(sq.rows[0].rhs - sq.rows[0].lhs > 0.0);
    // truncated exponential of a discretized cosine vertex
    setup.functional = [](const std::vector<double>& f) {
        double v = 0.0;
        for (double fi : f) v += std::cos(fi);
        return v / static_cast<double>(f.size());
    };
    setup.convex_poly = {1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0};
    InequalityReport ex = jensen_check(p, vac, setup, cfg);
    CHECK(ex.all_ok);
}

TEST_CASE("holder translation inequality and cauchy-schwarz") {
    const ThermalParams p = base_params();
    const cov::CovarianceModel w = cov::make_massive_hadamard_model(p);
    McConfig cfg;
    cfg.seed = 41;
    cfg.samples = 20000;
    for (int n : {1, 2, 3}) {
        const InequalityReport rep = holder_translation_check(p, w, n, cfg);
        CHECK(rep.all_ok);
    }
}

TEST_CASE("cauchy cell constant against a nested-quadrature oracle") {
    // J = int int_{[-mu,mu]^2} |v - v'|^{-c}; inner integral analytic,
    // outer by adaptive quadrature; the cell constant is J/2
    const double mu = 1.0;
    for (double c : {0.1, 0.25, 0.5}) {
        auto inner = [&](double vp) {
            return (std::pow(mu - vp, 1.0 - c) + std::pow(mu + vp, 1.0 - c)) / (1.0 - c);
        };
        const QuadResult q = gk_adaptive(inner, -mu, mu, 1e-12);
        REQUIRE(q.converged);
        const double J = q.value;
        CHECK(cauchy_cell_constant(c, mu) == doctest::Approx(J / 2.0).epsilon(1e-10));
    }
    // n = 2 factorization of the per-permutation integral: Monte Carlo check
    Rng rng(77);
    const double c = 0.25;
    double acc = 0.0;
    const int N = 200000;
    for (int s = 0; s < N; ++s) {
        double vx[2], vy[2];
        for (auto& v : vx) v = rng.uniform(-1.0, 1.0);
        for (auto& v : vy) v = rng.uniform(-1.0, 1.0);
        acc += std::pow(std::fabs(vx[0] - vy[0]), -c) * std::pow(std::fabs(vx[1] - vy[1]), -c);
    }
    const double mc = acc / N * 16.0;  // volume of [-1,1]^4
    const double J = 2.0 * cauchy_cell_constant(c, mu);
    CHECK(mc == doctest::Approx(J * J).epsilon(0.02));
}

TEST_CASE("majorant dominates the sampled coefficients") {
    ThermalParams p = base_params();
    p.coupling_lambda = 0.8;
    spectral::WindowFunction win{1.0, 1.0};
    spectral::NullGrid grid{win.extent(), 256};
    const spectral::SpectralSplit split = spectral::k_constant(p, win, grid, 3);
    MajorantParts parts;
    parts.K_kernel = split.K;
    parts.mu = 1.0;
    parts.p_exp = 2.0;
    parts.g_norm_q = std::pow(2.0, 0.5);  // ||char(D_1)||_2, support measure 2
    const CutoffFunction g = characteristic_diamond(1.0);
    McConfig cfg;
    cfg.seed = 51;
    cfg.samples = 40000;
    FieldConfiguration zero{};
    for (int n = 1; n <= 3; ++n) {
        const auto sn = smatrix_coefficient_mc(p, g, n, zero, cfg);
        const double bound = convergence_majorant_term(p, parts, n);
        CHECK(std::abs(sn.value) <= bound + 3.0 * sn.std_error);
    }
    const int thr = majorant_ratio_threshold(p, parts);
    CHECK(thr >= 0);
    // terms decrease beyond the reported threshold
    double prev = convergence_majorant_term(p, parts, thr);
    for (int n = thr + 1; n <= thr + 5; ++n) {
        const double cur = convergence_majorant_term(p, parts, n);
        CHECK(cur <= prev);
        prev = cur;
    }
}

TEST_CASE("volume-factor majorant for square-covered supports") {
    // with g the characteristic function of V unit squares the bound of the
    // small-support theorem applies with mu = 1 and lambda -> lambda V
    ThermalParams p = base_params();
    p.coupling_lambda = 0.7;
    spectral::WindowFunction win{1.0, 1.0};
    spectral::NullGrid grid{win.extent(), 256};
    const auto split = spectral::k_constant(p, win, grid, 3);
    McConfig cfg;
    cfg.seed = 61;
    cfg.samples = 30000;
    for (double vol : {1.0, 2.0, 4.0}) {
        const CutoffFunction g = characteristic_square(0.0, 1.0, 0.0, vol);
        MajorantParts parts;
        parts.K_kernel = split.K;
        parts.mu = 1.0;
        parts.p_exp = 2.0;
        parts.g_norm_q = 1.0;  // ||char([0,1]^2)||_q
        parts.volume_factor = vol;
        for (int n = 1; n <= 3; ++n) {
            const auto sn = smatrix_coefficient_mc(p, g, n, {}, cfg);
            const double bound = convergence_majorant_term(p, parts, n);
            CHECK(std::abs(sn.value) <= bound + 3.0 * sn.std_error);
        }
    }
}

TEST_CASE("variance blow-up diagnostic") {
    // alpha >= 1/2 makes the squared integrand non-integrable; the sampler
    // refuses with the integrability condition in the message
    ThermalParams p;
    p.coupling_a = 2.8;  // alpha = 7.84/(4 pi) ~ 0.62 < 1
    p.validate();
    const cov::CovarianceModel w = cov::make_massive_hadamard_model(p);
    const CutoffFunction g = characteristic_square(-0.5, 0.5, -0.5, 0.5);
    McConfig cfg;
    cfg.samples = 100;
    CHECK_THROWS_AS(cos_power_moment(p, w, g, 2, {}, cfg), PreconditionError);
}

TEST_CASE("smatrix first order with a constant external field") {
    ThermalParams p = base_params();
    p.coupling_lambda = 1.3;
    const CutoffFunction g = characteristic_square(-0.5, 0.5, -0.5, 0.5);
    McConfig cfg;
    cfg.seed = 71;
    cfg.samples = 2000;
    const double phi0 = 0.9;
    FieldConfiguration field{[phi0](double, double) { return phi0; }};
    const auto s1 = smatrix_coefficient_mc(p, g, 1, field, cfg);
    // S_1 = i (lambda/hbar) cos(a phi0) vol(g); exact for a constant field
    const double expect = p.coupling_lambda / p.hbar * std::cos(p.coupling_a * phi0);
    CHECK(s1.value.imag() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(s1.value.real() == doctest::Approx(0.0));
}

TEST_CASE("conditioning through the spectral split: massless + N against massive") {
    // on the diamond the massless kernel plus the negative spectral part
    // dominates the massive kernel: H0 + N - H_m = P >= 0
    ThermalParams p = base_params();
    p.coupling_lambda = 0.5;
    spectral::WindowFunction win{1.0, 1.0};
    spectral::NullGrid grid{win.extent(), 256};
    const auto split = spectral::k_constant(p, win, grid, 3);
    auto n_part = split.n_part;
    cov::CovarianceModel big{"massless_plus_N",
                             [p, n_part](double t1, double x1, double t2, double x2) {
                                 return cov::massless_hadamard(p, t1 - t2, x1 - x2) +
                                        n_part(t1 - t2, x1 - x2);
                             }};
    const cov::CovarianceModel small = cov::make_massive_hadamard_model(p);
    auto diff_diag = [p, n_part](double, double) {
        return spectral::comparison_cone_value(p) + n_part(0.0, 0.0);
    };
    KernelPair pair{big, small, diff_diag};
    const CutoffFunction g = characteristic_diamond(0.9);
    McConfig cfg;
    cfg.seed = 83;
    cfg.samples = 15000;
    const InequalityReport rep = conditioning_check(p, pair, g, 3, cfg);
    CHECK(rep.all_ok);
}
