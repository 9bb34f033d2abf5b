#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "sgt/covariance.hpp"
#include "sgt/quadrature.hpp"
#include "sgt/special.hpp"
#include "sgt/spectral.hpp"

using namespace sgt;
using namespace sgt::spectral;

namespace {

ThermalParams params(double m, double mu) {
    ThermalParams p;
    p.mass = m;
    p.mu_scale = mu;
    return p;
}

}  // namespace

TEST_CASE("window profile invariants") {
    WindowFunction win{1.0, 0.8};
    for (double s : {-1.9, -0.5, 0.0, 1.3, 1.999}) CHECK(win.profile(s) == 1.0);
    for (double s : {2.81, 3.5, -4.0}) CHECK(win.profile(s) == 0.0);
    for (double s : {2.2, 2.5, -2.6}) {
        CHECK(win.profile(s) > 0.0);
        CHECK(win.profile(s) < 1.0);
        CHECK(win.profile(s) == win.profile(-s));
    }
}

TEST_CASE("comparison kernel symmetry, support and cone continuity") {
    const ThermalParams p = params(0.9, 1.0);
    WindowFunction win{1.0, 1.0};
    NullGrid grid{win.extent(), 256};
    const Eigen::MatrixXd W = comparison_kernel(p, win, grid);
    const int n = grid.n;
    // even under x -> -x (lattice symmetry away from the wrap row)
    for (int j = 1; j < n; j += 17)
        for (int l = 1; l < n; l += 13)
            CHECK(W(j, l) == doctest::Approx(W(n - j, n - l)).epsilon(1e-12));
    // vanishes (to the smooth-bump tail) at the support edge, exactly beyond
    CHECK(std::fabs(W(1, 1)) < 1e-25);
    CHECK(std::fabs(W(1, n - 2)) < 1e-25);
    CHECK(win(win.extent() + 0.01, 0.5) == 0.0);
    // value extends continuously across the cone
    const double cone = comparison_cone_value(p);
    for (double s : {1e-6, -1e-6, 1e-9, -1e-9})
        CHECK(comparison_difference(p, s) == doctest::Approx(cone).epsilon(1e-4));
    // comparison_difference against direct kernel evaluation off the cone
    ThermalParams pc = p;
    for (double nu : {0.4, -0.8})
        for (double nv : {0.3, 0.9}) {
            const double s = -nu * nv;
            const double t = (nu + nv) / 2.0, x = (nv - nu) / 2.0;
            const double direct =
                cov::massless_hadamard(pc, t, x) - cov::massive_hadamard(pc, t, x);
            CHECK(comparison_difference(p, s) == doctest::Approx(direct).epsilon(1e-10));
        }
}

TEST_CASE("small-x^2 behavior of the non-analytic piece") {
    const ThermalParams p = params(1.3, 1.0);
    // 1 - I0(m sqrt(x^2)) ~ -(m^2 x^2 / 4): the s0 piece approaches
    // (m^2/(16 pi)) x^2 log(|x^2|/4)
    for (double s : {1e-4, -1e-4, 1e-6, -1e-6}) {
        const double lead = (p.mass * p.mass / (16.0 * kPi)) * s * std::log(std::fabs(s) / 4.0);
        CHECK(s0_piece(p, s) / lead == doctest::Approx(1.0).epsilon(2e-2));
    }
    // remainder after removing s0 is C^1 across the cone: the two-sided gap
    // shrinks linearly with the offset
    auto gap = [&](double eps) {
        return std::fabs((comparison_difference(p, eps) - s0_piece(p, eps)) -
                         (comparison_difference(p, -eps) - s0_piece(p, -eps)));
    };
    CHECK(gap(1e-6) < 1e-5);
    CHECK(gap(1e-4) / gap(1e-5) == doctest::Approx(10.0).epsilon(0.1));
}

TEST_CASE("1-D log transform closed form (sine integral)") {
    // (1/sqrt(2 pi)) int_{-b}^{b} v log|v/b| e^{i k v} dv
    //   = i sqrt(2/pi) (sin(b k) - Si(b k)) / k^2
    const double b = 1.5;
    for (double k : {0.7, 2.3, 5.0, 11.0}) {
        auto fr = [&](double v) { return v * std::log(std::fabs(v) / b) * std::cos(k * v); };
        auto fi = [&](double v) { return v * std::log(std::fabs(v) / b) * std::sin(k * v); };
        const double re =
            (gk_adaptive(fr, -b, 0.0, 1e-12, 20000).value + gk_adaptive(fr, 0.0, b, 1e-12, 20000).value) /
            std::sqrt(2.0 * kPi);
        const double im =
            (gk_adaptive(fi, -b, 0.0, 1e-12, 20000).value + gk_adaptive(fi, 0.0, b, 1e-12, 20000).value) /
            std::sqrt(2.0 * kPi);
        const double closed =
            std::sqrt(2.0 / kPi) * (std::sin(b * k) - special::sine_integral(b * k)) / (k * k);
        CHECK(std::fabs(re) < 1e-10);
        CHECK(im == doctest::Approx(closed).epsilon(1e-8));
    }
}

TEST_CASE("k_constant splits, Parseval, reality") {
    const ThermalParams p = params(1.0, 1.0);
    WindowFunction win{1.0, 1.0};
    NullGrid base{win.extent(), 256};
    const SpectralSplit split = k_constant(p, win, base, 3);
    CHECK(split.K > 0.0);
    CHECK(split.im_ratio < 1e-8);
    // disjoint supports: exact additivity of the split
    CHECK(split.pos_l1 + split.neg_l1 == doctest::Approx(split.K_finest).epsilon(1e-10));
    CHECK(split.neg_l1 <= split.K_finest + 1e-12);
    CHECK(split.parseval_kernel ==
          doctest::Approx(split.parseval_transform).epsilon(1e-8));
    // refinement monotone
    REQUIRE(split.refinement.size() == 3);
    const double d1 = std::fabs(split.refinement[1].second - split.refinement[0].second);
    const double d2 = std::fabs(split.refinement[2].second - split.refinement[1].second);
    CHECK(d2 < d1);
    // position-space parts: N(0) = ||Nhat||_1, and W = P - N pointwise
    CHECK(split.n_part(0.0, 0.0) == doctest::Approx(split.neg_l1).epsilon(1e-6));
    for (double dt : {0.2, 0.6})
        for (double dx : {0.9, 1.4}) {
            const double w = comparison_difference(p, -(dt - dx) * (dt + dx)) *
                             win(dt - dx, dt + dx);
            CHECK(split.p_part(dt, dx) - split.n_part(dt, dx) ==
                  doctest::Approx(w).epsilon(0.02));
        }
}

TEST_CASE("K decreases when the kernel scale is matched to the mass") {
    // mu_scale = e^{-gamma}/m kills the cone value; on a fixed window the
    // kernel is then O(m^2 x^2 log x^2) and K shrinks with the mass
    double prev = 1e9;
    WindowFunction win{1.0, 1.0};
    NullGrid base{win.extent(), 256};
    for (double m : {1.2, 0.8, 0.5}) {
        ThermalParams p = params(m, std::exp(-kEulerGamma) / m);
        const SpectralSplit split = k_constant(p, win, base, 3);
        CHECK(split.K < prev);
        prev = split.K;
    }
}
