#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sgt/bridge.hpp"
#include "sgt/dirichlet.hpp"
#include "sgt/rng.hpp"

using namespace sgt;
using namespace sgt::dirichlet;

namespace {

ThermalParams params(double beta, double m) {
    ThermalParams p;
    p.beta = beta;
    p.mass = m;
    return p;
}

}  // namespace

TEST_CASE("half line covariance") {
    const ThermalParams p = params(2.0, 1.0);
    // boundary point: image cancels the source
    CHECK(half_line_covariance(p, 0, 1.0, 0.0, 2.0) == 0.0);
    // opposite sides decouple exactly
    CHECK(half_line_covariance(p, 0, 1.0, -1.0, 2.0) == 0.0);
    // pinned example: C(1,-1) - C(1,3) from the covariance oracle
    const double expect = cov::thermal_covariance(p, 1.0, -1.0) - cov::thermal_covariance(p, 1.0, 3.0);
    CHECK(half_line_covariance(p, 0, 1.0, 1.0, 2.0) == doctest::Approx(expect).epsilon(1e-12));
    // mirror side works the same way
    CHECK(half_line_covariance(p, 0, 1.0, -1.0, -2.0) ==
          doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("interval covariance") {
    const ThermalParams p = params(2.0, 2.0);
    // Dirichlet data at the edges
    const auto edge = interval_covariance(p, 0, 3, 0.9, 1e-10, 1.5);
    CHECK(std::fabs(edge.value) < 1e-6 + edge.tail_bound);
    // truncation certified by the decay bound
    const auto few = interval_covariance(p, 0, 3, 0.9, 1.0, 2.0, 0);
    const auto many = interval_covariance(p, 0, 3, 0.9, 1.0, 2.0, 5);
    CHECK(std::fabs(few.value - many.value) <= few.tail_bound);
    // nearest omitted image sits at distance L = 3 from these points, so the
    // certified truncation error carries the exp(-m L / sqrt 2) scale
    CHECK(few.tail_bound <= std::exp(-2.0 * 3.0 / std::sqrt(2.0)) * 10.0);
    // symmetric under swapping the two points
    const auto ab = interval_covariance(p, 0, 3, 0.9, 1.0, 2.0);
    const auto ba = interval_covariance(p, 0, 3, 0.9, 2.0, 1.0);
    CHECK(ab.value == doctest::Approx(ba.value).epsilon(1e-13));
    CHECK_THROWS_AS(interval_covariance(p, 0, 3, 0.9, -0.5, 2.0), std::domain_error);
}

TEST_CASE("gamma covariance dispatch") {
    const ThermalParams p = params(2.0, 1.0);
    // empty bond set reduces to the free covariance
    CHECK(gamma_covariance(p, {}, 0.7, 1.0, 2.3) ==
          doctest::Approx(cov::thermal_covariance(p, 0.7, -1.3)).epsilon(1e-12));
    // different components vanish
    CHECK(gamma_covariance(p, {0}, 0.7, -1.0, 1.0) == 0.0);
    // bounded component dispatches to the interval formula
    const double direct = interval_covariance(p, 0, 3, 0.7, 1.0, 2.0).value;
    CHECK(gamma_covariance(p, {0, 3}, 0.7, 1.0, 2.0) == doctest::Approx(direct).epsilon(1e-12));
    // unbounded component uses the half-line formula with the nearest bond
    CHECK(gamma_covariance(p, {0, 3}, 0.7, 4.0, 5.0) ==
          doctest::Approx(half_line_covariance(p, 3, 0.7, 4.0, 5.0)).epsilon(1e-12));
    CHECK_THROWS_AS(validate_bonds(BondSet{3, 1}), std::invalid_argument);
}

TEST_CASE("interpolated covariance endpoints and affinity") {
    const ThermalParams p = params(2.0, 1.0);
    const double u = 0.9, x1 = 0.4, x2 = 0.8;
    InterpolationVector iv{{0, 1, 2}, {1.0, 1.0, 1.0}};
    // all s = 1 reproduces the free covariance
    CHECK(interpolated_covariance(p, iv, u, x1, x2) ==
          doctest::Approx(cov::thermal_covariance(p, u, x1 - x2)).epsilon(1e-12));
    // all s = 0 reproduces the fully clamped kernel
    iv.s = {0.0, 0.0, 0.0};
    CHECK(interpolated_covariance(p, iv, u, x1, x2) ==
          doctest::Approx(gamma_covariance(p, {0, 1, 2}, u, x1, x2)).epsilon(1e-12));
    // single-bond convexity
    InterpolationVector one{{0}, {0.5}};
    const double mid = interpolated_covariance(p, one, u, x1, x2);
    one.s = {0.0};
    const double lo = interpolated_covariance(p, one, u, x1, x2);
    one.s = {1.0};
    const double hi = interpolated_covariance(p, one, u, x1, x2);
    CHECK(mid == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-12));
    // midpoint affinity per bond on a larger active set
    Rng rng(11);
    InterpolationVector big{{-1, 0, 2}, {0.3, 0.7, 0.2}};
    for (std::size_t b = 0; b < big.active.size(); ++b) {
        auto at = [&](double sv) {
            InterpolationVector w = big;
            w.s[b] = sv;
            return interpolated_covariance(p, w, u, x1, x2);
        };
        CHECK(at(0.5) == doctest::Approx(0.5 * (at(0.0) + at(1.0))).epsilon(1e-12));
    }
    // capacity guard
    InterpolationVector too_big;
    for (int b = 0; b < 15; ++b) {
        too_big.active.push_back(b);
        too_big.s.push_back(0.5);
    }
    CHECK_THROWS_AS(interpolated_covariance(p, too_big, u, 0.3, 0.4), CapacityError);
}

TEST_CASE("corner-formula partial derivatives") {
    const ThermalParams p = params(2.0, 1.0);
    const double u = 0.8;
    InterpolationVector iv{{0, 1}, {0.4, 0.6}};
    // |gamma| = 1 equals the affine slope
    auto at = [&](double s0) {
        InterpolationVector w = iv;
        w.s[0] = s0;
        return interpolated_covariance(p, w, u, 0.3, 0.7);
    };
    const double slope = partial_gamma_covariance(p, iv, {0}, u, 0.3, 0.7);
    CHECK(slope == doctest::Approx(at(1.0) - at(0.0)).epsilon(1e-12));
    // independence of s on the differentiated bonds
    InterpolationVector iv2 = iv;
    iv2.s[0] = 0.05;
    CHECK(partial_gamma_covariance(p, iv2, {0}, u, 0.3, 0.7) ==
          doctest::Approx(slope).epsilon(1e-12));
    // positivity of mixed partials on random configurations
    Rng rng(23);
    for (int it = 0; it < 40; ++it) {
        InterpolationVector w{{-1, 0, 1}, {rng.uniform(), rng.uniform(), rng.uniform()}};
        const double a = rng.uniform(-1.8, 1.8);
        const double b = rng.uniform(-1.8, 1.8);
        if (std::fabs(a - b) < 1e-3) continue;
        const double uu = p.beta * rng.uniform(0.1, 0.9);
        BondSet gamma;
        for (int g : w.active)
            if (rng.uniform() < 0.6) gamma.push_back(g);
        if (gamma.empty()) gamma.push_back(0);
        const double d = partial_gamma_covariance(p, w, gamma, uu, a, b);
        CHECK(d >= -1e-10);
    }
}

TEST_CASE("dirichlet kernels never exceed the free covariance") {
    const ThermalParams p = params(2.0, 1.0);
    Rng rng(37);
    for (int it = 0; it < 30; ++it) {
        const double u = p.beta * rng.uniform(0.1, 0.9);
        const double a = rng.uniform(0.05, 2.95);
        const double b = rng.uniform(0.05, 2.95);
        const double free_val = cov::thermal_covariance(p, u, a - b);
        CHECK(gamma_covariance(p, {0, 3}, u, a, b) <= free_val + 1e-10);
        CHECK(half_line_covariance(p, 0, u, a, b) <= free_val + 1e-10);
    }
}

TEST_CASE("theta weight dual sums agree and stay positive") {
    const double beta = 1.7;
    for (double T : {0.03, 0.2, 0.46, 1.0, 4.0})
        for (double u : {0.0, 0.3, 0.85, 1.2}) {
            const double w = theta_weight(beta, T, u);
            CHECK(w > 0.0);
            // independent check against a long frequency sum
            double ref = 1.0;
            for (int n = 1; n <= 2000; ++n) {
                const double w1 = 2.0 * kPi / beta;
                const double term =
                    2.0 * std::exp(-0.5 * w1 * w1 * n * n * T) * std::cos(w1 * n * u);
                ref += term;
                if (std::fabs(term) < 1e-17) break;
            }
            CHECK(w == doctest::Approx(ref).epsilon(1e-11));
        }
}

TEST_CASE("bridge estimator reproduces the covariance") {
    const ThermalParams p = params(2.0, 1.0);
    McConfig cfg;
    cfg.seed = 404;
    cfg.samples = 60000;
    const double u = 0.8, x = 0.3, y = -0.5;
    const BridgeEstimate be = bridge_estimator(p, {}, {}, u, x, y, cfg);
    const double ref = cov::thermal_covariance(p, u, x - y);
    CHECK(std::fabs(be.value - ref) < 3.0 * be.std_error);

    // straddling an avoided bond kills every path
    const BridgeEstimate dead = bridge_estimator(p, {}, {0}, u, -0.4, 0.7, cfg);
    CHECK(dead.value == 0.0);

    // straddling a touched bond is vacuous
    const BridgeEstimate vac = bridge_estimator(p, {0}, {}, u, -0.4, 0.7, cfg);
    const double ref2 = cov::thermal_covariance(p, u, -1.1);
    CHECK(std::fabs(vac.value - ref2) < 3.0 * vac.std_error);

    CHECK_THROWS_AS(bridge_estimator(p, {0}, {0}, u, x, y, cfg), std::invalid_argument);
}

TEST_CASE("bridge estimator matches the avoid kernel") {
    const ThermalParams p = params(2.0, 1.2);
    McConfig cfg;
    cfg.seed = 405;
    cfg.samples = 60000;
    // avoiding one bond on the same side = half-line kernel
    const double u = 0.9, x = 0.5, y = 1.4;
    const BridgeEstimate be = bridge_estimator(p, {}, {0}, u, x, y, cfg);
    const double ref = half_line_covariance(p, 0, u, x, y);
    CHECK(std::fabs(be.value - ref) < 3.0 * be.std_error);
}

TEST_CASE("oracle triangle: corner formula vs bridge touch estimate") {
    const ThermalParams p = params(2.0, 1.3);
    McConfig cfg;
    cfg.seed = 406;
    cfg.samples = 80000;
    const double u = 0.7, x = -0.6, y = 1.7;
    for (const BondSet& gamma : {BondSet{0}, BondSet{0, 1}}) {
        InterpolationVector iv;
        iv.active = gamma;
        iv.s.assign(gamma.size(), 1.0);
        const double corner = partial_gamma_covariance(p, iv, gamma, u, x, y);
        const BridgeEstimate be = bridge_estimator(p, gamma, {}, u, x, y, cfg);
        CHECK(std::fabs(be.value - corner) < 3.0 * be.std_error + 1e-4);
    }
}

TEST_CASE("dgamma reflection identities and bound") {
    const ThermalParams p = params(2.0, 1.5);
    McConfig cfg;
    cfg.seed = 407;
    cfg.samples = 50000;
    std::vector<PathPair> pairs = {
        {0.9, -1.5, 2.5},  // exterior on both sides: D = C(x - y)
        {0.9, -1.0, 0.5},  // y below max bond: reflection at z_max
        {0.9, 0.4, 2.6},   // x above min bond: reflection at z_min
    };
    const DGammaReport rep = dgamma_bound_report(p, {0, 2}, pairs, cfg);
    CHECK(rep.all_ok);
    for (const auto& row : rep.rows) {
        REQUIRE(row.via_reflection);
        CHECK(std::fabs(row.estimate - row.reflection_value) < 3.0 * row.std_error + 1e-5);
        CHECK(row.margin >= -3.0 * row.std_error);
    }
}

TEST_CASE("bridge precision warning at tiny budget") {
    const ThermalParams p = params(2.0, 1.0);
    McConfig cfg;
    cfg.seed = 1;
    cfg.samples = 64;
    cfg.target_rel_error = 0.001;
    const BridgeEstimate be = bridge_estimator(p, {}, {}, 0.9, 0.2, -0.3, cfg);
    CHECK(be.precision_warning);
    CHECK(be.samples == 64);
}

TEST_CASE("oracle triangle with three forced bonds") {
    const ThermalParams p = params(2.0, 1.5);
    McConfig cfg;
    cfg.seed = 408;
    cfg.samples = 120000;
    const double u = 0.8, x = -0.7, y = 2.6;
    const BondSet gamma = {0, 1, 2};
    InterpolationVector iv;
    iv.active = gamma;
    iv.s.assign(gamma.size(), 1.0);
    const double corner = partial_gamma_covariance(p, iv, gamma, u, x, y);
    const BridgeEstimate be = bridge_estimator(p, gamma, {}, u, x, y, cfg);
    CHECK(std::fabs(be.value - corner) < 3.0 * be.std_error + 1e-4);
}

TEST_CASE("interpolated covariance at a mixed corner equals the bond-set kernel") {
    const ThermalParams p = params(2.0, 1.0);
    InterpolationVector iv{{-1, 0, 2}, {1.0, 0.0, 1.0}};  // middle bond clamped
    const double u = 0.9, x1 = 0.3, x2 = 0.8;
    CHECK(interpolated_covariance(p, iv, u, x1, x2) ==
          doctest::Approx(gamma_covariance(p, {0}, u, x1, x2)).epsilon(1e-13));
    iv.s = {0.0, 1.0, 0.0};
    CHECK(interpolated_covariance(p, iv, u, x1, x2) ==
          doctest::Approx(gamma_covariance(p, {-1, 2}, u, x1, x2)).epsilon(1e-13));
}
