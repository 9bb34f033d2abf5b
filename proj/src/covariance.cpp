#include "sgt/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sgt/quadrature.hpp"
#include "sgt/special.hpp"

namespace sgt::cov {

namespace {

constexpr double kConeEps = 1e-12;

double fold_u(const ThermalParams& p, double u) {
    if (u < -kConeEps || u > p.beta + kConeEps)
        throw std::domain_error("thermal covariance: u outside [0, beta]");
    u = std::clamp(u, 0.0, p.beta);
    return std::min(u, p.beta - u);
}

}  // namespace

double vacuum_covariance(const ThermalParams& p, double u, double x) {
    const double r = std::hypot(u, x);
    if (r < kConeEps) throw SingularityError("vacuum_covariance: point at the origin");
    return special::bessel_k0(p.mass * r) / (2.0 * kPi);
}

double vacuum_covariance_du(const ThermalParams& p, double u, double x) {
    const double r = std::hypot(u, x);
    if (r < kConeEps) throw SingularityError("vacuum_covariance_du: point at the origin");
    // d/du (1/2pi) K0(m r) = -(m u / (2 pi r)) K1(m r)
    return -(p.mass * u / (2.0 * kPi * r)) * special::bessel_k1(p.mass * r);
}

MatsubaraEval thermal_matsubara(const ThermalParams& p, double u, double x, int n_max) {
    const double ax = std::fabs(x);
    if (ax < kConeEps)
        throw DivergentSumError("thermal_matsubara: mode sum diverges logarithmically at x = 0");
    const double beta = p.beta, m = p.mass;
    const double w1 = 2.0 * kPi / beta;
    MatsubaraEval out;
    double sum = std::exp(-m * ax) / (2.0 * m);
    for (int n = 1; n <= n_max; ++n) {
        const double eps = std::hypot(m, w1 * n);
        sum += std::exp(-eps * ax) / eps * std::cos(w1 * n * u);
    }
    out.value = sum / beta;
    const double epsN = std::hypot(m, w1 * (n_max + 1));
    const double q = std::exp(-w1 * ax / std::sqrt(2.0));
    out.tail_bound = (1.0 / beta) * std::exp(-m * ax / std::sqrt(2.0)) / epsN *
                     std::pow(q, n_max + 1) / (1.0 - q);
    out.n_terms = n_max;
    return out;
}

MatsubaraEval thermal_matsubara_du(const ThermalParams& p, double u, double x, int n_max) {
    const double ax = std::fabs(x);
    if (ax < kConeEps)
        throw DivergentSumError("thermal_matsubara_du: mode sum diverges at x = 0");
    const double beta = p.beta, m = p.mass;
    const double w1 = 2.0 * kPi / beta;
    MatsubaraEval out;
    double sum = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const double wn = w1 * n;
        const double eps = std::hypot(m, wn);
        sum += -wn * std::sin(wn * u) * std::exp(-eps * ax) / eps;
    }
    out.value = sum / beta;
    const double q = std::exp(-w1 * ax / std::sqrt(2.0));
    const double wN = w1 * (n_max + 1);
    // extra w_n factor bounded by w_N * q^n / (1 - q)^2 envelope
    out.tail_bound = (1.0 / beta) * std::exp(-m * ax / std::sqrt(2.0)) * wN *
                     std::pow(q, n_max + 1) / ((1.0 - q) * (1.0 - q)) / std::hypot(m, wN);
    out.n_terms = n_max;
    return out;
}

int matsubara_terms_for_tol(const ThermalParams& p, double x, double tol) {
    const double ax = std::fabs(x);
    if (ax < kConeEps)
        throw DivergentSumError("matsubara_terms_for_tol: x = 0 has no convergent mode sum");
    const double beta = p.beta, m = p.mass;
    const double w1 = 2.0 * kPi / beta;
    const double q = std::exp(-w1 * ax / std::sqrt(2.0));
    const double pre = (1.0 / beta) * std::exp(-m * ax / std::sqrt(2.0)) / (1.0 - q);
    for (int n = 0; n <= 100000; ++n) {
        const double epsN = std::hypot(m, w1 * (n + 1));
        if (pre * std::pow(q, n + 1) / epsN < tol) return n;
    }
    throw QuadratureError("matsubara_terms_for_tol: tail bound does not certify", 0.0);
}

namespace {

// Thermal-minus-vacuum integrand at folded u in [0, beta/2]:
//   (1/(2 pi)) (1/w) (e^{-(beta-u) w} + e^{-(beta+u) w}) / (1 - e^{-beta w}) cos(x p)
double diff_integrand(const ThermalParams& p, double uu, double x, double mom) {
    const double w = std::hypot(p.mass, mom);
    const double den = -std::expm1(-p.beta * w);
    const double num = std::exp(-(p.beta - uu) * w) + std::exp(-(p.beta + uu) * w);
    return (num / den) / w * std::cos(x * mom) / (2.0 * kPi);
}

double diff_du_integrand(const ThermalParams& p, double uu, double x, double mom) {
    const double w = std::hypot(p.mass, mom);
    const double den = -std::expm1(-p.beta * w);
    const double num = std::exp(-(p.beta - uu) * w) - std::exp(-(p.beta + uu) * w);
    return (num / den) * std::cos(x * mom) / (2.0 * kPi);
}

double diff_pmax(const ThermalParams& p, double uu, double tol) {
    // tail of the integral beyond P is below
    //   (1/pi) e^{-(beta-uu) w_P} / ((beta-uu) w_P (1 - e^{-beta m}))
    const double bu = p.beta - uu;
    const double den = -std::expm1(-p.beta * p.mass);
    double P = std::max(p.mass, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double w = std::hypot(p.mass, P);
        const double bound = std::exp(-bu * w) / (kPi * bu * w * den);
        if (bound < 0.5 * tol) return P;
        P *= 1.35;
    }
    return P;
}

double magnitude_scale(const ThermalParams& p, double uu, double x) {
    const double ax = std::fabs(x);
    const double r = std::hypot(uu, x);
    double s = 0.0;
    if (r >= kConeEps) s += special::bessel_k0_scaled(p.mass * r) * std::exp(-p.mass * r) / (2.0 * kPi);
    if (ax >= kConeEps) s += std::exp(-p.mass * ax) / (2.0 * p.mass * p.beta);
    return std::max(s, 1e-300);
}

}  // namespace

double thermal_quadrature(const ThermalParams& p, double u, double x, double tol) {
    const double uu = fold_u(p, u);
    const double r = std::hypot(uu, x);
    if (r < kConeEps)
        throw SingularityError("thermal_quadrature: coincident point on the thermal lattice");
    const double vac = vacuum_covariance(p, uu, x);
    const double abs_tol = std::clamp(tol * magnitude_scale(p, uu, x), 5e-16, 1e-10);
    const double P = diff_pmax(p, uu, abs_tol);
    auto f = [&](double mom) { return diff_integrand(p, uu, x, mom); };
    const QuadResult q = gk_adaptive(f, 0.0, P, abs_tol);
    if (!q.converged)
        throw QuadratureError("thermal_quadrature: tolerance not reached", vac + q.value);
    return vac + q.value;
}

double thermal_quadrature_du(const ThermalParams& p, double u, double x, double tol) {
    if (u < -kConeEps || u > p.beta + kConeEps)
        throw std::domain_error("thermal_quadrature_du: u outside [0, beta]");
    const double uu = std::min(u, p.beta - u);
    const double sign = (u <= p.beta / 2.0) ? 1.0 : -1.0;  // dC/du odd about beta/2
    const double r = std::hypot(uu, x);
    if (r < kConeEps) throw SingularityError("thermal_quadrature_du: singular point");
    const double vac = vacuum_covariance_du(p, uu, x);
    const double abs_tol = std::clamp(tol * magnitude_scale(p, uu, x), 5e-16, 1e-10);
    const double P = diff_pmax(p, uu, abs_tol);
    auto f = [&](double mom) { return diff_du_integrand(p, uu, x, mom); };
    const QuadResult q = gk_adaptive(f, 0.0, P, abs_tol);
    if (!q.converged)
        throw QuadratureError("thermal_quadrature_du: tolerance not reached", vac + q.value);
    return sign * (vac + q.value);
}

double thermal_quadrature_direct(const ThermalParams& p, double u, double x, double tol) {
    const double uu = fold_u(p, u);
    if (uu < 1e-3 * p.beta)
        throw std::domain_error("thermal_quadrature_direct: u too close to the boundary");
    auto f = [&](double mom) {
        const double w = std::hypot(p.mass, mom);
        return std::cosh((p.beta / 2.0 - uu) * w) / std::sinh(p.beta * w / 2.0) / w *
               std::cos(x * mom) / (2.0 * kPi);
    };
    // envelope ~ exp(-uu w): pick P so the tail is negligible
    double P = std::max(p.mass, 1.0);
    while (std::exp(-uu * P) / (uu * P * kPi) > 0.25 * tol && P < 1e9) P *= 1.35;
    const QuadResult q = gk_adaptive(f, 0.0, P, 0.5 * tol, 8000);
    if (!q.converged)
        throw QuadratureError("thermal_quadrature_direct: tolerance not reached", q.value);
    return q.value;
}

namespace {

// smallest certified mode count below the cap, or -1 when the mode-sum route
// is not economical at this x
int matsubara_terms_capped(const ThermalParams& p, double x, double tol, int cap) {
    const double ax = std::fabs(x);
    const double beta = p.beta, m = p.mass;
    const double w1 = 2.0 * kPi / beta;
    const double q = std::exp(-w1 * ax / std::sqrt(2.0));
    const double pre = (1.0 / beta) * std::exp(-m * ax / std::sqrt(2.0)) / (1.0 - q);
    for (int n = 0; n <= cap; ++n) {
        const double epsN = std::hypot(m, w1 * (n + 1));
        if (pre * std::pow(q, n + 1) / epsN < tol) return n;
    }
    return -1;
}

}  // namespace

double thermal_covariance(const ThermalParams& p, double u, double x, double tol) {
    const double uu = fold_u(p, u);
    if (std::fabs(x) >= kConeEps) {
        const double abs_tol = std::max(tol * magnitude_scale(p, uu, x), 1e-15);
        const int n = matsubara_terms_capped(p, x, abs_tol, 32);
        if (n >= 0) return thermal_matsubara(p, uu, x, n).value;
    }
    return thermal_quadrature(p, uu, x, tol);
}

double thermal_covariance_du(const ThermalParams& p, double u, double x, double tol) {
    if (u < -kConeEps || u > p.beta + kConeEps)
        throw std::domain_error("thermal_covariance_du: u outside [0, beta]");
    if (std::fabs(x) >= kConeEps) {
        const double uu = std::min(u, p.beta - u);
        const double abs_tol = std::max(tol * magnitude_scale(p, uu, x), 1e-15);
        const int n = matsubara_terms_capped(p, x, abs_tol, 32);
        if (n >= 0) return thermal_matsubara_du(p, u, x, n + 4).value;
    }
    return thermal_quadrature_du(p, u, x, tol);
}

double thermal_covariance_periodic(const ThermalParams& p, double du, double x, double tol) {
    if (std::fabs(du) > p.beta + kConeEps)
        throw std::domain_error("thermal_covariance_periodic: |du| > beta");
    return thermal_covariance(p, std::min(std::fabs(du), p.beta), x, tol);
}

double massless_hadamard(const ThermalParams& p, double x0, double x1) {
    const double q = -x0 * x0 + x1 * x1;
    if (std::fabs(q) < kConeEps)
        throw SingularityError("massless_hadamard: point on the light cone");
    return -std::log(std::fabs(q) / (4.0 * p.mu_scale * p.mu_scale)) / (4.0 * kPi);
}

double massive_hadamard(const ThermalParams& p, double x0, double x1) {
    const double q = -x0 * x0 + x1 * x1;
    if (std::fabs(q) < kConeEps)
        throw SingularityError("massive_hadamard: point on the light cone");
    if (q > 0.0) return special::bessel_k0(p.mass * std::sqrt(q)) / (2.0 * kPi);
    // timelike: Re K0(i y) = -(pi/2) Y0(y)
    return -0.25 * special::bessel_y0(p.mass * std::sqrt(-q));
}

DecayReport decay_bound_report(const ThermalParams& p, double alpha_cut,
                               std::span<const EuclideanPoint> grid) {
    if (!(alpha_cut > 0.0)) throw std::invalid_argument("decay_bound_report: alpha_cut must be > 0");
    DecayReport rep;
    rep.alpha_cut = alpha_cut;
    rep.c_beta =
        (2.0 / p.beta) / (-std::expm1(-(alpha_cut / std::sqrt(2.0)) * (2.0 * kPi / p.beta)));
    rep.min_margin = std::numeric_limits<double>::infinity();
    rep.rows.reserve(grid.size());
    for (const auto& pt : grid) {
        if (!(std::fabs(pt.x) > alpha_cut))
            throw std::invalid_argument("decay_bound_report: grid point with |x| <= alpha_cut");
        const double v = thermal_covariance(p, pt.u, pt.x, 1e-10);
        const double bound = rep.c_beta * std::exp(-p.mass * std::fabs(pt.x) / std::sqrt(2.0)) / p.mass;
        const double margin = bound - std::fabs(v);
        rep.rows.push_back({pt.u, pt.x, v, bound, margin});
        rep.all_ok = rep.all_ok && margin >= 0.0;
        rep.min_margin = std::min(rep.min_margin, margin);
    }
    return rep;
}

LpNormResult lp_norm_slice(const ThermalParams& p, double u, double pexp, double tol) {
    if (!(u > 0.0 && u < p.beta))
        throw std::domain_error("lp_norm_slice: u must be interior to (0, beta)");
    if (!(pexp >= 1.0)) throw std::invalid_argument("lp_norm_slice: pexp must be >= 1");
    LpNormResult out;
    if (std::isinf(pexp)) {
        double mx = 0.0;
        for (int i = 0; i <= 400; ++i)
            mx = std::max(mx, std::fabs(thermal_covariance(p, u, i * 0.05, 1e-10)));
        out.norm = mx;
        out.tail_bound = 0.0;
        return out;
    }
    const double alpha_cut = 1.0;
    const double c_beta =
        (2.0 / p.beta) / (-std::expm1(-(alpha_cut / std::sqrt(2.0)) * (2.0 * kPi / p.beta)));
    // X chosen so the certified tail of int |C|^p is tiny
    double X = alpha_cut + 1.0;
    auto tail = [&](double X0) {
        const double base = c_beta / p.mass;
        const double lam = pexp * p.mass / std::sqrt(2.0);
        return 2.0 * std::pow(base, pexp) * std::exp(-lam * X0) / lam;
    };
    while (tail(X) > 0.1 * tol && X < 4000.0) X += 1.0;
    auto f = [&](double x) { return std::pow(std::fabs(thermal_covariance(p, u, x, 1e-11)), pexp); };
    const QuadResult q = gk_adaptive(f, 0.0, X, 0.25 * tol, 6000);
    const double integral = 2.0 * q.value + tail(X);
    out.norm = std::pow(integral, 1.0 / pexp);
    out.tail_bound = tail(X);
    out.conclusive = q.converged && tail(X) <= tol;
    return out;
}

double vacuum_limit_bound(const ThermalParams& p) {
    const double bm = p.beta * p.mass;
    return (1.0 / (2.0 * kPi)) * (2.0 / bm) * (1.0 + 2.0 / bm);
}

double thermal_vacuum_diagonal(const ThermalParams& p, double tol) {
    auto f = [&](double mom) {
        const double w = std::hypot(p.mass, mom);
        return 1.0 / (w * std::expm1(p.beta * w)) / kPi;
    };
    double P = std::max(p.mass, 1.0);
    while (std::exp(-p.beta * P) / (kPi * p.beta * P) > 0.25 * tol && P < 1e9) P *= 1.4;
    const QuadResult q = gk_adaptive(f, 0.0, P, 0.5 * tol);
    return q.value;
}

double CovarianceEval::operator()(double a, double b) const {
    switch (kind) {
        case CovKind::ThermalQuadrature:
            return thermal_quadrature(params, a, b);
        case CovKind::ThermalMatsubara:
            return thermal_matsubara(params, a, b, truncation).value;
        case CovKind::Vacuum:
            return vacuum_covariance(params, a, b);
        case CovKind::MasslessHadamard:
            return massless_hadamard(params, a, b);
        case CovKind::MassiveHadamard:
            return massive_hadamard(params, a, b);
    }
    throw std::logic_error("CovarianceEval: unknown kind");
}

CovarianceModel make_thermal_model(const ThermalParams& p, double tol) {
    return {"thermal", [p, tol](double t1, double x1, double t2, double x2) {
                return thermal_covariance_periodic(p, t1 - t2, x1 - x2, tol);
            }};
}

CovarianceModel make_vacuum_model(const ThermalParams& p) {
    return {"vacuum", [p](double t1, double x1, double t2, double x2) {
                return vacuum_covariance(p, t1 - t2, x1 - x2);
            }};
}

CovarianceModel make_massless_hadamard_model(const ThermalParams& p) {
    return {"massless_hadamard", [p](double t1, double x1, double t2, double x2) {
                return massless_hadamard(p, t1 - t2, x1 - x2);
            }};
}

CovarianceModel make_massive_hadamard_model(const ThermalParams& p) {
    return {"massive_hadamard", [p](double t1, double x1, double t2, double x2) {
                return massive_hadamard(p, t1 - t2, x1 - x2);
            }};
}

}  // namespace sgt::cov
