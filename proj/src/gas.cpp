#include "sgt/gas.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

namespace sgt::gas {

namespace {

constexpr std::uint64_t kGasTag = 0x6A5;

double smooth_step(double t) {
    // C-infinity step: 0 for t <= 0, 1 for t >= 1
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

}  // namespace

double gas_weight(const cov::CovarianceModel& w, const ChargeConfiguration& cfg, double hbar) {
    const std::size_t n = cfg.charges.size();
    if (cfg.t.size() != n || cfg.x.size() != n)
        throw std::invalid_argument("gas_weight: field sizes disagree");
    double expo = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            expo -= cfg.charges[i] * cfg.charges[j] * hbar *
                    w(cfg.t[i], cfg.x[i], cfg.t[j], cfg.x[j]);
    return std::exp(expo);
}

double CutoffFunction::operator()(double t, double x) const {
    if (kind == Kind::CharacteristicInterval)
        return (std::fabs(t - t0) <= 1e-12 && x >= x0 && x <= x1) ? 1.0 : 0.0;
    if (t < t0 || t > t1 || x < x0 || x > x1) return 0.0;
    switch (kind) {
        case Kind::CharacteristicInterval:
        case Kind::CharacteristicSquare:
            return 1.0;
        case Kind::CharacteristicDiamond: {
            const double mu = 0.5 * (t1 - t0);
            const double ct = t - 0.5 * (t0 + t1), cx = x - 0.5 * (x0 + x1);
            return (std::fabs(ct + cx) < mu && std::fabs(ct - cx) < mu) ? 1.0 : 0.0;
        }
        case Kind::SmoothBump: {
            const double wt = bump_width * (t1 - t0);
            const double wx = bump_width * (x1 - x0);
            const double ft = std::min(smooth_step((t - t0) / wt), smooth_step((t1 - t) / wt));
            const double fx = std::min(smooth_step((x - x0) / wx), smooth_step((x1 - x) / wx));
            return ft * fx;
        }
    }
    return 0.0;
}

double CutoffFunction::norm_q(double q) const {
    if (kind == Kind::CharacteristicInterval) return std::pow(x1 - x0, 1.0 / q);
    if (kind == Kind::CharacteristicDiamond) {
        const double mu = 0.5 * (t1 - t0);
        return std::pow(2.0 * mu * mu, 1.0 / q);
    }
    if (kind == Kind::SmoothBump) {
        // numerical product quadrature of g^q over the box
        const int n = 200;
        double st = 0.0, sx = 0.0;
        const double ht = (t1 - t0) / n, hx = (x1 - x0) / n;
        for (int i = 0; i < n; ++i) {
            const double t = t0 + (i + 0.5) * ht;
            const double wt = bump_width * (t1 - t0);
            st += std::pow(std::min(smooth_step((t - t0) / wt), smooth_step((t1 - t) / wt)), q) * ht;
        }
        for (int i = 0; i < n; ++i) {
            const double x = x0 + (i + 0.5) * hx;
            const double wx = bump_width * (x1 - x0);
            sx += std::pow(std::min(smooth_step((x - x0) / wx), smooth_step((x1 - x) / wx)), q) * hx;
        }
        return std::pow(st * sx, 1.0 / q);
    }
    return std::pow(box_volume(), 1.0 / q);
}

CutoffFunction characteristic_square(double t0, double t1, double x0, double x1) {
    CutoffFunction g;
    g.kind = CutoffFunction::Kind::CharacteristicSquare;
    g.t0 = t0;
    g.t1 = t1;
    g.x0 = x0;
    g.x1 = x1;
    return g;
}

CutoffFunction characteristic_interval(double t, double x0, double x1) {
    CutoffFunction g;
    g.kind = CutoffFunction::Kind::CharacteristicInterval;
    g.t0 = g.t1 = t;
    g.x0 = x0;
    g.x1 = x1;
    return g;
}

CutoffFunction characteristic_diamond(double mu) {
    CutoffFunction g = characteristic_square(-mu, mu, -mu, mu);
    g.kind = CutoffFunction::Kind::CharacteristicDiamond;
    return g;
}

namespace {

struct ComplexPartial {
    Accumulator re, im;
    long long rejected = 0;
    void merge(const ComplexPartial& o) {
        re.merge(o.re);
        im.merge(o.im);
        rejected += o.rejected;
    }
};

// Draw a point from the support of g; returns the importance weight.
// Interval cutoffs live on a fixed-time line, everything else on the box.
double draw_point(const CutoffFunction& g, Rng& rng, double& t, double& x) {
    if (g.kind == CutoffFunction::Kind::CharacteristicInterval) {
        t = g.t0;
        x = rng.uniform(g.x0, g.x1);
        return 1.0;
    }
    t = rng.uniform(g.t0, g.t1);
    x = rng.uniform(g.x0, g.x1);
    return g(t, x);
}

}  // namespace

ComplexMcEstimate cos_power_moment(const ThermalParams& p, const cov::CovarianceModel& w,
                                   const CutoffFunction& g, int k, const FieldConfiguration& phi,
                                   const McConfig& cfg) {
    p.validate();
    if (k < 0 || k > 6) throw CapacityError("cos_power_moment: order outside 0..6");
    if (2.0 * p.alpha() >= 1.0)
        throw PreconditionError(
            "cos_power_moment: alpha >= 1/2, the squared integrand |x^2|^(-2 alpha) is not "
            "locally integrable (Cauchy-determinant condition alpha p < 1 fails at p = 2); "
            "the Monte Carlo variance diverges");
    ComplexMcEstimate out;
    if (k == 0) {
        out.value = 1.0;
        out.samples = 0;
        return out;
    }
    const double a = p.coupling_a;
    const double vol = g.box_volume();
    auto run_chunk = [&](long long chunk, long long n) {
        ComplexPartial part;
        Rng rng(mix_seed({cfg.seed, kGasTag, static_cast<std::uint64_t>(k),
                          static_cast<std::uint64_t>(chunk)}));
        std::vector<double> ts(k), xs(k), gw(k), ph(k);
        std::vector<double> pair_kernel(static_cast<std::size_t>(k) * k);
        for (long long s = 0; s < n; ++s) {
            bool ok = false;
            for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
                for (int i = 0; i < k; ++i) gw[i] = draw_point(g, rng, ts[i], xs[i]);
                ok = true;
                try {
                    for (int i = 0; i < k && ok; ++i)
                        for (int j = i + 1; j < k; ++j)
                            pair_kernel[i * k + j] = w(ts[i], xs[i], ts[j], xs[j]);
                } catch (const SingularityError&) {
                    ok = false;
                    ++part.rejected;
                }
            }
            if (!ok) throw PreconditionError("cos_power_moment: persistent singular draws");
            for (int i = 0; i < k; ++i) ph[i] = phi(ts[i], xs[i]);
            // exact sum over the 2^k sign assignments
            std::complex<double> signsum = 0.0;
            for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
                double expo = 0.0, phase = 0.0;
                for (int i = 0; i < k; ++i) {
                    const double ai = ((mask >> i) & 1) ? a : -a;
                    phase += ai * ph[i];
                    for (int j = i + 1; j < k; ++j) {
                        const double aj = ((mask >> j) & 1) ? a : -a;
                        expo -= ai * aj * p.hbar * pair_kernel[i * k + j];
                    }
                }
                signsum += std::exp(expo) * std::complex<double>(std::cos(phase), std::sin(phase));
            }
            double gprod = 1.0;
            for (int i = 0; i < k; ++i) gprod *= gw[i];
            const std::complex<double> val = signsum * (gprod / std::pow(2.0, k));
            part.re.add(val.real());
            part.im.add(val.imag());
        }
        return part;
    };
    auto merge = [](ComplexPartial& a_, const ComplexPartial& b_) { a_.merge(b_); };
    const ComplexPartial total =
        parallel_chunks<ComplexPartial>(cfg.samples, cfg.workers, run_chunk, merge);
    const double scale = std::pow(vol, k);
    out.value = std::complex<double>(total.re.mean, total.im.mean) * scale;
    out.std_error = std::hypot(total.re.std_error(), total.im.std_error()) * scale;
    out.samples = total.re.n;
    out.rejected = total.rejected;
    out.precision_warning =
        out.std_error > cfg.target_rel_error * std::max(std::abs(out.value), 1e-12);
    return out;
}

ComplexMcEstimate smatrix_coefficient_mc(const ThermalParams& p, const CutoffFunction& g, int n,
                                         const FieldConfiguration& phi, const McConfig& cfg) {
    const cov::CovarianceModel w = cov::make_massive_hadamard_model(p);
    ComplexMcEstimate m = cos_power_moment(p, w, g, n, phi, cfg);
    // (i lambda / hbar)^n / n!
    std::complex<double> pref = 1.0;
    const std::complex<double> il(0.0, p.coupling_lambda / p.hbar);
    double fact = 1.0;
    for (int i = 1; i <= n; ++i) {
        pref *= il;
        fact *= i;
    }
    pref /= fact;
    m.value *= pref;
    m.std_error *= std::abs(pref);
    return m;
}

CauchySides cauchy_identity_sides(std::span<const Point2> xs, std::span<const Point2> ys) {
    const std::size_t n = xs.size();
    if (ys.size() != n) throw std::invalid_argument("cauchy_identity_sides: size mismatch");
    const auto lor2 = [](const Point2& a, const Point2& b) {
        const double dt = a.t - b.t, dx = a.x - b.x;
        return std::fabs(-dt * dt + dx * dx);
    };
    const auto nu = [](const Point2& a) { return a.t - a.x; };
    const auto nv = [](const Point2& a) { return a.t + a.x; };
    CauchySides sides;
    double num = 1.0, den = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) num *= lor2(xs[i], xs[j]) * lor2(ys[i], ys[j]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double q = lor2(xs[i], ys[j]);
            if (q < 1e-13)
                throw PreconditionError("cauchy_identity_sides: points on a mutual light cone");
            den *= q;
        }
    sides.lhs = num / den;
    Eigen::MatrixXd Du(n, n), Dv(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double du = nu(xs[i]) - nu(ys[j]);
            const double dv = nv(xs[i]) - nv(ys[j]);
            if (std::fabs(du) < 1e-13 || std::fabs(dv) < 1e-13)
                throw PreconditionError("cauchy_identity_sides: coincident null coordinates");
            Du(i, j) = 1.0 / du;
            Dv(i, j) = 1.0 / dv;
        }
    sides.rhs = std::fabs(Du.determinant()) * std::fabs(Dv.determinant());
    return sides;
}

namespace {

// shared-point canonical partition estimates for several charge splits
std::vector<McEstimate> charged_moments(const ThermalParams& p, const cov::CovarianceModel& w,
                                        const CutoffFunction& g, int npts,
                                        std::span<const std::vector<double>> charge_sets,
                                        const McConfig& cfg) {
    struct Partial {
        std::vector<Accumulator> acc;
        long long rejected = 0;
    };
    const double vol = g.box_volume();
    auto run_chunk = [&](long long chunk, long long n) {
        Partial part;
        part.acc.resize(charge_sets.size());
        Rng rng(mix_seed({cfg.seed, kGasTag, 0xCA40ull, static_cast<std::uint64_t>(npts),
                          static_cast<std::uint64_t>(chunk)}));
        std::vector<double> ts(npts), xs(npts), gw(npts);
        std::vector<double> pair_kernel(static_cast<std::size_t>(npts) * npts);
        for (long long s = 0; s < n; ++s) {
            bool ok = false;
            for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
                for (int i = 0; i < npts; ++i) gw[i] = draw_point(g, rng, ts[i], xs[i]);
                ok = true;
                try {
                    for (int i = 0; i < npts && ok; ++i)
                        for (int j = i + 1; j < npts; ++j)
                            pair_kernel[i * npts + j] = w(ts[i], xs[i], ts[j], xs[j]);
                } catch (const SingularityError&) {
                    ok = false;
                    ++part.rejected;
                }
            }
            if (!ok) throw PreconditionError("charged_moments: persistent singular draws");
            double gprod = 1.0;
            for (int i = 0; i < npts; ++i) gprod *= gw[i];
            for (std::size_t c = 0; c < charge_sets.size(); ++c) {
                const auto& q = charge_sets[c];
                double expo = 0.0;
                for (int i = 0; i < npts; ++i)
                    for (int j = i + 1; j < npts; ++j)
                        expo -= q[i] * q[j] * p.hbar * pair_kernel[i * npts + j];
                part.acc[c].add(std::exp(expo) * gprod);
            }
        }
        return part;
    };
    auto merge = [](Partial& a, const Partial& b) {
        for (std::size_t i = 0; i < a.acc.size(); ++i) a.acc[i].merge(b.acc[i]);
        a.rejected += b.rejected;
    };
    const Partial total = parallel_chunks<Partial>(cfg.samples, cfg.workers, run_chunk, merge);
    std::vector<McEstimate> out(charge_sets.size());
    const double scale = std::pow(vol, npts);
    for (std::size_t c = 0; c < charge_sets.size(); ++c) {
        out[c].value = total.acc[c].mean * scale;
        out[c].std_error = total.acc[c].std_error() * scale;
        out[c].samples = total.acc[c].n;
    }
    return out;
}

}  // namespace

std::vector<McEstimate> canonical_partition_set(const ThermalParams& p,
                                                const cov::CovarianceModel& w,
                                                const CutoffFunction& g, int n,
                                                std::span<const int> qs, const McConfig& cfg) {
    p.validate();
    if (n < 0 || n > 6) throw CapacityError("canonical_partition: order outside 0..6");
    std::vector<std::vector<double>> charge_sets;
    for (int q : qs) {
        if (std::abs(q) > n)
            throw std::invalid_argument("canonical_partition: |q| must not exceed n");
        std::vector<double> ch(2 * n);
        for (int i = 0; i < 2 * n; ++i) ch[i] = (i < n + q) ? p.coupling_a : -p.coupling_a;
        charge_sets.push_back(std::move(ch));
    }
    if (n == 0) {
        std::vector<McEstimate> out(qs.size());
        for (auto& e : out) e.value = 1.0;
        return out;
    }
    return charged_moments(p, w, g, 2 * n, charge_sets, cfg);
}

McEstimate canonical_partition(const ThermalParams& p, const cov::CovarianceModel& w,
                               const CutoffFunction& g, int n, int q, const McConfig& cfg) {
    const int qarr[1] = {q};
    return canonical_partition_set(p, w, g, n, qarr, cfg)[0];
}

GrandPartitions grand_partitions(const ThermalParams& p, const cov::CovarianceModel& w,
                                 const CutoffFunction& g, double z, int n_max,
                                 const McConfig& cfg) {
    if (n_max > 6) throw CapacityError("grand_partitions: n_max above the sign-enumeration cap");
    GrandPartitions out;
    FieldConfiguration zero{};
    double fact = 1.0;
    for (int k = 0; k <= n_max; ++k) {
        if (k > 0) fact *= k;
        McEstimate mk;
        if (k == 0) {
            mk.value = 1.0;
        } else {
            const ComplexMcEstimate ce = cos_power_moment(p, w, g, k, zero, cfg);
            mk.value = ce.value.real();
            mk.std_error = ce.std_error;
            mk.samples = ce.samples;
        }
        out.cos_moments.push_back(mk);
        const double coeff = std::pow(z, k) / fact;
        out.xi += coeff * mk.value;
        out.xi_err = std::hypot(out.xi_err, coeff * mk.std_error);
        if (k % 2 == 0) {
            out.xi_cosh += coeff * mk.value;
            out.xi_cosh_err = std::hypot(out.xi_cosh_err, coeff * mk.std_error);
        }
        if (k % 2 == 0) {
            const int nn = k / 2;
            McEstimate zn = canonical_partition(p, w, g, nn, 0, cfg);
            out.z_terms.push_back(zn);
            double nfact = 1.0;
            for (int i = 1; i <= nn; ++i) nfact *= i;
            const double zc = std::pow(z, 2 * nn) / (nfact * nfact);
            out.z_grand += zc * zn.value;
            out.z_err = std::hypot(out.z_err, zc * zn.std_error);
        }
    }
    // crude ratio test on the last two terms
    if (out.cos_moments.size() >= 3) {
        const double last = std::fabs(out.cos_moments.back().value) * std::pow(z, n_max);
        out.truncation_controlled = last < 0.5 * std::max(std::fabs(out.xi), 1.0);
    }
    return out;
}

namespace {

// points drawn once; Gram matrices of both kernels with analytic difference
// diagonal
Eigen::MatrixXd difference_gram(const KernelPair& pair, const std::vector<Point2>& pts) {
    const int n = static_cast<int>(pts.size());
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i) {
        G(i, i) = pair.diff_diag(pts[i].t, pts[i].x);
        for (int j = i + 1; j < n; ++j) {
            const double d = pair.big(pts[i].t, pts[i].x, pts[j].t, pts[j].x) -
                             pair.small(pts[i].t, pts[i].x, pts[j].t, pts[j].x);
            G(i, j) = G(j, i) = d;
        }
    }
    return G;
}

std::vector<Point2> cloud_from(const CutoffFunction& g, int n, std::uint64_t seed) {
    Rng rng(mix_seed({seed, 0xC10Dull}));
    std::vector<Point2> pts;
    pts.reserve(n);
    while (static_cast<int>(pts.size()) < n) {
        Point2 pt{0.0, 0.0};
        double w = draw_point(g, rng, pt.t, pt.x);
        if (w > 0.5) pts.push_back(pt);
    }
    return pts;
}

}  // namespace

InequalityReport conditioning_check(const ThermalParams& p, const KernelPair& pair,
                                    const CutoffFunction& g, int n_max, const McConfig& cfg) {
    p.validate();
    InequalityReport rep;
    // precondition: difference Gram PSD on a point cloud
    const std::vector<Point2> pts = cloud_from(g, 48, cfg.seed);
    const Eigen::MatrixXd G = difference_gram(pair, pts);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const double min_eig = es.eigenvalues().minCoeff();
    // tolerance covers the 1e-10 kernel evaluation noise across the cloud
    const double scale = std::max(1.0, G.cwiseAbs().maxCoeff());
    if (min_eig < -2e-7 * scale)
        throw PreconditionError("conditioning_check: difference Gram not PSD, min eigenvalue " +
                                std::to_string(min_eig));
    FieldConfiguration zero{};
    const double c = p.coupling_lambda / p.hbar;
    double big_sum = 0.0, small_sum = 0.0, err = 0.0;
    double fact = 1.0;
    for (int k = 0; k <= n_max; ++k) {
        if (k > 0) fact *= k;
        double mb = 1.0, ms = 1.0, eb = 0.0, es2 = 0.0;
        if (k > 0) {
            const ComplexMcEstimate b = cos_power_moment(p, pair.big, g, k, zero, cfg);
            const ComplexMcEstimate s = cos_power_moment(p, pair.small, g, k, zero, cfg);
            mb = b.value.real();
            ms = s.value.real();
            eb = b.std_error;
            es2 = s.std_error;
        }
        const double coeff = std::pow(c, k) / fact;
        big_sum += coeff * mb;
        small_sum += coeff * ms;
        err = std::hypot(err, coeff * std::hypot(eb, es2));
        rep.add("order_" + std::to_string(k) + "_moment", ms, mb, std::hypot(eb, es2));
    }
    rep.add("truncated_exponential", small_sum, big_sum, err);
    return rep;
}

InequalityReport inverse_conditioning_check(const ThermalParams& p, const KernelPair& pair,
                                            const CutoffFunction& g, double K, int n_max,
                                            const McConfig& cfg) {
    p.validate();
    InequalityReport rep;
    const std::vector<Point2> pts = cloud_from(g, 48, cfg.seed);
    // w1 >= w0 on mean-zero coefficient vectors
    const Eigen::MatrixXd G = difference_gram(pair, pts);
    const int n = static_cast<int>(pts.size());
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) -
                        Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P * G * P);
    const double min_eig = es.eigenvalues().minCoeff();
    const double scale = std::max(1.0, G.cwiseAbs().maxCoeff());
    if (min_eig < -2e-7 * scale)
        throw PreconditionError(
            "inverse_conditioning_check: w1 - w0 not PSD on mean-zero vectors, min eigenvalue " +
            std::to_string(min_eig));
    // diagonal bound on the grid
    for (const auto& pt : pts)
        if (pair.diff_diag(pt.t, pt.x) > K * (1.0 + 1e-9) + 1e-12)
            throw PreconditionError("inverse_conditioning_check: diagonal bound K violated: " +
                                    std::to_string(pair.diff_diag(pt.t, pt.x)) + " > " +
                                    std::to_string(K));
    const double a2K = p.coupling_a * p.coupling_a * p.hbar * K;
    // Z_n level with common random numbers
    for (int k = 1; k <= n_max; ++k) {
        const McEstimate z1 = canonical_partition(p, pair.big, g, k, 0, cfg);
        const McEstimate z0 = canonical_partition(p, pair.small, g, k, 0, cfg);
        rep.add("Z_" + std::to_string(k) + "_level", z1.value,
                std::exp(k * a2K) * z0.value,
                std::hypot(z1.std_error, std::exp(k * a2K) * z0.std_error));
    }
    // Xi level: Xi(w1, g) <= 2 Xi(w0, 2 e^{a^2 hbar K/2} g)
    FieldConfiguration zero{};
    const double c = p.coupling_lambda / p.hbar;
    const double boost = 2.0 * std::exp(0.5 * a2K);
    double lhs = 0.0, rhs = 0.0, err = 0.0;
    double fact = 1.0;
    for (int k = 0; k <= n_max; ++k) {
        if (k > 0) fact *= k;
        double m1 = 1.0, m0 = 1.0, e1 = 0.0, e0 = 0.0;
        if (k > 0) {
            const ComplexMcEstimate b = cos_power_moment(p, pair.big, g, k, zero, cfg);
            const ComplexMcEstimate s = cos_power_moment(p, pair.small, g, k, zero, cfg);
            m1 = b.value.real();
            m0 = s.value.real();
            e1 = b.std_error;
            e0 = s.std_error;
        }
        lhs += std::pow(c, k) / fact * m1;
        rhs += std::pow(boost * c, k) / fact * m0;
        err = std::hypot(err, std::pow(c, k) / fact * e1);
        err = std::hypot(err, std::pow(boost * c, k) / fact * e0);
    }
    rep.add("Xi_level", lhs, 2.0 * rhs, err);
    return rep;
}

InequalityReport jensen_check(const ThermalParams& p, const cov::CovarianceModel& w,
                              const JensenSetup& setup, const McConfig& cfg) {
    (void)p;
    InequalityReport rep;
    const int n = static_cast<int>(setup.grid.size());
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            G(i, j) = w(setup.grid[i].t, setup.grid[i].x, setup.grid[j].t, setup.grid[j].x);
    Eigen::LLT<Eigen::MatrixXd> llt(G + 1e-12 * G.trace() / n * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() != Eigen::Success)
        throw PreconditionError("jensen_check: covariance Gram matrix has no Cholesky factor");
    const Eigen::MatrixXd L = llt.matrixL();
    auto fpoly = [&](double x) {
        double v = 0.0;
        for (std::size_t k = setup.convex_poly.size(); k-- > 0;)
            v = v * x + setup.convex_poly[k];
        return v;
    };
    Accumulator accG, accF;
    Rng rng(mix_seed({cfg.seed, 0x1E45ull}));
    Eigen::VectorXd zvec(n), phi(n);
    std::vector<double> field(n);
    for (long long s = 0; s < cfg.samples; ++s) {
        for (int i = 0; i < n; ++i) zvec(i) = rng.normal();
        phi = L * zvec;
        for (int i = 0; i < n; ++i) field[i] = phi(i);
        const double Gv = setup.functional(field);
        accG.add(Gv);
        accF.add(fpoly(Gv));
    }
    const double fmean = fpoly(accG.mean);
    // delta-method error of f(mean G)
    const double h = std::max(1e-6, 1e-6 * std::fabs(accG.mean));
    const double fprime = (fpoly(accG.mean + h) - fpoly(accG.mean - h)) / (2.0 * h);
    const double err = std::hypot(accF.std_error(), fprime * accG.std_error());
    rep.add("jensen_gap", fmean, accF.mean, err);
    return rep;
}

InequalityReport holder_translation_check(const ThermalParams& p, const cov::CovarianceModel& w,
                                          int n, const McConfig& cfg) {
    p.validate();
    if (n < 1 || n > 6) throw CapacityError("holder_translation_check: n outside 1..6");
    InequalityReport rep;
    const double a = p.coupling_a;
    // A_i = cosine vertex on the unit square shifted by i cells in space;
    // identical local coordinates on both sides (common random numbers)
    struct Partial {
        Accumulator lhs, rhs;
    };
    auto run_chunk = [&](long long chunk, long long cnt) {
        Partial part;
        Rng rng(mix_seed({cfg.seed, 0x401DE4ull, static_cast<std::uint64_t>(chunk)}));
        std::vector<double> lt(n), lx(n);
        for (long long s = 0; s < cnt; ++s) {
            for (int i = 0; i < n; ++i) {
                lt[i] = rng.uniform();
                lx[i] = rng.uniform();
            }
            const auto signsum = [&](bool translated) {
                double total = 0.0;
                for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
                    double expo = 0.0;
                    for (int i = 0; i < n; ++i)
                        for (int j = i + 1; j < n; ++j) {
                            const double ai = ((mask >> i) & 1) ? a : -a;
                            const double aj = ((mask >> j) & 1) ? a : -a;
                            const double xi = lx[i] + (translated ? i : 0);
                            const double xj = lx[j] + (translated ? j : 0);
                            expo -= ai * aj * p.hbar * w(lt[i], xi, lt[j], xj);
                        }
                    total += std::exp(expo);
                }
                return total / std::pow(2.0, n);
            };
            part.lhs.add(signsum(true));
            part.rhs.add(signsum(false));
        }
        return part;
    };
    auto merge = [](Partial& x, const Partial& y) {
        x.lhs.merge(y.lhs);
        x.rhs.merge(y.rhs);
    };
    const Partial total = parallel_chunks<Partial>(cfg.samples, cfg.workers, run_chunk, merge);
    rep.add("holder_translates_n" + std::to_string(n), std::fabs(total.lhs.mean), total.rhs.mean,
            std::hypot(total.lhs.std_error(), total.rhs.std_error()));

    // Cauchy-Schwarz special case: A = V_a V_a (two like charges)
    struct Partial2 {
        Accumulator two, four;
    };
    auto run_cs = [&](long long chunk, long long cnt) {
        Partial2 part;
        Rng rng(mix_seed({cfg.seed, 0xC5C5ull, static_cast<std::uint64_t>(chunk)}));
        for (long long s = 0; s < cnt; ++s) {
            double t[4], x[4];
            for (int i = 0; i < 4; ++i) {
                t[i] = rng.uniform();
                x[i] = rng.uniform();
            }
            const double w01 = w(t[0], x[0], t[1], x[1]);
            part.two.add(std::exp(-a * a * p.hbar * w01));
            // A* A: charges (-a, -a, +a, +a)
            double expo = 0.0;
            const double ch[4] = {-a, -a, a, a};
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j) expo -= ch[i] * ch[j] * p.hbar * w(t[i], x[i], t[j], x[j]);
            part.four.add(std::exp(expo));
        }
        return part;
    };
    auto merge2 = [](Partial2& x, const Partial2& y) {
        x.two.merge(y.two);
        x.four.merge(y.four);
    };
    const Partial2 cs = parallel_chunks<Partial2>(cfg.samples, cfg.workers, run_cs, merge2);
    rep.add("cauchy_schwarz_sq", cs.two.mean * cs.two.mean, cs.four.mean,
            std::hypot(2.0 * std::fabs(cs.two.mean) * cs.two.std_error(), cs.four.std_error()));
    return rep;
}

double cauchy_cell_constant(double alpha_p, double mu) {
    if (!(alpha_p > 0.0 && alpha_p < 1.0))
        throw PreconditionError("cauchy_cell_constant: need 0 < alpha p < 1");
    return std::pow(2.0 * mu, 2.0 - alpha_p) / ((1.0 - alpha_p) * (2.0 - alpha_p));
}

double convergence_majorant_term(const ThermalParams& p, const MajorantParts& parts, int n) {
    p.validate();
    const double alpha = p.alpha();
    if (!(parts.p_exp >= 1.0 && parts.p_exp * alpha < 1.0))
        throw PreconditionError("convergence_majorant_term: p outside [1, 1/alpha)");
    const double C = cauchy_cell_constant(alpha * parts.p_exp, parts.mu);
    const double a2K = p.coupling_a * p.coupling_a * p.hbar * parts.K_kernel;
    const double lam_eff = p.coupling_lambda * parts.volume_factor;
    double log_term = std::log(2.0);
    log_term += n * alpha * std::log(2.0 * parts.mu);
    log_term += n * std::log(2.0 * lam_eff / p.hbar) + n * 0.5 * a2K;
    log_term += n * std::log(parts.g_norm_q);
    log_term += n / parts.p_exp * std::log(C);
    double lgamma_n1 = std::lgamma(n + 1.0);
    log_term -= (1.0 - 1.0 / parts.p_exp) * lgamma_n1;
    return std::exp(log_term);
}

int majorant_ratio_threshold(const ThermalParams& p, const MajorantParts& parts) {
    double prev = convergence_majorant_term(p, parts, 0);
    for (int n = 1; n <= 400; ++n) {
        const double cur = convergence_majorant_term(p, parts, n);
        if (cur < prev) return n - 1;
        prev = cur;
    }
    return 400;
}

}  // namespace sgt::gas
