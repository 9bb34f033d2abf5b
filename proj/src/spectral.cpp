#include "sgt/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <sstream>

#include "sgt/special.hpp"

namespace sgt::spectral {

namespace {

double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

// entire function of s: I0(m sqrt(s)) for s >= 0, J0(m sqrt(-s)) for s < 0
double i0_entire(double m, double s) {
    const double z2 = m * m * s;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 200; ++k) {
        term *= z2 / (4.0 * k * k);
        sum += term;
        if (std::fabs(term) < 1e-17 * std::fabs(sum) + 1e-300) break;
    }
    return sum;
}

// entire part of the K0 log split: E(s) = sum H_k (m^2 s / 4)^k / (k!)^2
double k0_entire_series(double m, double s) {
    const double z2 = m * m * s;
    double term = 1.0, sum = 0.0, hk = 0.0;
    for (int k = 1; k <= 200; ++k) {
        term *= z2 / (4.0 * k * k);
        hk += 1.0 / k;
        const double c = term * hk;
        sum += c;
        if (std::fabs(c) < 1e-17 * std::fabs(sum) + 1e-300) break;
    }
    return sum;
}

}  // namespace

double WindowFunction::profile(double s) const {
    return smooth_step((2.0 * mu + decay_width - std::fabs(s)) / decay_width);
}

void validate_grid(const WindowFunction& win, const NullGrid& grid) {
    if (grid.n < 8 || (grid.n & (grid.n - 1)) != 0)
        throw std::invalid_argument("NullGrid: points per axis must be a power of two >= 8");
    if (!(grid.extent >= win.extent()))
        throw std::invalid_argument("NullGrid: extent does not cover the window support");
    // at least 8 points across a width of 2 mu / 10
    const double h = 2.0 * grid.extent / grid.n;
    if (h > 2.0 * win.mu / 10.0 / 8.0)
        throw PreconditionError("NullGrid: resolution insufficient for the cone decomposition");
}

double comparison_cone_value(const ThermalParams& p) {
    return (kEulerGamma + std::log(p.mass * p.mu_scale)) / (2.0 * kPi);
}

double s0_piece(const ThermalParams& p, double lorentz_sq) {
    if (lorentz_sq == 0.0) return 0.0;
    return -std::log(std::fabs(lorentz_sq) / 4.0) / (4.0 * kPi) *
           (1.0 - i0_entire(p.mass, lorentz_sq));
}

double comparison_difference(const ThermalParams& p, double lorentz_sq) {
    const double s = lorentz_sq;
    const double m = p.mass;
    if (s == 0.0) return comparison_cone_value(p);
    // Both sides of the cone share the K0 log split:
    //   H_m = -(1/4 pi) log|s| I0e(s) - (1/2 pi)(log(m/2)+gamma) I0e(s)
    //         + (1/2 pi) E(s)
    const double i0e = i0_entire(m, s);
    const double h0 = -std::log(std::fabs(s) / (4.0 * p.mu_scale * p.mu_scale)) / (4.0 * kPi);
    const double hm = -std::log(std::fabs(s)) / (4.0 * kPi) * i0e -
                      (std::log(m / 2.0) + kEulerGamma) / (2.0 * kPi) * i0e +
                      k0_entire_series(m, s) / (2.0 * kPi);
    return h0 - hm;
}

Eigen::MatrixXd comparison_kernel(const ThermalParams& p, const WindowFunction& win,
                                  const NullGrid& grid) {
    p.validate();
    validate_grid(win, grid);
    const int n = grid.n;
    const double h = 2.0 * grid.extent / n;
    Eigen::MatrixXd W(n, n);
    const auto node = [&](int j) { return (j - n / 2) * h; };
    // cell-averaged log factor for cells crossing a null axis
    const auto avg_log = [&](double c) {
        const double a = c - 0.5 * h, b = c + 0.5 * h;
        if (a * b > 0.0) return std::log(std::fabs(c));
        const auto prim = [](double t) { return t == 0.0 ? 0.0 : t * std::log(std::fabs(t)) - t; };
        return (prim(b) - prim(a)) / h;
    };
    for (int j = 0; j < n; ++j) {
        const double nu = node(j);
        for (int l = 0; l < n; ++l) {
            const double nv = node(l);
            const double om = win(nu, nv);
            if (om == 0.0) {
                W(j, l) = 0.0;
                continue;
            }
            const double s = -nu * nv;  // x^2 = -uv
            const bool cross = std::fabs(nu) <= 0.5 * h || std::fabs(nv) <= 0.5 * h;
            if (!cross) {
                W(j, l) = comparison_difference(p, s) * om;
            } else {
                // the s0 log kink integrated analytically over the cell, the
                // smooth remainder taken at the midpoint
                const double smooth = comparison_difference(p, s) - s0_piece(p, s);
                const double lavg = avg_log(nu) + avg_log(nv) - std::log(4.0);
                const double one_minus_i0 = 1.0 - i0_entire(p.mass, s);
                W(j, l) = (smooth - lavg / (4.0 * kPi) * one_minus_i0) * om;
            }
        }
    }
    return W;
}

namespace {

struct GridTransform {
    Eigen::MatrixXcd That;  // continuum-normalized transform, phases centered
    double dk = 0.0;
};

GridTransform transform(const Eigen::MatrixXd& W, double h) {
    const int n = static_cast<int>(W.rows());
    Eigen::MatrixXcd T(n, n);
    Eigen::FFT<double> fft;
    Eigen::VectorXcd row(n), out(n);
    for (int j = 0; j < n; ++j) {
        for (int l = 0; l < n; ++l) row(l) = W(j, l);
        fft.fwd(out, row);
        T.row(j) = out;
    }
    for (int l = 0; l < n; ++l) {
        Eigen::VectorXcd col = T.col(l);
        fft.fwd(out, col);
        T.col(l) = out;
    }
    // sample offset u_j = (j - n/2) h: Wtilde(k) = h^2 (-1)^(k+l) DFT
    GridTransform g;
    g.That.resize(n, n);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
            g.That(k, l) = h * h * (((k + l) % 2 == 0) ? 1.0 : -1.0) * T(k, l);
    g.dk = 2.0 * kPi / (n * h);
    return g;
}

}  // namespace

std::string SpectralSplit::provenance_json() const {
    std::ostringstream os;
    os.precision(15);
    os << "{\"K\":" << K << ",\"K_finest\":" << K_finest << ",\"pos_l1\":" << pos_l1
       << ",\"neg_l1\":" << neg_l1 << ",\"order\":" << order << ",\"mu\":" << mu
       << ",\"decay_width\":" << decay_width << ",\"mass\":" << mass << ",\"base_n\":" << base_n
       << ",\"refinement\":[";
    for (std::size_t i = 0; i < refinement.size(); ++i) {
        if (i) os << ",";
        os << "[" << refinement[i].first << "," << refinement[i].second << "]";
    }
    os << "]}";
    return os.str();
}

SpectralSplit k_constant(const ThermalParams& p, const WindowFunction& win, const NullGrid& base,
                         int refinements) {
    if (refinements < 3)
        throw std::invalid_argument("k_constant: need at least 3 dyadic refinements");
    SpectralSplit out;
    out.mu = win.mu;
    out.decay_width = win.decay_width;
    out.mass = p.mass;
    out.base_n = base.n;
    std::vector<double> ks;
    Eigen::MatrixXd Wfin;
    GridTransform Tfin;
    double hfin = 0.0;
    for (int r = 0; r < refinements; ++r) {
        NullGrid g = base;
        g.n = base.n << r;
        const double h = 2.0 * g.extent / g.n;
        const Eigen::MatrixXd W = comparison_kernel(p, win, g);
        const GridTransform T = transform(W, h);
        const double K = T.That.cwiseAbs().sum() * T.dk * T.dk / (4.0 * kPi * kPi);
        ks.push_back(K);
        out.refinement.emplace_back(h, K);
        if (r == refinements - 1) {
            Wfin = W;
            Tfin = T;
            hfin = h;
        }
    }
    const std::size_t nref = ks.size();
    const double d1 = std::fabs(ks[nref - 2] - ks[nref - 3]);
    const double d2 = std::fabs(ks[nref - 1] - ks[nref - 2]);
    if (!(d2 < d1)) {
        std::ostringstream os;
        os << "k_constant: refinement curve is not Cauchy:";
        for (auto& [h, k] : out.refinement) os << " K(" << h << ")=" << k;
        throw QuadratureError(os.str(), ks.back());
    }
    out.order = std::log2(d1 / d2);
    out.K_finest = ks.back();
    out.K = ks.back() + (ks[nref - 1] - ks[nref - 2]) / (std::pow(2.0, out.order) - 1.0);

    const int n = static_cast<int>(Tfin.That.rows());
    out.im_ratio = Tfin.That.imag().cwiseAbs().maxCoeff() /
                   std::max(Tfin.That.real().cwiseAbs().maxCoeff(), 1e-300);
    Eigen::MatrixXd re = Tfin.That.real();
    Eigen::MatrixXd pos = re.cwiseMax(0.0);
    Eigen::MatrixXd neg = (-re).cwiseMax(0.0);
    const double cell = Tfin.dk * Tfin.dk / (4.0 * kPi * kPi);
    out.pos_l1 = pos.sum() * cell;
    out.neg_l1 = neg.sum() * cell;
    out.parseval_kernel = Wfin.squaredNorm() * hfin * hfin;
    out.parseval_transform = Tfin.That.squaredNorm() * cell;

    // position-space split parts by the inverse transform, evaluated through
    // bilinear interpolation of the dense grid
    auto make_part = [n, hfin](const Eigen::MatrixXd& spec) {
        Eigen::MatrixXcd tmp(n, n);
        Eigen::FFT<double> fft;
        Eigen::VectorXcd row(n), outv(n);
        for (int k = 0; k < n; ++k) {
            for (int l = 0; l < n; ++l)
                row(l) = spec(k, l) * (((k + l) % 2 == 0) ? 1.0 : -1.0);
            fft.inv(outv, row);
            tmp.row(k) = outv;
        }
        for (int l = 0; l < n; ++l) {
            Eigen::VectorXcd col = tmp.col(l);
            fft.inv(outv, col);
            tmp.col(l) = outv;
        }
        Eigen::MatrixXd vals(n, n);
        const double scale = 1.0 / (hfin * hfin);
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) vals(j, l) = tmp(j, l).real() * scale;
        const double extent = n / 2 * hfin;
        return std::function<double(double, double)>(
            [vals, extent, hfin, n](double dt, double dx) {
                const double nu = dt - dx, nv = dt + dx;
                const double fu = (nu + extent) / hfin, fv = (nv + extent) / hfin;
                const int iu = static_cast<int>(std::floor(fu));
                const int iv = static_cast<int>(std::floor(fv));
                if (iu < 0 || iv < 0 || iu + 1 >= n || iv + 1 >= n) return 0.0;
                const double au = fu - iu, av = fv - iv;
                return (1 - au) * (1 - av) * vals(iu, iv) + au * (1 - av) * vals(iu + 1, iv) +
                       (1 - au) * av * vals(iu, iv + 1) + au * av * vals(iu + 1, iv + 1);
            });
    };
    out.n_part = make_part(neg);
    out.p_part = make_part(pos);
    return out;
}

}  // namespace sgt::spectral
