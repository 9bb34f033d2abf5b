#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace sgt {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int panels = 0;
    bool converged = true;
};

namespace quad_detail {

// 15-point Kronrod / 7-point Gauss pair (QUADPACK dqk15 abscissae).
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
inline void gk15(F&& f, double a, double b, double& result, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double fsum = f(c - dx) + f(c + dx);
        resk += kWgk[j] * fsum;
        if (j % 2 == 1) resg += kWg[j / 2] * fsum;
    }
    result = resk * h;
    const double diff = std::fabs((resk - resg) * h);
    // QUADPACK error heuristic
    err = diff * std::sqrt(diff) * 200.0;
    if (err > diff) err = diff;
    if (err < 1e-300) err = diff;
}

}  // namespace quad_detail

// Adaptive Gauss-Kronrod on [a, b] to absolute tolerance. Bisects the
// worst panel first.
template <class F>
QuadResult gk_adaptive(F&& f, double a, double b, double abs_tol, int max_panels = 4000) {
    struct Panel {
        double a, b, value, err;
    };
    std::vector<Panel> panels;
    panels.reserve(64);
    Panel p0{a, b, 0.0, 0.0};
    quad_detail::gk15(f, a, b, p0.value, p0.err);
    panels.push_back(p0);

    QuadResult out;
    for (;;) {
        double total_err = 0.0;
        int worst = 0;
        for (int i = 0; i < static_cast<int>(panels.size()); ++i) {
            total_err += panels[i].err;
            if (panels[i].err > panels[worst].err) worst = i;
        }
        if (total_err <= abs_tol || static_cast<int>(panels.size()) >= max_panels) {
            out.value = 0.0;
            // fixed summation order: by left endpoint
            std::vector<const Panel*> sorted;
            sorted.reserve(panels.size());
            for (const auto& p : panels) sorted.push_back(&p);
            std::sort(sorted.begin(), sorted.end(),
                      [](const Panel* x, const Panel* y) { return x->a < y->a; });
            for (const Panel* p : sorted) out.value += p->value;
            out.error_estimate = total_err;
            out.panels = static_cast<int>(panels.size());
            out.converged = total_err <= abs_tol;
            return out;
        }
        Panel w = panels[worst];
        const double mid = 0.5 * (w.a + w.b);
        Panel l{w.a, mid, 0.0, 0.0}, r{mid, w.b, 0.0, 0.0};
        quad_detail::gk15(f, l.a, l.b, l.value, l.err);
        quad_detail::gk15(f, r.a, r.b, r.value, r.err);
        panels[worst] = l;
        panels.push_back(r);
    }
}

QuadResult gk_adaptive_fn(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_panels = 4000);

}  // namespace sgt
