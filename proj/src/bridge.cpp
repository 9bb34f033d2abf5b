#include "sgt/bridge.hpp"

#include <cmath>
#include <vector>

namespace sgt::dirichlet {

double theta_weight(double beta, double T, double u) {
    if (!(T > 0.0)) throw std::domain_error("theta_weight: T must be > 0");
    const double crossover = beta * beta / (2.0 * kPi);
    if (T >= crossover) {
        // frequency sum: terms exp(-(2 pi n / beta)^2 T / 2)
        double sum = 1.0;
        const double w1 = 2.0 * kPi / beta;
        for (int n = 1; n <= 512; ++n) {
            const double term = 2.0 * std::exp(-0.5 * w1 * w1 * n * n * T) * std::cos(w1 * n * u);
            sum += term;
            if (std::fabs(term) < 1e-14 * std::fabs(sum)) break;
        }
        return sum;
    }
    // modular dual: (beta / sqrt(2 pi T)) sum_k exp(-(u - k beta)^2 / (2 T))
    double sum = 0.0;
    const double pre = beta / std::sqrt(2.0 * kPi * T);
    for (int k = 0; k <= 512; ++k) {
        double term = std::exp(-(u - k * beta) * (u - k * beta) / (2.0 * T));
        if (k > 0) term += std::exp(-(u + k * beta) * (u + k * beta) / (2.0 * T));
        sum += term;
        if (k > 1 && term < 1e-14 * sum) break;
    }
    return pre * sum;
}

namespace {

struct BridgePartial {
    Accumulator acc;
};

}  // namespace

BridgeEstimate bridge_estimator(const ThermalParams& p, const BondSet& touch,
                                const BondSet& avoid, double u, double x, double y,
                                const McConfig& cfg) {
    validate_bonds(touch);
    validate_bonds(avoid);
    for (int t : touch)
        for (int a : avoid)
            if (t == a)
                throw std::invalid_argument("bridge_estimator: touch and avoid overlap");
    if (!(u > 0.0 && u < p.beta))
        throw std::domain_error("bridge_estimator: u must be interior to (0, beta)");

    std::vector<int> levels(touch);
    levels.insert(levels.end(), avoid.begin(), avoid.end());
    const std::size_t n_touch = touch.size();
    const double m = p.mass;
    const double rate = 0.5 * m * m;
    const double norm = 1.0 / (2.0 * p.beta);

    auto run_chunk = [&](long long chunk, long long n) {
        BridgePartial part;
        Rng rng(mix_seed({cfg.seed, 0xB51D6Eull, static_cast<std::uint64_t>(chunk)}));
        std::vector<bool> hit(levels.size());
        for (long long s = 0; s < n; ++s) {
            const double T = rng.exponential(rate);
            // importance weight against the exponential proposal
            const double kxy = std::exp(-(x - y) * (x - y) / (2.0 * T)) / std::sqrt(2.0 * kPi * T);
            double w = norm * theta_weight(p.beta, T, u) * kxy / rate;
            // bridge skeleton; crossing decided per segment by the exact
            // bridge-minimum law, never by sign checks of the knots
            const int nseg = std::max<int>(16, static_cast<int>(std::ceil(4.0 * T)));
            const double dt = T / nseg;
            std::fill(hit.begin(), hit.end(), false);
            double cur = x;
            double tleft = T;
            for (int k = 0; k < nseg; ++k) {
                const double mean = cur + (y - cur) * dt / tleft;
                const double var = dt * (tleft - dt) / tleft;
                const double nxt = (k == nseg - 1) ? y : mean + std::sqrt(std::max(var, 0.0)) * rng.normal();
                for (std::size_t li = 0; li < levels.size(); ++li) {
                    if (hit[li]) continue;
                    const double b = levels[li];
                    const double d1 = cur - b, d2 = nxt - b;
                    if (d1 * d2 <= 0.0) {
                        hit[li] = true;
                    } else if (rng.bernoulli(std::exp(-2.0 * d1 * d2 / dt))) {
                        hit[li] = true;
                    }
                }
                cur = nxt;
                tleft -= dt;
            }
            bool keep = true;
            for (std::size_t li = 0; li < n_touch && keep; ++li) keep = hit[li];
            for (std::size_t li = n_touch; li < levels.size() && keep; ++li) keep = !hit[li];
            part.acc.add(keep ? w : 0.0);
        }
        return part;
    };
    auto merge = [](BridgePartial& a, const BridgePartial& b) { a.acc.merge(b.acc); };
    const BridgePartial total =
        parallel_chunks<BridgePartial>(cfg.samples, cfg.workers, run_chunk, merge);

    BridgeEstimate out;
    out.value = total.acc.mean;
    out.std_error = total.acc.std_error();
    out.samples = total.acc.n;
    out.precision_warning =
        out.std_error > cfg.target_rel_error * std::max(std::fabs(out.value), 1e-12);
    return out;
}

}  // namespace sgt::dirichlet
