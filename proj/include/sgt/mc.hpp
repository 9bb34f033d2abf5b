#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "sgt/rng.hpp"

namespace sgt {

// Welford accumulator for a scalar stream.
struct Accumulator {
    long long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double std_error() const {
        return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
    }
    // exact merge of two disjoint streams
    void merge(const Accumulator& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double d = o.mean - mean;
        const double nn = static_cast<double>(n + o.n);
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / nn;
        mean += d * static_cast<double>(o.n) / nn;
        n += o.n;
    }
};

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    long long samples = 0;
    bool precision_warning = false;
};

// Sampling controls shared by every Monte Carlo entry point.
struct McConfig {
    std::uint64_t seed = 1;
    long long samples = 20000;
    int workers = 1;
    double target_rel_error = 0.05;
};

struct ComplexMcEstimate {
    std::complex<double> value;
    double std_error = 0.0;  // combined error of Re/Im
    long long samples = 0;
    long long rejected = 0;
    bool precision_warning = false;
};

inline constexpr long long kChunkSize = 4096;

// Deterministic chunked parallel driver. The chunk layout depends only on
// n_samples, never on the worker count, and partials are merged in a fixed
// pairwise tree, so results are identical for any number of workers.
template <class Partial, class ChunkFn, class MergeFn>
Partial parallel_chunks(long long n_samples, int workers, ChunkFn&& run_chunk, MergeFn&& merge) {
    const long long n_chunks = (n_samples + kChunkSize - 1) / kChunkSize;
    std::vector<Partial> partials(static_cast<std::size_t>(n_chunks));
    if (workers <= 1 || n_chunks <= 1) {
        for (long long c = 0; c < n_chunks; ++c) {
            const long long lo = c * kChunkSize;
            const long long hi = std::min(n_samples, lo + kChunkSize);
            partials[static_cast<std::size_t>(c)] = run_chunk(c, hi - lo);
        }
    } else {
        std::vector<std::thread> pool;
        std::atomic<long long> next{0};
        const int nw = std::min<long long>(workers, n_chunks);
        for (int w = 0; w < nw; ++w) {
            pool.emplace_back([&]() {
                for (;;) {
                    const long long c = next.fetch_add(1);
                    if (c >= n_chunks) break;
                    const long long lo = c * kChunkSize;
                    const long long hi = std::min(n_samples, lo + kChunkSize);
                    partials[static_cast<std::size_t>(c)] = run_chunk(c, hi - lo);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    // pairwise tree reduction in index order
    std::size_t width = partials.size();
    while (width > 1) {
        const std::size_t half = (width + 1) / 2;
        for (std::size_t i = 0; i + half < width; ++i) merge(partials[i], partials[i + half]);
        width = half;
    }
    return partials.empty() ? Partial{} : partials[0];
}

}  // namespace sgt
