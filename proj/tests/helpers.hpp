#pragma once

// Shared test utilities: independent brute-force oracles and small fixture
// builders. Everything here stays implementation-agnostic on purpose.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "iris/image.hpp"
#include "iris/localization.hpp"

namespace testutil {

// First-order statistics computed the slow way in extended precision.
struct OracleStats {
    double range, mean, gmean, hmean, stddev, variance, median;
};

inline OracleStats oracle_stats(const std::vector<double>& samples, double zero_clamp = 1e-6) {
    std::vector<long double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const size_t n = s.size();
    long double sum = 0.0L, logsum = 0.0L, invsum = 0.0L;
    for (long double v : s) {
        sum += v;
        long double c = std::max<long double>(v, zero_clamp);
        logsum += std::log(c);
        invsum += 1.0L / c;
    }
    long double mean = sum / n;
    long double sq = 0.0L;
    for (long double v : s) sq += (v - mean) * (v - mean);
    OracleStats o;
    o.range = static_cast<double>(s.back() - s.front());
    o.mean = static_cast<double>(mean);
    o.gmean = static_cast<double>(std::exp(logsum / n));
    o.hmean = static_cast<double>(n / invsum);
    o.variance = static_cast<double>(sq / n);
    o.stddev = static_cast<double>(std::sqrt(sq / n));
    o.median = static_cast<double>(n % 2 ? s[n / 2] : (s[n / 2 - 1] + s[n / 2]) / 2.0L);
    return o;
}

inline iris::GrayImage random_image(std::mt19937& rng, int w, int h) {
    iris::GrayImage img(w, h);
    std::uniform_int_distribution<int> d(0, 255);
    for (auto& p : img.data) p = static_cast<uint8_t>(d(rng));
    return img;
}

// Filled disk on a contrasting background with a ~1.5 px soft edge so the
// gradient peaks at the true radius.
inline iris::GrayImage render_disk(int w, int h, double cx, double cy, double r, uint8_t inside,
                                   uint8_t outside) {
    iris::GrayImage img(w, h, outside);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double d = std::hypot(x - cx, y - cy);
            double t = std::clamp((d - r) / 1.5 + 0.5, 0.0, 1.0);  // 0 inside, 1 outside
            double v = inside + t * (static_cast<double>(outside) - inside);
            img.at(x, y) = static_cast<uint8_t>(std::lround(v));
        }
    return img;
}

// Ring of edge pixels at rounded distance r from the center.
inline iris::EdgeMap ring_edges(int w, int h, double cx, double cy, double r) {
    iris::EdgeMap edges(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double d = std::hypot(x - cx, y - cy);
            if (std::llround(d) == std::llround(r)) edges.set(x, y, true);
        }
    return edges;
}

}  // namespace testutil
