#pragma once

// Local binary pattern operators: the 3x3 code with its contrast companion,
// the general circularly sampled (P, R) operator, and uniform-pattern
// binning.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "iris/common.hpp"

namespace iris {

struct LbpConfig {
    int neighbors = 8;     // P
    int radius = 1;        // R
    bool uniform = true;   // bin uniform patterns separately, rest shared
    bool append_contrast = false;

    void validate() const {
        bool ok = (neighbors == 8 && radius == 1) || (neighbors == 16 && radius == 2) ||
                  (neighbors == 24 && radius == 3);
        if (!ok)
            throw ParameterError(strf("lbp: unsupported (P=%d, R=%d); supported: (8,1), (16,2), (24,3)",
                                      neighbors, radius));
        if (!uniform && neighbors > 16)
            throw ParameterError("lbp: non-uniform binning with P=24 needs 2^24 bins per region; use uniform");
    }
};

// 3x3 neighborhood in row-major order; index 4 is the center. Neighbors are
// packed clockwise from the top-left corner, bit k weighted 2^k:
// TL, T, TR, R, BR, B, BL, L. A neighbor >= center sets its bit.
inline int lbp_code_3x3(const std::array<double, 9>& n) {
    const double c = n[4];
    static constexpr int order[8] = {0, 1, 2, 5, 8, 7, 6, 3};
    int code = 0;
    for (int k = 0; k < 8; ++k)
        if (n[static_cast<size_t>(order[k])] >= c) code |= 1 << k;
    return code;
}

// Contrast: mean of the neighbors at bit 1 minus mean of the neighbors at
// bit 0; an empty side contributes 0.
inline double contrast_3x3(const std::array<double, 9>& n) {
    const double c = n[4];
    double hi = 0.0, lo = 0.0;
    int nhi = 0, nlo = 0;
    static constexpr int order[8] = {0, 1, 2, 5, 8, 7, 6, 3};
    for (int k = 0; k < 8; ++k) {
        double v = n[static_cast<size_t>(order[k])];
        if (v >= c) {
            hi += v;
            ++nhi;
        } else {
            lo += v;
            ++nlo;
        }
    }
    double mhi = nhi ? hi / nhi : 0.0;
    double mlo = nlo ? lo / nlo : 0.0;
    return mhi - mlo;
}

// Bit changes over the circular sequence, wrap-around pair included.
inline int transition_count(uint32_t code, int P) {
    int t = 0;
    for (int k = 0; k < P; ++k) {
        int a = (code >> k) & 1;
        int b = (code >> ((k + 1) % P)) & 1;
        t += a != b;
    }
    return t;
}

inline bool is_uniform(uint32_t code, int P) { return transition_count(code, P) <= 2; }

// All uniform codes for P bits, ascending. Built directly: the all-zero and
// all-one codes plus every cyclic run of 1s of length 1..P-1 at P positions.
inline std::vector<uint32_t> make_uniform_codes(int P) {
    std::vector<uint32_t> codes;
    codes.push_back(0);
    codes.push_back(P == 32 ? 0xFFFFFFFFu : (1u << P) - 1);
    for (int len = 1; len < P; ++len) {
        uint32_t run = (1u << len) - 1;
        for (int pos = 0; pos < P; ++pos) {
            uint32_t rotated = ((run << pos) | (run >> (P - pos)));
            if (P < 32) rotated &= (1u << P) - 1;
            codes.push_back(rotated);
        }
    }
    std::sort(codes.begin(), codes.end());
    return codes;
}

// Uniform-pattern histogram binning: each uniform code owns a bin, ordered
// by code value; every non-uniform code shares the final bin.
class UniformBinner {
public:
    explicit UniformBinner(int P) : p_(P), codes_(make_uniform_codes(P)) {}

    int bin_count() const { return static_cast<int>(codes_.size()) + 1; }

    int bin(uint32_t code) const {
        auto it = std::lower_bound(codes_.begin(), codes_.end(), code);
        if (it != codes_.end() && *it == code) return static_cast<int>(it - codes_.begin());
        return static_cast<int>(codes_.size());
    }

    int neighbors() const { return p_; }

private:
    int p_;
    std::vector<uint32_t> codes_;
};

inline int uniform_bin(uint32_t code, int P) { return UniformBinner(P).bin(code); }

inline int lbp_bin_count(const LbpConfig& cfg) {
    if (cfg.uniform) return cfg.neighbors * (cfg.neighbors - 1) + 3;
    return 1 << cfg.neighbors;
}

// ------------------------------------------------- circular (P, R) operator

// Non-owning view of a row-major grid of real intensities.
struct GridView {
    int width = 0;
    int height = 0;
    const double* data = nullptr;
    double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
};

namespace detail {

// Sample offsets on the radius-R circle, angle 2*pi*k/P from (+R, 0).
// Rounded to 12 decimals so axis-aligned samples are exact and the bit
// pattern never depends on trigonometric rounding fuzz.
inline std::vector<Point2> circle_offsets(int P, double R) {
    std::vector<Point2> offs(static_cast<size_t>(P));
    auto round12 = [](double v) { return std::round(v * 1e12) / 1e12; };
    for (int k = 0; k < P; ++k) {
        double a = 2.0 * M_PI * k / P;
        offs[static_cast<size_t>(k)] = Point2{round12(R * std::cos(a)), round12(R * std::sin(a))};
    }
    return offs;
}

// Bilinear sample with the support cells it touched. Near-integer
// coordinates snap so exact lattice samples read a single pixel. Columns
// wrap cyclically when wrap_columns is set; rows never wrap. Returns
// nothing when the support leaves the grid.
struct BilinearSample {
    double value = 0.0;
    int support[4][2];  // (x, y) pairs
    int support_count = 0;
};

inline std::optional<BilinearSample> bilinear_sample(const GridView& g, double sx, double sy,
                                                     bool wrap_columns) {
    constexpr double kSnap = 1e-6;
    double rx = std::round(sx), ry = std::round(sy);
    if (std::abs(sx - rx) < kSnap) sx = rx;
    if (std::abs(sy - ry) < kSnap) sy = ry;

    int x0 = static_cast<int>(std::floor(sx));
    int y0 = static_cast<int>(std::floor(sy));
    double fx = sx - x0, fy = sy - y0;
    int nx = fx == 0.0 ? 1 : 2;
    int ny = fy == 0.0 ? 1 : 2;

    if (y0 < 0 || y0 + ny - 1 >= g.height) return std::nullopt;
    if (!wrap_columns && (x0 < 0 || x0 + nx - 1 >= g.width)) return std::nullopt;

    BilinearSample out;
    double wx[2] = {1.0 - fx, fx};
    double wy[2] = {1.0 - fy, fy};
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            int xx = x0 + i;
            if (wrap_columns) {
                xx %= g.width;
                if (xx < 0) xx += g.width;
            }
            int yy = y0 + j;
            out.value += wx[i] * wy[j] * g.at(xx, yy);
            out.support[out.support_count][0] = xx;
            out.support[out.support_count][1] = yy;
            ++out.support_count;
        }
    }
    return out;
}

}  // namespace detail

// General LBP code at real-valued center (x, y): P circular samples,
// bilinear-interpolated, thresholded >= the center value, bit k weighted
// 2^k. The sampling circle must lie inside the grid.
inline uint32_t lbp_code_general(const GridView& grid, double x, double y, const LbpConfig& cfg) {
    cfg.validate();
    const double R = cfg.radius;
    if (x - R < 0 || x + R > grid.width - 1 || y - R < 0 || y + R > grid.height - 1)
        throw ParameterError(strf("lbp_code_general: circle R=%g at (%g, %g) leaves the %dx%d grid", R, x,
                                  y, grid.width, grid.height));
    auto center = detail::bilinear_sample(grid, x, y, false);
    auto offsets = detail::circle_offsets(cfg.neighbors, R);
    uint32_t code = 0;
    for (int k = 0; k < cfg.neighbors; ++k) {
        auto s = detail::bilinear_sample(grid, x + offsets[static_cast<size_t>(k)].x,
                                         y + offsets[static_cast<size_t>(k)].y, false);
        if (s->value >= center->value) code |= 1u << k;
    }
    return code;
}

// Contrast for the general operator: mean of samples >= center minus mean of
// samples below it; an empty side contributes 0.
inline double contrast_general(const GridView& grid, double x, double y, const LbpConfig& cfg) {
    cfg.validate();
    const double R = cfg.radius;
    if (x - R < 0 || x + R > grid.width - 1 || y - R < 0 || y + R > grid.height - 1)
        throw ParameterError(strf("contrast_general: circle R=%g at (%g, %g) leaves the %dx%d grid", R, x,
                                  y, grid.width, grid.height));
    auto center = detail::bilinear_sample(grid, x, y, false);
    auto offsets = detail::circle_offsets(cfg.neighbors, R);
    double hi = 0.0, lo = 0.0;
    int nhi = 0, nlo = 0;
    for (int k = 0; k < cfg.neighbors; ++k) {
        auto s = detail::bilinear_sample(grid, x + offsets[static_cast<size_t>(k)].x,
                                         y + offsets[static_cast<size_t>(k)].y, false);
        if (s->value >= center->value) {
            hi += s->value;
            ++nhi;
        } else {
            lo += s->value;
            ++nlo;
        }
    }
    return (nhi ? hi / nhi : 0.0) - (nlo ? lo / nlo : 0.0);
}

}  // namespace iris
