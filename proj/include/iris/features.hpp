#pragma once

// Regional LBP histograms over the normalized iris and the final feature
// vector with appended global histogram statistics.

#include <cstdint>
#include <string>
#include <vector>

#include "iris/common.hpp"
#include "iris/image.hpp"
#include "iris/lbp.hpp"
#include "iris/normalization.hpp"

namespace iris {

struct FeatureVector {
    std::vector<double> values;
    std::string config_tag;
    int label = -1;  // -1 = unlabeled

    size_t dimension() const { return values.size(); }
};

inline std::string lbp_config_tag(const LbpConfig& cfg) {
    return strf("lbp-P%d-R%d-%s-grid10x10-stats-global%s", cfg.neighbors, cfg.radius,
                cfg.uniform ? "u2" : "raw", cfg.append_contrast ? "-contrast" : "");
}

namespace detail {

// Per-cell accumulation over the normalized texture. Codes are computed at
// every pixel whose center is valid and whose sampling supports are valid;
// the angular direction wraps (the unwrapped texture is cyclic in theta),
// the radial direction does not.
struct CellAccumulator {
    std::vector<double> histogram;
    double contrast_sum = 0.0;
    long sites = 0;
};

inline void accumulate_region_codes(const NormalizedIris& norm, const LbpConfig& cfg,
                                    const UniformBinner* binner, std::vector<CellAccumulator>& cells,
                                    int grid_rows, int grid_cols) {
    const int H = norm.radial_res, W = norm.angular_res;
    const int cell_h = H / grid_rows, cell_w = W / grid_cols;
    GridView grid{W, H, norm.texture.data()};
    auto offsets = circle_offsets(cfg.neighbors, cfg.radius);
    const int bins = lbp_bin_count(cfg);

    for (auto& c : cells) c.histogram.assign(static_cast<size_t>(bins), 0.0);

    std::vector<double> samples(static_cast<size_t>(cfg.neighbors));
    for (int y = 0; y < H; ++y) {
        if (y - cfg.radius < 0 || y + cfg.radius > H - 1) continue;
        for (int x = 0; x < W; ++x) {
            if (!norm.ok(y, x)) continue;
            bool usable = true;
            for (int k = 0; k < cfg.neighbors && usable; ++k) {
                auto s = bilinear_sample(grid, x + offsets[static_cast<size_t>(k)].x,
                                         y + offsets[static_cast<size_t>(k)].y, /*wrap_columns=*/true);
                if (!s) {
                    usable = false;
                    break;
                }
                for (int t = 0; t < s->support_count; ++t)
                    if (!norm.ok(s->support[t][1], s->support[t][0])) {
                        usable = false;
                        break;
                    }
                samples[static_cast<size_t>(k)] = s->value;
            }
            if (!usable) continue;

            const double center = norm.tex(y, x);
            uint32_t code = 0;
            double hi = 0.0, lo = 0.0;
            int nhi = 0, nlo = 0;
            for (int k = 0; k < cfg.neighbors; ++k) {
                double v = samples[static_cast<size_t>(k)];
                if (v >= center) {
                    code |= 1u << k;
                    hi += v;
                    ++nhi;
                } else {
                    lo += v;
                    ++nlo;
                }
            }
            int bin = binner ? binner->bin(code) : static_cast<int>(code);
            CellAccumulator& cell =
                cells[static_cast<size_t>(y / cell_h) * grid_cols + static_cast<size_t>(x / cell_w)];
            cell.histogram[static_cast<size_t>(bin)] += 1.0;
            cell.contrast_sum += (nhi ? hi / nhi : 0.0) - (nlo ? lo / nlo : 0.0);
            ++cell.sites;
        }
    }
}

}  // namespace detail

// 10x10 grid of regional histograms over the normalized texture. Each
// histogram is normalized to sum 1; a cell where fewer than 25% of its
// pixels yield a code comes back all-zero.
inline std::vector<std::vector<double>> region_histograms(const NormalizedIris& norm,
                                                          const LbpConfig& cfg) {
    cfg.validate();
    constexpr int kGrid = 10;
    if (norm.radial_res % kGrid != 0 || norm.angular_res % kGrid != 0)
        throw DimensionError(strf("region_histograms: %dx%d texture not divisible into a %dx%d grid",
                                  norm.radial_res, norm.angular_res, kGrid, kGrid));

    std::vector<detail::CellAccumulator> cells(kGrid * kGrid);
    std::optional<UniformBinner> binner;
    if (cfg.uniform) binner.emplace(cfg.neighbors);
    detail::accumulate_region_codes(norm, cfg, binner ? &*binner : nullptr, cells, kGrid, kGrid);

    const long cell_area = (norm.radial_res / kGrid) * (norm.angular_res / kGrid);
    std::vector<std::vector<double>> out;
    out.reserve(cells.size());
    for (auto& cell : cells) {
        if (cell.sites * 4 < cell_area) {
            std::fill(cell.histogram.begin(), cell.histogram.end(), 0.0);
        } else {
            for (double& v : cell.histogram) v /= static_cast<double>(cell.sites);
        }
        out.push_back(std::move(cell.histogram));
    }
    return out;
}

// Feature vector: 100 regional histograms, then the seven histogram
// statistics of all valid texture intensities scaled into [0, 1] (variance
// by 1/255^2, the rest by 1/255), then optionally 100 per-cell mean
// contrasts (also scaled by 1/255).
inline FeatureVector feature_vector(const NormalizedIris& norm, const LbpConfig& cfg) {
    cfg.validate();
    constexpr int kGrid = 10;
    if (norm.radial_res % kGrid != 0 || norm.angular_res % kGrid != 0)
        throw DimensionError(strf("feature_vector: %dx%d texture not divisible into a %dx%d grid",
                                  norm.radial_res, norm.angular_res, kGrid, kGrid));

    std::vector<detail::CellAccumulator> cells(kGrid * kGrid);
    std::optional<UniformBinner> binner;
    if (cfg.uniform) binner.emplace(cfg.neighbors);
    detail::accumulate_region_codes(norm, cfg, binner ? &*binner : nullptr, cells, kGrid, kGrid);

    std::vector<double> intensities;
    intensities.reserve(norm.texture.size());
    for (size_t i = 0; i < norm.texture.size(); ++i)
        if (norm.valid[i]) intensities.push_back(norm.texture[i]);
    if (intensities.empty()) throw DataError("feature_vector: no valid texture pixels");
    HistogramStats stats = histogram_stats(intensities);

    const long cell_area = (norm.radial_res / kGrid) * (norm.angular_res / kGrid);
    FeatureVector fv;
    fv.config_tag = lbp_config_tag(cfg);
    fv.values.reserve(cells.size() * static_cast<size_t>(lbp_bin_count(cfg)) + 7 +
                      (cfg.append_contrast ? cells.size() : 0));
    for (auto& cell : cells) {
        if (cell.sites * 4 < cell_area) {
            fv.values.insert(fv.values.end(), cell.histogram.size(), 0.0);
        } else {
            for (double v : cell.histogram) fv.values.push_back(v / static_cast<double>(cell.sites));
        }
    }
    const double s = 1.0 / 255.0;
    fv.values.push_back(stats.range * s);
    fv.values.push_back(stats.mean * s);
    fv.values.push_back(stats.geometric_mean * s);
    fv.values.push_back(stats.harmonic_mean * s);
    fv.values.push_back(stats.std_dev * s);
    fv.values.push_back(stats.variance * s * s);
    fv.values.push_back(stats.median * s);
    if (cfg.append_contrast) {
        for (const auto& cell : cells) {
            double c = (cell.sites * 4 >= cell_area && cell.sites > 0)
                           ? cell.contrast_sum / static_cast<double>(cell.sites)
                           : 0.0;
            fv.values.push_back(c * s);
        }
    }
    return fv;
}

}  // namespace iris
