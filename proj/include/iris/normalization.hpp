#pragma once

// Noise masking of the iris annulus and the rubber-sheet unwrap to a fixed
// polar grid with a per-cell validity mask.

#include <cmath>
#include <vector>

#include "iris/common.hpp"
#include "iris/image.hpp"
#include "iris/localization.hpp"

namespace iris {

struct NoiseMaskParams {
    double dark_factor = 0.312;     // t_dark = dark_factor * mean intensity
    double bright_threshold = 240;  // specular highlight cut, absolute
};

struct NoiseMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> valid;  // nonzero = usable iris texture

    NoiseMask() = default;
    NoiseMask(int w, int h) : width(w), height(h), valid(static_cast<size_t>(w) * h, 0) {}
    bool at(int x, int y) const { return valid[static_cast<size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { valid[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
};

// A pixel is usable iris texture when it lies strictly between the pupil and
// iris circles and its intensity is neither eyelash-dark nor highlight-bright.
inline NoiseMask noise_mask(const GrayImage& img, const IrisGeometry& geom,
                            const NoiseMaskParams& params = {}) {
    const double t_dark = params.dark_factor * mean_intensity(img);
    const double t_bright = params.bright_threshold;
    NoiseMask mask(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double dp = std::hypot(x - geom.pupil.cx, y - geom.pupil.cy);
            if (dp <= geom.pupil.r) continue;
            double di = std::hypot(x - geom.iris.cx, y - geom.iris.cy);
            if (di >= geom.iris.r) continue;
            double v = img.at(x, y);
            mask.set(x, y, v >= t_dark && v <= t_bright);
        }
    }
    return mask;
}

struct NormalizationParams {
    int radial_res = 40;
    int angular_res = 240;
};

struct NormalizedIris {
    int radial_res = 0;           // rows
    int angular_res = 0;          // columns
    std::vector<double> texture;  // row-major intensities in [0, 255]
    std::vector<uint8_t> valid;   // row-major, nonzero = usable cell
    double occlusion_fraction = 0.0;

    double tex(int row, int col) const { return texture[static_cast<size_t>(row) * angular_res + col]; }
    bool ok(int row, int col) const { return valid[static_cast<size_t>(row) * angular_res + col] != 0; }
};

// Source point for normalized coordinates (r, theta): a linear blend from the
// pupil boundary (r = 0) to the iris boundary (r = 1) at the same angle.
inline Point2 rubber_sheet_point(const IrisGeometry& geom, double r, double theta) {
    double c = std::cos(theta), s = std::sin(theta);
    double xp = geom.pupil.cx + geom.pupil.r * c;
    double yp = geom.pupil.cy + geom.pupil.r * s;
    double xi = geom.iris.cx + geom.iris.r * c;
    double yi = geom.iris.cy + geom.iris.r * s;
    return Point2{(1.0 - r) * xp + r * xi, (1.0 - r) * yp + r * yi};
}

// Unwraps the annulus. Cell (i, j) samples r = (i + 0.5) / radial_res and
// theta = 2*pi*(j + 0.5) / angular_res with bilinear interpolation; a cell is
// valid only when all four support pixels are in bounds and pass the noise
// mask. Out-of-bounds samples are marked invalid rather than failing.
inline NormalizedIris rubber_sheet(const GrayImage& img, const IrisGeometry& geom, const NoiseMask& mask,
                                   const NormalizationParams& params = {}) {
    if (params.radial_res < 1 || params.angular_res < 1)
        throw ParameterError("rubber_sheet: resolution must be positive");
    if (mask.width != img.width || mask.height != img.height)
        throw DimensionError("rubber_sheet: mask dimensions do not match image");

    NormalizedIris out;
    out.radial_res = params.radial_res;
    out.angular_res = params.angular_res;
    out.texture.assign(static_cast<size_t>(params.radial_res) * params.angular_res, 0.0);
    out.valid.assign(out.texture.size(), 0);

    size_t invalid = 0;
    for (int i = 0; i < params.radial_res; ++i) {
        double r = (i + 0.5) / static_cast<double>(params.radial_res);
        for (int j = 0; j < params.angular_res; ++j) {
            double theta = 2.0 * M_PI * (j + 0.5) / static_cast<double>(params.angular_res);
            Point2 p = rubber_sheet_point(geom, r, theta);
            int x0 = static_cast<int>(std::floor(p.x));
            int y0 = static_cast<int>(std::floor(p.y));
            double fx = p.x - x0, fy = p.y - y0;
            size_t idx = static_cast<size_t>(i) * params.angular_res + j;
            if (x0 < 0 || y0 < 0 || x0 + 1 >= img.width || y0 + 1 >= img.height) {
                ++invalid;
                continue;
            }
            bool usable = mask.at(x0, y0) && mask.at(x0 + 1, y0) && mask.at(x0, y0 + 1) &&
                          mask.at(x0 + 1, y0 + 1);
            double v = (1.0 - fx) * (1.0 - fy) * img.at(x0, y0) + fx * (1.0 - fy) * img.at(x0 + 1, y0) +
                       (1.0 - fx) * fy * img.at(x0, y0 + 1) + fx * fy * img.at(x0 + 1, y0 + 1);
            out.texture[idx] = v;
            out.valid[idx] = usable ? 1 : 0;
            if (!usable) ++invalid;
        }
    }
    out.occlusion_fraction = static_cast<double>(invalid) / static_cast<double>(out.texture.size());
    return out;
}

}  // namespace iris
