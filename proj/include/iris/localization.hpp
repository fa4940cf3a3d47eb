#pragma once

// Pupil/iris boundary detection: central-window binarization, column/row
// projections, Canny edges, and a circular Hough transform constrained by
// the projection-based pupil seed.

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "iris/common.hpp"
#include "iris/image.hpp"

namespace iris {

struct EdgeMap {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> edges;  // row-major, nonzero = edge pixel

    EdgeMap() = default;
    EdgeMap(int w, int h) : width(w), height(h), edges(static_cast<size_t>(w) * h, 0) {}
    bool at(int x, int y) const { return edges[static_cast<size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { edges[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
    size_t count() const {
        size_t n = 0;
        for (uint8_t e : edges) n += e != 0;
        return n;
    }
};

struct CannyParams {
    double sigma = 1.4;
    double high_frac = 0.2;  // high threshold = high_frac * max gradient magnitude
    double low_frac = 0.4;   // low threshold  = low_frac * high threshold
};

namespace detail {

// Separable Gaussian blur with replicated borders; returns doubles.
inline std::vector<double> gaussian_blur(const GrayImage& img, double sigma) {
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
    double ksum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double w = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        kernel[static_cast<size_t>(i + radius)] = w;
        ksum += w;
    }
    for (double& w : kernel) w /= ksum;

    const int W = img.width, H = img.height;
    std::vector<double> tmp(static_cast<size_t>(W) * H), out(static_cast<size_t>(W) * H);
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                int xx = std::clamp(x + i, 0, W - 1);
                acc += kernel[static_cast<size_t>(i + radius)] * img.at(xx, y);
            }
            tmp[static_cast<size_t>(y) * W + x] = acc;
        }
    }
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                int yy = std::clamp(y + i, 0, H - 1);
                acc += kernel[static_cast<size_t>(i + radius)] * tmp[static_cast<size_t>(yy) * W + x];
            }
            out[static_cast<size_t>(y) * W + x] = acc;
        }
    }
    return out;
}

}  // namespace detail

// Classic four-stage Canny: Gaussian smoothing, Sobel gradients, non-maximum
// suppression with 4-way quantized directions, and hysteresis where
// high = high_frac * max gradient magnitude and low = low_frac * high.
inline EdgeMap canny(const GrayImage& img, const CannyParams& params = {}) {
    if (img.width < 5 || img.height < 5)
        throw DimensionError(strf("canny: image %dx%d smaller than 5x5", img.width, img.height));
    if (!(params.sigma > 0.0)) throw ParameterError("canny: sigma must be > 0");
    if (!(params.high_frac > 0.0 && params.high_frac <= 1.0))
        throw ParameterError("canny: high_frac must be in (0,1]");
    if (!(params.low_frac > 0.0 && params.low_frac < 1.0))
        throw ParameterError("canny: low_frac must be in (0,1)");

    const int W = img.width, H = img.height;
    std::vector<double> smooth = detail::gaussian_blur(img, params.sigma);
    auto sm = [&](int x, int y) {
        x = std::clamp(x, 0, W - 1);
        y = std::clamp(y, 0, H - 1);
        return smooth[static_cast<size_t>(y) * W + x];
    };

    std::vector<double> mag(static_cast<size_t>(W) * H, 0.0);
    std::vector<uint8_t> dir(static_cast<size_t>(W) * H, 0);  // 0:E-W 1:NE-SW 2:N-S 3:NW-SE
    double max_mag = 0.0;
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            double gx = -sm(x - 1, y - 1) + sm(x + 1, y - 1) - 2.0 * sm(x - 1, y) + 2.0 * sm(x + 1, y) -
                        sm(x - 1, y + 1) + sm(x + 1, y + 1);
            double gy = -sm(x - 1, y - 1) - 2.0 * sm(x, y - 1) - sm(x + 1, y - 1) + sm(x - 1, y + 1) +
                        2.0 * sm(x, y + 1) + sm(x + 1, y + 1);
            double m = std::sqrt(gx * gx + gy * gy);
            size_t idx = static_cast<size_t>(y) * W + x;
            mag[idx] = m;
            max_mag = std::max(max_mag, m);
            // Quantize the gradient direction into one of four bins.
            double angle = std::atan2(gy, gx);
            if (angle < 0) angle += M_PI;
            int bin = static_cast<int>(std::floor((angle + M_PI / 8.0) / (M_PI / 4.0))) % 4;
            dir[idx] = static_cast<uint8_t>(bin);
        }
    }

    EdgeMap out(W, H);
    if (max_mag <= 0.0) return out;  // flat image, no edges

    const double high = params.high_frac * max_mag;
    const double low = params.low_frac * high;

    // Non-maximum suppression along the gradient direction. A plateau of two
    // equal magnitudes keeps only the lower-index pixel (> toward the minus
    // neighbor, >= toward the plus neighbor).
    static const int offs[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
    std::vector<uint8_t> cls(static_cast<size_t>(W) * H, 0);  // 0 none, 1 weak, 2 strong
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            size_t idx = static_cast<size_t>(y) * W + x;
            double m = mag[idx];
            if (m < low) continue;
            int dx = offs[dir[idx]][0], dy = offs[dir[idx]][1];
            auto mg = [&](int xx, int yy) {
                if (xx < 0 || xx >= W || yy < 0 || yy >= H) return 0.0;
                return mag[static_cast<size_t>(yy) * W + xx];
            };
            if (!(m > mg(x - dx, y - dy) && m >= mg(x + dx, y + dy))) continue;
            cls[idx] = m >= high ? 2 : 1;
        }
    }

    // Hysteresis: grow from strong pixels through weak ones, 8-connected.
    std::deque<std::pair<int, int>> queue;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            if (cls[static_cast<size_t>(y) * W + x] == 2) {
                out.set(x, y, true);
                queue.emplace_back(x, y);
            }
    while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                int xx = x + dx, yy = y + dy;
                if (xx < 0 || xx >= W || yy < 0 || yy >= H) continue;
                size_t idx = static_cast<size_t>(yy) * W + xx;
                if (cls[idx] == 1 && !out.edges[idx]) {
                    out.edges[idx] = 1;
                    queue.emplace_back(xx, yy);
                }
            }
    }
    return out;
}

// Central window spanning the middle 60% of rows and columns.
inline Rect interest_region(const GrayImage& img) {
    int mx = static_cast<int>(std::floor(0.2 * img.width));
    int my = static_cast<int>(std::floor(0.2 * img.height));
    return Rect{mx, my, img.width - mx, img.height - my};
}

// x = argmax over columns of foreground count, y = argmax over rows; ties go
// to the smallest index.
inline Point2 projection_point(const BitMask& mask) {
    std::vector<long> col_count(static_cast<size_t>(mask.width), 0);
    std::vector<long> row_count(static_cast<size_t>(mask.height), 0);
    long total = 0;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                ++col_count[static_cast<size_t>(x)];
                ++row_count[static_cast<size_t>(y)];
                ++total;
            }
    if (total == 0) throw NoPupilError("projection_point: mask has no foreground");
    int best_x = 0, best_y = 0;
    for (int x = 1; x < mask.width; ++x)
        if (col_count[static_cast<size_t>(x)] > col_count[static_cast<size_t>(best_x)]) best_x = x;
    for (int y = 1; y < mask.height; ++y)
        if (row_count[static_cast<size_t>(y)] > row_count[static_cast<size_t>(best_y)]) best_y = y;
    return Point2{static_cast<double>(best_x), static_cast<double>(best_y)};
}

struct PupilEstimate {
    Point2 p1;  // projection of the central-window mask
    Point2 p2;  // projection of the full-image mask at the tighter threshold
    Point2 p3;  // midpoint of p1 and p2
    double radius_seed = 0.0;
    double threshold1 = 0.0;  // 0.52 * mean intensity
    double threshold2 = 0.0;  // 0.6 * threshold1
};

namespace detail {

// Length of the foreground run through (x, y) along one axis. Gaps of up to
// two pixels are bridged so sensor-noise holes inside the pupil do not cut
// the run short; anything wider ends it.
inline int run_length(const BitMask& mask, int x, int y, int dx, int dy) {
    if (x < 0 || x >= mask.width || y < 0 || y >= mask.height || !mask.at(x, y)) return 0;
    constexpr int kMaxGap = 2;
    auto scan = [&](int sx, int sy) {
        int len = 0, gap = 0;
        for (int xx = x + sx, yy = y + sy; xx >= 0 && xx < mask.width && yy >= 0 && yy < mask.height;
             xx += sx, yy += sy) {
            if (mask.at(xx, yy)) {
                len += gap + 1;
                gap = 0;
            } else if (++gap > kMaxGap) {
                break;
            }
        }
        return len;
    };
    return 1 + scan(dx, dy) + scan(-dx, -dy);
}

}  // namespace detail

// Two-pass projection estimate of the pupil. The first projection works on
// the binarized central window at 0.52 * mean intensity; the second on the
// full image at 0.6 times that threshold. The averaged point seeds the Hough
// search, and the radius seed is the mean of the two half run lengths
// through it.
inline PupilEstimate estimate_pupil(const GrayImage& img) {
    PupilEstimate est;
    const double mean = mean_intensity(img);
    est.threshold1 = 0.52 * mean;
    est.threshold2 = 0.6 * est.threshold1;

    Rect win = interest_region(img);
    GrayImage window(win.width(), win.height());
    for (int y = win.y0; y < win.y1; ++y)
        for (int x = win.x0; x < win.x1; ++x)
            window.at(x - win.x0, y - win.y0) = img.at(x, y);

    BitMask mask1 = binarize_dark(window, est.threshold1);
    if (mask1.count() == 0)
        throw NoPupilError(strf("no pixels below threshold %.3f in the central window", est.threshold1));
    Point2 p1 = projection_point(mask1);
    est.p1 = Point2{p1.x + win.x0, p1.y + win.y0};

    BitMask mask2 = binarize_dark(img, est.threshold2);
    if (mask2.count() == 0)
        throw NoPupilError(strf("no pixels below threshold %.3f in the image", est.threshold2));
    est.p2 = projection_point(mask2);

    est.p3 = Point2{0.5 * (est.p1.x + est.p2.x), 0.5 * (est.p1.y + est.p2.y)};

    int px = static_cast<int>(std::llround(est.p3.x));
    int py = static_cast<int>(std::llround(est.p3.y));
    int dist1 = detail::run_length(mask2, px, py, 1, 0);
    int dist2 = detail::run_length(mask2, px, py, 0, 1);
    if (dist1 == 0 && dist2 == 0)
        throw NoPupilError("projection midpoint does not land on a dark region");
    est.radius_seed = (static_cast<double>(dist1) + static_cast<double>(dist2)) / 4.0;
    return est;
}

struct CircleHypothesis {
    int cx = 0;
    int cy = 0;
    int r = 0;
    long score = 0;       // votes aggregated over the peak neighborhood
    long cell_votes = 0;  // votes in the peak cell alone
};

// Circular Hough transform over a 3-D accumulator (cx, cy, r) at 1-pixel
// resolution. Each edge pixel votes along full circles: for every candidate
// center c it contributes one vote at radius round(|p - c|). Peaks are
// ranked by the vote mass inside a (+-2, +-2, +-1) neighborhood, so votes an
// imaging-noise pixel smears into adjacent cells still count toward the
// circle that produced them; exact cell votes break ties, then the smaller
// (cx, cy, r). Returns up to top_k maxima, score-descending, non-maximum
// suppressed within a (5, 5, 3) box.
inline std::vector<CircleHypothesis> hough_circles(const EdgeMap& edges, int r_min, int r_max,
                                                   std::optional<Rect> center_window = std::nullopt,
                                                   int top_k = 1) {
    if (r_min < 1 || r_min > r_max || r_max >= std::min(edges.width, edges.height))
        throw ParameterError(strf("hough_circles: invalid radius range [%d, %d] for %dx%d map", r_min,
                                  r_max, edges.width, edges.height));
    if (top_k < 1) throw ParameterError("hough_circles: top_k must be >= 1");

    Rect win = center_window.value_or(Rect{0, 0, edges.width, edges.height});
    win.x0 = std::clamp(win.x0, 0, edges.width);
    win.x1 = std::clamp(win.x1, 0, edges.width);
    win.y0 = std::clamp(win.y0, 0, edges.height);
    win.y1 = std::clamp(win.y1, 0, edges.height);
    if (win.width() <= 0 || win.height() <= 0) return {};

    std::vector<std::pair<int, int>> pts;
    for (int y = 0; y < edges.height; ++y)
        for (int x = 0; x < edges.width; ++x)
            if (edges.at(x, y)) pts.emplace_back(x, y);
    if (pts.empty()) return {};

    const int WW = win.width(), WH = win.height(), NR = r_max - r_min + 1;
    std::vector<uint32_t> acc(static_cast<size_t>(WW) * WH * NR, 0);
    // Accumulate transposed: per candidate center, bin each edge pixel at its
    // rounded distance. Equivalent to voting full circles in (cx, cy, r).
    for (int cy = win.y0; cy < win.y1; ++cy) {
        for (int cx = win.x0; cx < win.x1; ++cx) {
            uint32_t* cell = acc.data() + (static_cast<size_t>(cy - win.y0) * WW + (cx - win.x0)) * NR;
            for (auto [ex, ey] : pts) {
                double dx = ex - cx, dy = ey - cy;
                int r = static_cast<int>(std::llround(std::sqrt(dx * dx + dy * dy)));
                if (r >= r_min && r <= r_max) ++cell[r - r_min];
            }
        }
    }

    auto votes_at = [&](int cx, int cy, int r) -> long {
        return acc[(static_cast<size_t>(cy - win.y0) * WW + (cx - win.x0)) * static_cast<size_t>(NR) +
                   static_cast<size_t>(r - r_min)];
    };
    auto aggregate_at = [&](int cx, int cy, int r) -> long {
        long sum = 0;
        for (int dy = -2; dy <= 2; ++dy) {
            int yy = cy + dy;
            if (yy < win.y0 || yy >= win.y1) continue;
            for (int dx = -2; dx <= 2; ++dx) {
                int xx = cx + dx;
                if (xx < win.x0 || xx >= win.x1) continue;
                for (int dr = -1; dr <= 1; ++dr) {
                    int rr = r + dr;
                    if (rr < r_min || rr > r_max) continue;
                    sum += votes_at(xx, yy, rr);
                }
            }
        }
        return sum;
    };

    std::vector<CircleHypothesis> found;
    for (int k = 0; k < top_k; ++k) {
        CircleHypothesis best;
        for (int cx = win.x0; cx < win.x1; ++cx) {
            for (int cy = win.y0; cy < win.y1; ++cy) {
                for (int r = r_min; r <= r_max; ++r) {
                    long cell = votes_at(cx, cy, r);
                    if (cell <= 0) continue;
                    bool suppressed = false;
                    for (const CircleHypothesis& h : found) {
                        if (std::abs(cx - h.cx) <= 5 && std::abs(cy - h.cy) <= 5 && std::abs(r - h.r) <= 3) {
                            suppressed = true;
                            break;
                        }
                    }
                    if (suppressed) continue;
                    long agg = aggregate_at(cx, cy, r);
                    // Strict > keeps the first (smallest cx, cy, r) on ties.
                    if (agg > best.score || (agg == best.score && cell > best.cell_votes))
                        best = CircleHypothesis{cx, cy, r, agg, cell};
                }
            }
        }
        if (best.score <= 0) break;
        found.push_back(best);
    }
    return found;
}

struct IrisGeometry {
    Circle pupil;
    Circle iris;
};

struct LocateParams {
    CannyParams canny;
    double pupil_r_lo = 0.5;          // x radius_seed
    double pupil_r_hi = 1.5;          // x radius_seed
    double pupil_center_window = 10;  // px box half-width around p3
    double iris_r_lo = 1.5;           // x pupil radius
    double iris_r_hi = 5.0;           // x pupil radius
    double iris_center_window = 0.5;  // x pupil radius, box half-width
    // A hypothesis must collect votes from at least this fraction of its
    // ideal circumference (and min_support_abs votes) to count as a circle;
    // stray edge pixels in the search window are rejected by this floor.
    double min_support_frac = 0.18;
    long min_support_abs = 8;
};

struct LocateDebug {
    PupilEstimate estimate;
    EdgeMap edges;
    std::vector<CircleHypothesis> pupil_hypotheses;
    std::vector<CircleHypothesis> iris_hypotheses;
};

namespace detail {

inline long support_floor(const LocateParams& p, int r) {
    return std::max(p.min_support_abs,
                    static_cast<long>(std::llround(p.min_support_frac * 2.0 * M_PI * r)));
}

inline Rect center_box(Point2 c, double half, int w, int h) {
    return Rect{std::clamp(static_cast<int>(std::floor(c.x - half)), 0, w),
                std::clamp(static_cast<int>(std::floor(c.y - half)), 0, h),
                std::clamp(static_cast<int>(std::ceil(c.x + half)) + 1, 0, w),
                std::clamp(static_cast<int>(std::ceil(c.y + half)) + 1, 0, h)};
}

}  // namespace detail

// Full localization: projection seed, Canny edges, then two constrained
// Hough searches (pupil first, iris around it).
inline IrisGeometry locate_iris(const GrayImage& img, const LocateParams& params = {},
                                LocateDebug* debug = nullptr) {
    PupilEstimate est = estimate_pupil(img);
    EdgeMap edges = canny(img, params.canny);
    if (debug) {
        debug->estimate = est;
        debug->edges = edges;
    }

    const int max_r = std::min(img.width, img.height) - 1;
    int pr_min = std::max(1, static_cast<int>(std::floor(params.pupil_r_lo * est.radius_seed)));
    int pr_max = std::min(max_r, static_cast<int>(std::ceil(params.pupil_r_hi * est.radius_seed)));
    if (pr_min > pr_max)
        throw LocalizationError(LocalizationStage::PupilCircle,
                                strf("empty pupil radius range from seed %.2f", est.radius_seed));
    Rect pupil_win = detail::center_box(est.p3, params.pupil_center_window, img.width, img.height);
    auto pupil_hyps = hough_circles(edges, pr_min, pr_max, pupil_win, 3);
    if (debug) debug->pupil_hypotheses = pupil_hyps;
    const CircleHypothesis* pupil_best = nullptr;
    for (const auto& h : pupil_hyps)
        if (h.score >= detail::support_floor(params, h.r)) {
            pupil_best = &h;
            break;
        }
    if (!pupil_best)
        throw LocalizationError(LocalizationStage::PupilCircle, "no supported pupil circle in window");
    Circle pupil{static_cast<double>(pupil_best->cx), static_cast<double>(pupil_best->cy),
                 static_cast<double>(pupil_best->r)};

    int ir_min = std::max(1, static_cast<int>(std::floor(params.iris_r_lo * pupil.r)));
    int ir_max = std::min(max_r, static_cast<int>(std::ceil(params.iris_r_hi * pupil.r)));
    if (ir_min > ir_max)
        throw LocalizationError(LocalizationStage::IrisCircle,
                                strf("empty iris radius range from pupil radius %.1f", pupil.r));
    Rect iris_win = detail::center_box(Point2{pupil.cx, pupil.cy}, params.iris_center_window * pupil.r,
                                       img.width, img.height);
    auto iris_hyps = hough_circles(edges, ir_min, ir_max, iris_win, 3);
    if (debug) debug->iris_hypotheses = iris_hyps;
    const CircleHypothesis* iris_best = nullptr;
    for (const auto& h : iris_hyps)
        if (h.score >= detail::support_floor(params, h.r)) {
            iris_best = &h;
            break;
        }
    if (!iris_best)
        throw LocalizationError(LocalizationStage::IrisCircle, "no supported iris circle in window");

    IrisGeometry geom{pupil, Circle{static_cast<double>(iris_best->cx), static_cast<double>(iris_best->cy),
                                    static_cast<double>(iris_best->r)}};
    if (!(geom.iris.r > geom.pupil.r))
        throw LocalizationError(LocalizationStage::IrisCircle, "iris radius not larger than pupil radius");
    return geom;
}

}  // namespace iris
