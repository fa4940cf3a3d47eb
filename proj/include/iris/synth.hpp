#pragma once

// Synthetic eye renderer and dataset generator. Each class owns a band
// texture painted in polar coordinates (so an image rotation is exactly a
// texture phase shift), and each image samples its own geometry, rotation,
// noise, and optional occluders. Every draw comes from a seeded stream, so
// regeneration is byte-identical.

#include <array>
#include <cmath>
#include <filesystem>
#include <optional>
#include <vector>

#include "iris/common.hpp"
#include "iris/dataset.hpp"
#include "iris/image.hpp"
#include "iris/localization.hpp"

namespace iris {

struct SynthEyeSpec {
    int classes = 20;
    int images_per_class = 10;
    int width = 360;
    int height = 360;
    double pupil_r_min = 20.0;
    double pupil_r_max = 45.0;
    double iris_ratio_min = 2.0;  // iris radius / pupil radius
    double iris_ratio_max = 3.5;
    double center_jitter = 12.0;      // px around the image center
    double rotation_jitter_deg = 6.0;
    double noise_sigma = 8.0;
    double occluder_prob = 0.3;  // eyelash streaks; highlights use half this
    uint64_t seed = 1;

    void validate() const {
        if (classes < 1) throw ConfigError("synth: classes must be >= 1");
        if (images_per_class < 1) throw ConfigError("synth: images_per_class must be >= 1");
        if (width < 64 || height < 64) throw ConfigError("synth: image must be at least 64x64");
        if (!(pupil_r_min >= 5.0 && pupil_r_min <= pupil_r_max))
            throw ConfigError("synth: bad pupil radius range");
        if (!(iris_ratio_min >= 1.2 && iris_ratio_min <= iris_ratio_max))
            throw ConfigError("synth: bad iris/pupil ratio range");
        if (!(rotation_jitter_deg >= 0.0)) throw ConfigError("synth: rotation jitter must be >= 0");
        if (!(noise_sigma >= 0.0)) throw ConfigError("synth: noise sigma must be >= 0");
        if (!(occluder_prob >= 0.0 && occluder_prob <= 1.0))
            throw ConfigError("synth: occluder probability must be in [0,1]");
        double worst = pupil_r_max * iris_ratio_max + center_jitter + 4.0;
        if (2.0 * worst > std::min(width, height))
            throw ConfigError(strf("synth: iris up to %.1f px cannot fit a %dx%d image",
                                   pupil_r_max * iris_ratio_max, width, height));
    }
};

// Per-class texture: three angular harmonics with radial coupling plus
// periodic lattice noise. Frequencies are integers, so the pattern is
// continuous across the theta wrap.
struct ClassSignature {
    struct Harmonic {
        int freq = 3;
        double phase = 0.0;
        double radial_turns = 0.0;
        double amplitude = 0.0;
    };
    std::array<Harmonic, 3> harmonics;
    int noise_cells_theta = 24;
    int noise_cells_r = 6;
    double noise_amp = 18.0;
    uint64_t noise_salt = 0;
};

inline ClassSignature make_class_signature(uint64_t seed, int class_id) {
    Rng rng(mix_seed({seed, static_cast<uint64_t>(class_id), 0xC1A5501Dull}));
    ClassSignature sig;
    for (auto& h : sig.harmonics) {
        h.freq = 2 + static_cast<int>(rng.bounded(10));
        h.phase = rng.uniform(0.0, 2.0 * M_PI);
        h.radial_turns = rng.uniform(0.0, 2.0);
        h.amplitude = rng.uniform(9.0, 17.0);
    }
    sig.noise_amp = rng.uniform(12.0, 22.0);
    sig.noise_salt = rng.next_u64();
    return sig;
}

namespace detail {

inline double lattice_value(uint64_t salt, int i, int j) {
    uint64_t h = splitmix64(salt ^ (static_cast<uint64_t>(static_cast<uint32_t>(i)) << 32 ^
                                    static_cast<uint32_t>(j)));
    return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;  // [-1, 1)
}

inline double smoothstep01(double t) { return t * t * (3.0 - 2.0 * t); }

// Smooth periodic lattice noise on the (r, theta) cylinder.
inline double cylinder_noise(const ClassSignature& sig, double r01, double theta) {
    double u = std::clamp(r01, 0.0, 1.0) * sig.noise_cells_r;
    double t = theta / (2.0 * M_PI);
    t -= std::floor(t);
    double v = t * sig.noise_cells_theta;
    int i0 = std::min(static_cast<int>(u), sig.noise_cells_r - 1);
    int j0 = std::min(static_cast<int>(v), sig.noise_cells_theta - 1);
    double fu = smoothstep01(std::clamp(u - i0, 0.0, 1.0));
    double fv = smoothstep01(std::clamp(v - j0, 0.0, 1.0));
    int j1 = (j0 + 1) % sig.noise_cells_theta;
    double a = lattice_value(sig.noise_salt, i0, j0), b = lattice_value(sig.noise_salt, i0, j1);
    double c = lattice_value(sig.noise_salt, i0 + 1, j0), d = lattice_value(sig.noise_salt, i0 + 1, j1);
    return (a * (1 - fv) + b * fv) * (1 - fu) + (c * (1 - fv) + d * fv) * fu;
}

}  // namespace detail

// Texture value (centered on 0) at normalized radius r01 and angle theta.
inline double class_texture(const ClassSignature& sig, double r01, double theta) {
    double v = 0.0;
    for (const auto& h : sig.harmonics)
        v += h.amplitude * std::sin(h.freq * theta + h.phase + h.radial_turns * 2.0 * M_PI * r01);
    v += sig.noise_amp * detail::cylinder_noise(sig, r01, theta);
    return v;
}

struct EyelashStreak {
    Point2 from;
    Point2 to;
    double width = 2.5;
    double intensity = 40.0;
};

struct SpecularHighlight {
    Point2 center;
    double radius = 4.0;
    double intensity = 252.0;
};

struct EyeRender {
    IrisGeometry geom;
    double rotation_rad = 0.0;
    double noise_sigma = 0.0;
    uint64_t noise_seed = 0;
    std::vector<EyelashStreak> streaks;
    std::optional<SpecularHighlight> highlight;
    double pupil_level = 30.0;
    double iris_level = 140.0;
    double sclera_level = 230.0;
};

namespace detail {

inline double distance_to_segment(Point2 p, Point2 a, Point2 b) {
    double vx = b.x - a.x, vy = b.y - a.y;
    double wx = p.x - a.x, wy = p.y - a.y;
    double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? std::clamp((wx * vx + wy * vy) / len2, 0.0, 1.0) : 0.0;
    return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

}  // namespace detail

inline GrayImage render_eye(int width, int height, const ClassSignature& sig, const EyeRender& r) {
    GrayImage img(width, height);
    const Circle& pc = r.geom.pupil;
    const Circle& ic = r.geom.iris;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double dp = std::hypot(x - pc.cx, y - pc.cy);
            double di = std::hypot(x - ic.cx, y - ic.cy);
            // Annulus coordinate along the ray from the iris center.
            double span = std::max(ic.r - pc.r, 1.0);
            double r01 = std::clamp((di - pc.r) / span, 0.0, 1.0);
            double theta = std::atan2(y - ic.cy, x - ic.cx) - r.rotation_rad;
            double iris_v =
                std::clamp(r.iris_level + class_texture(sig, r01, theta), 0.0, 255.0);
            // Blend pupil -> iris -> sclera with ~2 px soft edges.
            double t_p = detail::smoothstep01(std::clamp((dp - pc.r) / 2.0 + 0.5, 0.0, 1.0));
            double t_i = detail::smoothstep01(std::clamp((di - ic.r) / 2.0 + 0.5, 0.0, 1.0));
            double v = r.pupil_level + (iris_v - r.pupil_level) * t_p;
            v = v + (r.sclera_level - v) * t_i;
            for (const auto& s : r.streaks) {
                double d = detail::distance_to_segment(Point2{static_cast<double>(x), static_cast<double>(y)},
                                                       s.from, s.to);
                double t = detail::smoothstep01(std::clamp(1.0 - d / (0.5 * s.width), 0.0, 1.0));
                v = v + (s.intensity - v) * t;
            }
            if (r.highlight) {
                double d = std::hypot(x - r.highlight->center.x, y - r.highlight->center.y);
                double t = detail::smoothstep01(std::clamp((r.highlight->radius - d) / 1.5, 0.0, 1.0));
                v = v + (r.highlight->intensity - v) * t;
            }
            img.at(x, y) = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
    }
    if (r.noise_sigma > 0.0) {
        Rng noise(r.noise_seed);
        for (auto& p : img.data) {
            double v = p + noise.gaussian(0.0, r.noise_sigma);
            p = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
    }
    return img;
}

// Samples per-image rendering parameters from the image's seeded stream.
inline EyeRender sample_eye_render(const SynthEyeSpec& spec, int class_id, int image_index) {
    Rng rng(mix_seed({spec.seed, static_cast<uint64_t>(class_id), static_cast<uint64_t>(image_index),
                      0xE7E00Dull}));
    EyeRender r;
    double pupil_r = rng.uniform(spec.pupil_r_min, spec.pupil_r_max);
    double ratio = rng.uniform(spec.iris_ratio_min, spec.iris_ratio_max);
    double iris_r = pupil_r * ratio;
    double cx = spec.width / 2.0 + rng.uniform(-spec.center_jitter, spec.center_jitter);
    double cy = spec.height / 2.0 + rng.uniform(-spec.center_jitter, spec.center_jitter);
    double off = std::min(2.0, 0.25 * pupil_r);
    double icx = cx + rng.uniform(-off, off);
    double icy = cy + rng.uniform(-off, off);
    r.geom.pupil = Circle{cx, cy, pupil_r};
    r.geom.iris = Circle{icx, icy, iris_r};
    r.rotation_rad = rng.uniform(-spec.rotation_jitter_deg, spec.rotation_jitter_deg) * M_PI / 180.0;
    r.noise_sigma = spec.noise_sigma;
    r.noise_seed = rng.next_u64();

    if (rng.uniform() < spec.occluder_prob) {
        int n = 2 + static_cast<int>(rng.bounded(3));
        for (int i = 0; i < n; ++i) {
            // Thin quasi-vertical lash crossing the upper annulus only; it
            // must stay clear of the pupil so projections stay pupil-bound.
            double ang = rng.uniform(-2.1, -1.04);  // radians, upper half (y up the image)
            double r0 = iris_r * rng.uniform(0.92, 1.04);
            double r1 = pupil_r + (iris_r - pupil_r) * rng.uniform(0.35, 0.6);
            double tilt = rng.uniform(-0.25, 0.25);
            EyelashStreak s;
            s.from = Point2{icx + r0 * std::cos(ang), icy + r0 * std::sin(ang)};
            s.to = Point2{icx + r1 * std::cos(ang + tilt), icy + r1 * std::sin(ang + tilt)};
            s.width = rng.uniform(2.0, 3.5);
            s.intensity = rng.uniform(35.0, 48.0);
            r.streaks.push_back(s);
        }
    }
    if (rng.uniform() < 0.5 * spec.occluder_prob) {
        double ang = rng.uniform(0.0, 2.0 * M_PI);
        double rr = pupil_r + (iris_r - pupil_r) * rng.uniform(0.3, 0.7);
        SpecularHighlight h;
        h.center = Point2{icx + rr * std::cos(ang), icy + rr * std::sin(ang)};
        h.radius = rng.uniform(3.0, 5.0);
        r.highlight = h;
    }
    return r;
}

struct SynthResult {
    Manifest manifest;
    std::filesystem::path manifest_path;
};

// Writes images, ground-truth sidecars, and the manifest under out_dir.
inline SynthResult generate_dataset(const SynthEyeSpec& spec, const std::filesystem::path& out_dir,
                                    double train_fraction = 0.7) {
    spec.validate();
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        throw ConfigError("synth: train fraction must be in (0, 1]");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError(strf("cannot create %s: %s", out_dir.string().c_str(), ec.message().c_str()));

    Manifest manifest;
    manifest.root = out_dir;
    manifest.class_count = spec.classes;
    for (int c = 0; c < spec.classes; ++c) {
        ClassSignature sig = make_class_signature(spec.seed, c);
        std::filesystem::path class_dir = out_dir / strf("class%02d", c);
        std::filesystem::create_directories(class_dir, ec);
        if (ec) throw IoError(strf("cannot create %s", class_dir.string().c_str()));

        // Seeded per-class split.
        std::vector<size_t> order(static_cast<size_t>(spec.images_per_class));
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng split_rng(mix_seed({spec.seed, static_cast<uint64_t>(c), 0x5917ull}));
        split_rng.shuffle(order);
        size_t n_train = std::max<size_t>(
            1, static_cast<size_t>(std::llround(train_fraction * spec.images_per_class)));
        std::vector<Split> split(static_cast<size_t>(spec.images_per_class), Split::Test);
        for (size_t i = 0; i < n_train && i < order.size(); ++i) split[order[i]] = Split::Train;

        for (int m = 0; m < spec.images_per_class; ++m) {
            EyeRender render = sample_eye_render(spec, c, m);
            GrayImage img = render_eye(spec.width, spec.height, sig, render);
            std::string name = strf("img%03d.pgm", m);
            save_pgm_file(img, class_dir / name);
            GroundTruth truth;
            truth.pupil = render.geom.pupil;
            truth.iris = render.geom.iris;
            truth.rotation_deg = render.rotation_rad * 180.0 / M_PI;
            save_truth(truth, class_dir / strf("img%03d.truth", m));

            ManifestEntry e;
            e.path = strf("class%02d/%s", c, name.c_str());
            e.class_id = c;
            e.split = split[static_cast<size_t>(m)];
            manifest.entries.push_back(std::move(e));
        }
    }
    manifest.validate();
    SynthResult result;
    result.manifest_path = out_dir / "manifest.txt";
    save_manifest(manifest, result.manifest_path);
    result.manifest = std::move(manifest);
    return result;
}

}  // namespace iris
