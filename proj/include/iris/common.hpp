#pragma once

// Shared primitives: error taxonomy, plane geometry, deterministic random
// draws, and text formatting used by the file formats.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace iris {

inline std::string strf(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    va_list copy;
    va_copy(copy, args);
    int n = std::vsnprintf(nullptr, 0, fmt, copy);
    va_end(copy);
    std::string out(n > 0 ? static_cast<size_t>(n) : 0, '\0');
    if (n > 0) std::vsnprintf(out.data(), out.size() + 1, fmt, args);
    va_end(args);
    return out;
}

// ---------------------------------------------------------------- errors

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Malformed input bytes; `offset` is the byte position of the problem.
class DecodeError : public Error {
public:
    DecodeError(std::size_t offset, const std::string& what)
        : Error(strf("decode error at byte %zu: %s", offset, what.c_str())), offset(offset) {}
    std::size_t offset;
};

class UnsupportedFormatError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class NoPupilError : public Error {
public:
    using Error::Error;
};

enum class LocalizationStage { PupilEstimate, PupilCircle, IrisCircle };

inline const char* to_string(LocalizationStage s) {
    switch (s) {
        case LocalizationStage::PupilEstimate: return "pupil-estimate";
        case LocalizationStage::PupilCircle: return "pupil-circle";
        case LocalizationStage::IrisCircle: return "iris-circle";
    }
    return "?";
}

class LocalizationError : public Error {
public:
    LocalizationError(LocalizationStage stage, const std::string& what)
        : Error(strf("localization failed at %s: %s", to_string(stage), what.c_str())),
          stage(stage) {}
    LocalizationStage stage;
};

// -------------------------------------------------------------- geometry

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Circle {
    double cx = 0.0;
    double cy = 0.0;
    double r = 0.0;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Half-open pixel rectangle [x0,x1) x [y0,y1).
struct Rect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

// ------------------------------------------------------------------- rng
//
// The engine is std::mt19937_64, whose output sequence is pinned by the
// standard. Everything derived from it (bounded ints, uniforms, gaussians,
// shuffles) is implemented here so that no sequence depends on library
// internals that may differ between toolchains.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Collapses several seed components into one stream seed.
inline uint64_t mix_seed(std::initializer_list<uint64_t> parts) {
    uint64_t h = 0x6A09E667F3BCC909ull;
    for (uint64_t p : parts) h = splitmix64(h ^ p);
    return h;
}

class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Uniform integer in [0, n). Modulo bias is irrelevant at the scales
    // used here and keeps the draw sequence trivial to reason about.
    uint64_t bounded(uint64_t n) { return eng_() % n; }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Box-Muller without caching the second deviate; two draws per call.
    double gaussian(double mean, double sigma) {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        double mag = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * mag * std::cos(2.0 * M_PI * u2);
    }

    // Fisher-Yates.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // First `k` slots of a partial Fisher-Yates pass over `v`.
    template <class T>
    std::vector<T> sample_without_replacement(std::vector<T> v, size_t k) {
        if (k > v.size()) k = v.size();
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + static_cast<size_t>(bounded(v.size() - i));
            std::swap(v[i], v[j]);
        }
        v.resize(k);
        return v;
    }

private:
    std::mt19937_64 eng_;
};

// ------------------------------------------------------------------ text

// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline bool parse_double(const std::string& s, double& out) {
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end && *end == '\0' && end != s.c_str();
}

inline bool parse_long(const std::string& s, long long& out) {
    char* end = nullptr;
    out = std::strtoll(s.c_str(), &end, 10);
    return end && *end == '\0' && end != s.c_str();
}

}  // namespace iris
