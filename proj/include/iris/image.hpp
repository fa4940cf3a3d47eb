#pragma once

// 8-bit grayscale raster, PGM/PPM codecs, binarization, and first-order
// histogram statistics.

#include <cassert>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "iris/common.hpp"

namespace iris {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data;  // row-major, data[y * width + x]

    GrayImage() = default;
    GrayImage(int w, int h, uint8_t fill = 0) : width(w), height(h) {
        if (w < 1 || h < 1) throw DimensionError(strf("image dimensions %dx%d invalid", w, h));
        data.assign(static_cast<size_t>(w) * h, fill);
    }

    size_t size() const { return data.size(); }
    uint8_t at(int x, int y) const {
        assert(x >= 0 && x < width && y >= 0 && y < height);
        return data[static_cast<size_t>(y) * width + x];
    }
    uint8_t& at(int x, int y) {
        assert(x >= 0 && x < width && y >= 0 && y < height);
        return data[static_cast<size_t>(y) * width + x];
    }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

struct BitMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> bits;  // row-major, nonzero = foreground

    BitMask() = default;
    BitMask(int w, int h, bool fill = false) : width(w), height(h) {
        if (w < 1 || h < 1) throw DimensionError(strf("mask dimensions %dx%d invalid", w, h));
        bits.assign(static_cast<size_t>(w) * h, fill ? 1 : 0);
    }

    bool at(int x, int y) const { return bits[static_cast<size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
    size_t count() const {
        return static_cast<size_t>(std::count_if(bits.begin(), bits.end(), [](uint8_t b) { return b != 0; }));
    }
};

// ------------------------------------------------------------- PGM / PPM

enum class ImageFormat { Auto, Pgm, Ppm, Png, Bmp, Jpeg };

inline uint8_t rgb_to_gray(uint8_t r, uint8_t g, uint8_t b) {
    // BT.601 luminance, rounded half up.
    double y = 0.299 * r + 0.587 * g + 0.114 * b;
    int v = static_cast<int>(std::floor(y + 0.5));
    return static_cast<uint8_t>(std::clamp(v, 0, 255));
}

namespace detail {

// Header token scanner for PNM files: whitespace-separated decimal fields
// with '#' comments running to end of line.
struct PnmCursor {
    std::span<const uint8_t> bytes;
    size_t pos = 0;

    bool eof() const { return pos >= bytes.size(); }
    uint8_t peek() const { return bytes[pos]; }

    void skip_space_and_comments() {
        while (!eof()) {
            uint8_t c = bytes[pos];
            if (c == '#') {
                while (!eof() && bytes[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f') {
                ++pos;
            } else {
                break;
            }
        }
    }

    long read_int(const char* field) {
        skip_space_and_comments();
        if (eof()) throw DecodeError(pos, strf("missing %s field", field));
        if (bytes[pos] < '0' || bytes[pos] > '9')
            throw DecodeError(pos, strf("expected digit in %s field", field));
        long v = 0;
        while (!eof() && bytes[pos] >= '0' && bytes[pos] <= '9') {
            v = v * 10 + (bytes[pos] - '0');
            if (v > 1'000'000'000L) throw DecodeError(pos, strf("%s field out of range", field));
            ++pos;
        }
        return v;
    }
};

inline GrayImage decode_pnm(std::span<const uint8_t> bytes, bool color) {
    PnmCursor cur{bytes, 2};  // caller verified the magic
    long w = cur.read_int("width");
    long h = cur.read_int("height");
    long maxval = cur.read_int("maxval");
    if (w < 1 || h < 1) throw DecodeError(cur.pos, strf("bad dimensions %ldx%ld", w, h));
    if (maxval != 255) throw DecodeError(cur.pos, strf("unsupported maxval %ld (want 255)", maxval));
    if (cur.eof()) throw DecodeError(cur.pos, "missing raster separator");
    uint8_t sep = bytes[cur.pos];
    if (sep != ' ' && sep != '\t' && sep != '\r' && sep != '\n')
        throw DecodeError(cur.pos, "expected single whitespace before raster");
    ++cur.pos;

    size_t npixels = static_cast<size_t>(w) * static_cast<size_t>(h);
    size_t need = npixels * (color ? 3 : 1);
    if (bytes.size() - cur.pos < need)
        throw DecodeError(bytes.size(), strf("truncated raster: need %zu bytes, have %zu", need,
                                             bytes.size() - cur.pos));

    GrayImage img(static_cast<int>(w), static_cast<int>(h));
    const uint8_t* p = bytes.data() + cur.pos;
    if (color) {
        for (size_t i = 0; i < npixels; ++i, p += 3) img.data[i] = rgb_to_gray(p[0], p[1], p[2]);
    } else {
        std::copy(p, p + npixels, img.data.begin());
    }
    return img;
}

}  // namespace detail

inline GrayImage load_gray(std::span<const uint8_t> bytes, ImageFormat format = ImageFormat::Auto) {
    if (format == ImageFormat::Auto) {
        if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') format = ImageFormat::Pgm;
        else if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') format = ImageFormat::Ppm;
        else if (bytes.size() >= 4 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' && bytes[3] == 'G')
            format = ImageFormat::Png;
        else if (bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M') format = ImageFormat::Bmp;
        else if (bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8) format = ImageFormat::Jpeg;
        else throw DecodeError(0, "unrecognized image signature");
    }
    switch (format) {
        case ImageFormat::Pgm:
            if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
                throw DecodeError(0, "not a binary PGM (missing P5 magic)");
            return detail::decode_pnm(bytes, /*color=*/false);
        case ImageFormat::Ppm:
            if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
                throw DecodeError(0, "not a binary PPM (missing P6 magic)");
            return detail::decode_pnm(bytes, /*color=*/true);
        case ImageFormat::Png: throw UnsupportedFormatError("PNG input is not supported; convert to PGM");
        case ImageFormat::Bmp: throw UnsupportedFormatError("BMP input is not supported; convert to PGM");
        case ImageFormat::Jpeg: throw UnsupportedFormatError("JPEG input is not supported; convert to PGM");
        case ImageFormat::Auto: break;
    }
    throw UnsupportedFormatError("unknown image format");
}

// Canonical binary PGM encoding: "P5\n<w> <h>\n255\n" + raster.
inline std::string encode_pgm(const GrayImage& img) {
    std::string out = strf("P5\n%d %d\n255\n", img.width, img.height);
    out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
    return out;
}

inline GrayImage load_gray_file(const std::filesystem::path& path,
                                ImageFormat format = ImageFormat::Auto) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(strf("cannot open %s", path.string().c_str()));
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_gray(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size()),
                     format);
}

inline void save_pgm_file(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(strf("cannot write %s", path.string().c_str()));
    std::string bytes = encode_pgm(img);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(strf("short write to %s", path.string().c_str()));
}

inline GrayImage mask_to_image(const BitMask& mask) {
    GrayImage img(mask.width, mask.height);
    for (size_t i = 0; i < mask.bits.size(); ++i) img.data[i] = mask.bits[i] ? 255 : 0;
    return img;
}

// ------------------------------------------------------------ operations

inline double mean_intensity(const GrayImage& img) {
    // Pixel sums stay far below 2^53, so the double accumulator is exact.
    double sum = 0.0;
    for (uint8_t v : img.data) sum += v;
    return sum / static_cast<double>(img.data.size());
}

// Foreground = intensity <= threshold; the dark pupil becomes foreground.
inline BitMask binarize_dark(const GrayImage& img, double threshold) {
    BitMask mask(img.width, img.height);
    for (size_t i = 0; i < img.data.size(); ++i) mask.bits[i] = img.data[i] <= threshold ? 1 : 0;
    return mask;
}

struct HistogramStats {
    double range = 0.0;
    double mean = 0.0;
    double geometric_mean = 0.0;
    double harmonic_mean = 0.0;
    double std_dev = 0.0;
    double variance = 0.0;  // population, divide by n
    double median = 0.0;
    // True when any sample was clamped to kZeroClamp for the geometric and
    // harmonic means. The other statistics always use the raw samples.
    bool zero_clamped = false;

    static constexpr double kZeroClamp = 1e-6;
};

inline HistogramStats histogram_stats(std::span<const double> samples) {
    if (samples.empty()) throw ParameterError("histogram_stats: empty sample set");
    const size_t n = samples.size();

    HistogramStats st;
    double lo = samples[0], hi = samples[0], sum = 0.0;
    for (double s : samples) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
        sum += s;
    }
    st.range = hi - lo;
    st.mean = sum / static_cast<double>(n);

    double sq = 0.0, logsum = 0.0, invsum = 0.0;
    for (double s : samples) {
        double d = s - st.mean;
        sq += d * d;
        double c = std::max(s, HistogramStats::kZeroClamp);
        if (c != s) st.zero_clamped = true;
        logsum += std::log(c);
        invsum += 1.0 / c;
    }
    st.variance = sq / static_cast<double>(n);
    st.std_dev = std::sqrt(st.variance);
    st.geometric_mean = std::exp(logsum / static_cast<double>(n));
    st.harmonic_mean = static_cast<double>(n) / invsum;

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    st.median = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    return st;
}

}  // namespace iris
