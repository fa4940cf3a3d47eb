#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>

#include "helpers.hpp"
#include "iris/image.hpp"

using namespace iris;
using Catch::Approx;

namespace {

std::span<const uint8_t> as_bytes(const std::string& s) {
    return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

}  // namespace

TEST_CASE("pgm decode of a 2x2 raster is the identity") {
    std::string bytes = "P5\n2 2\n255\n";
    bytes += '\0';
    bytes += static_cast<char>(255);
    bytes += static_cast<char>(128);
    bytes += static_cast<char>(64);
    GrayImage img = load_gray(as_bytes(bytes));
    REQUIRE(img.width == 2);
    REQUIRE(img.height == 2);
    REQUIRE(img.data == std::vector<uint8_t>{0, 255, 128, 64});
}

TEST_CASE("pgm encode/decode round-trips random images") {
    std::mt19937 rng(7);
    for (int i = 0; i < 50; ++i) {
        std::uniform_int_distribution<int> dim(1, 40);
        GrayImage img = testutil::random_image(rng, dim(rng), dim(rng));
        GrayImage back = load_gray(as_bytes(encode_pgm(img)), ImageFormat::Pgm);
        REQUIRE(back.width == img.width);
        REQUIRE(back.height == img.height);
        REQUIRE(back.data == img.data);
    }
}

TEST_CASE("pgm decode reports the byte offset of a truncation") {
    std::string bytes = "P5\n4 4\n255\nabc";  // 3 of 16 raster bytes
    try {
        load_gray(as_bytes(bytes));
        FAIL("expected DecodeError");
    } catch (const DecodeError& e) {
        REQUIRE(e.offset == bytes.size());
        REQUIRE(std::string(e.what()).find("truncated") != std::string::npos);
    }
}

TEST_CASE("pgm decode rejects bad headers") {
    REQUIRE_THROWS_AS(load_gray(as_bytes(std::string("P5\n0 4\n255\n")), ImageFormat::Pgm), DecodeError);
    REQUIRE_THROWS_AS(load_gray(as_bytes(std::string("P5\n2 2\n65535\n....")), ImageFormat::Pgm),
                      DecodeError);
    REQUIRE_THROWS_AS(load_gray(as_bytes(std::string("Q5\n2 2\n255\n....")), ImageFormat::Pgm),
                      DecodeError);
}

TEST_CASE("unsupported formats are named explicitly") {
    std::string png = "\x89PNG\r\n\x1a\n";
    REQUIRE_THROWS_AS(load_gray(as_bytes(png)), UnsupportedFormatError);
    std::string bmp = "BM000000";
    REQUIRE_THROWS_AS(load_gray(as_bytes(bmp)), UnsupportedFormatError);
    std::string jpg = "\xFF\xD8\xFF";
    REQUIRE_THROWS_AS(load_gray(as_bytes(jpg)), UnsupportedFormatError);
    REQUIRE_THROWS_AS(load_gray(as_bytes(std::string("????"))), DecodeError);
}

TEST_CASE("ppm decodes through BT.601 luminance") {
    // White stays white under any convex weights.
    REQUIRE(rgb_to_gray(255, 255, 255) == 255);
    REQUIRE(rgb_to_gray(0, 0, 0) == 0);
    // 0.299*100 + 0.587*200 + 0.114*50 = 29.9 + 117.4 + 5.7 = 153.0
    REQUIRE(rgb_to_gray(100, 200, 50) == 153);

    std::string bytes = "P6\n1 1\n255\n";
    bytes += static_cast<char>(100);
    bytes += static_cast<char>(200);
    bytes += static_cast<char>(50);
    GrayImage img = load_gray(as_bytes(bytes));
    REQUIRE(img.data[0] == 153);
}

TEST_CASE("mean_intensity golden values") {
    REQUIRE(mean_intensity(GrayImage(8, 4, 100)) == Approx(100.0));
    GrayImage two(2, 1);
    two.data = {0, 255};
    REQUIRE(mean_intensity(two) == Approx(127.5));
    GrayImage nine(3, 3);
    nine.data = {6, 3, 4, 5, 4, 5, 3, 1, 4};
    REQUIRE(mean_intensity(nine) == Approx(35.0 / 9.0));
}

TEST_CASE("mean_intensity matches a two-pass long double oracle") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> dim(1, 40);
    for (int i = 0; i < 1000; ++i) {
        GrayImage img = testutil::random_image(rng, dim(rng), dim(rng));
        long double sum = 0.0L;
        for (auto v : img.data) sum += v;
        long double oracle = sum / static_cast<long double>(img.data.size());
        REQUIRE(mean_intensity(img) == Approx(static_cast<double>(oracle)).epsilon(1e-9));
    }
}

TEST_CASE("binarize_dark golden cases") {
    BitMask none = binarize_dark(GrayImage(3, 3, 100), 52.0);
    REQUIRE(none.count() == 0);
    BitMask all = binarize_dark(GrayImage(3, 3, 0), 0.0);
    REQUIRE(all.count() == 9);
    GrayImage two(2, 1);
    two.data = {10, 60};
    BitMask m = binarize_dark(two, 52.0);
    REQUIRE(m.at(0, 0));
    REQUIRE_FALSE(m.at(1, 0));
}

TEST_CASE("binarize_dark foreground grows monotonically with the threshold") {
    std::mt19937 rng(13);
    for (int i = 0; i < 200; ++i) {
        GrayImage img = testutil::random_image(rng, 17, 11);
        std::uniform_real_distribution<double> td(0.0, 300.0);
        double t1 = td(rng), t2 = td(rng);
        if (t1 > t2) std::swap(t1, t2);
        BitMask a = binarize_dark(img, t1), b = binarize_dark(img, t2);
        for (size_t k = 0; k < a.bits.size(); ++k)
            if (a.bits[k]) REQUIRE(b.bits[k]);
    }
}

TEST_CASE("histogram_stats on constant and small samples") {
    std::vector<double> constant{5, 5, 5, 5};
    HistogramStats st = histogram_stats(constant);
    CHECK(st.range == 0.0);
    CHECK(st.mean == Approx(5.0));
    CHECK(st.geometric_mean == Approx(5.0));
    CHECK(st.harmonic_mean == Approx(5.0));
    CHECK(st.std_dev == Approx(0.0).margin(1e-12));
    CHECK(st.variance == Approx(0.0).margin(1e-12));
    CHECK(st.median == Approx(5.0));
    CHECK_FALSE(st.zero_clamped);

    std::vector<double> five{1, 2, 3, 4, 5};
    st = histogram_stats(five);
    CHECK(st.range == Approx(4.0));
    CHECK(st.mean == Approx(3.0));
    CHECK(st.variance == Approx(2.0));
    CHECK(st.median == Approx(3.0));
    CHECK(st.geometric_mean == Approx(2.6052).epsilon(1e-4));
    CHECK(st.harmonic_mean == Approx(2.1898).epsilon(1e-4));
    auto o = testutil::oracle_stats(five);
    CHECK(st.geometric_mean == Approx(o.gmean).epsilon(1e-11));
    CHECK(st.harmonic_mean == Approx(o.hmean).epsilon(1e-11));
}

TEST_CASE("histogram_stats clamps zeros for the product/reciprocal means only") {
    std::vector<double> zf{0.0, 4.0};
    HistogramStats st = histogram_stats(zf);
    CHECK(st.mean == Approx(2.0));
    CHECK(st.median == Approx(2.0));
    CHECK(st.range == Approx(4.0));
    CHECK(st.zero_clamped);
    // clamped to 1e-6: gmean = sqrt(4e-6), hmean = 2 / (1e6 + 0.25)
    CHECK(st.geometric_mean == Approx(std::sqrt(4e-6)).epsilon(1e-12));
    CHECK(st.harmonic_mean == Approx(2.0 / (1e6 + 0.25)).epsilon(1e-12));
}

TEST_CASE("histogram_stats rejects empty input") {
    REQUIRE_THROWS_AS(histogram_stats(std::vector<double>{}), ParameterError);
}

TEST_CASE("histogram_stats matches the brute-force oracle on random samples") {
    std::mt19937 rng(17);
    std::uniform_int_distribution<size_t> len(1, 10000);
    std::uniform_real_distribution<double> val(0.0, 255.0);
    for (int i = 0; i < 120; ++i) {
        std::vector<double> s(len(rng));
        for (auto& v : s) v = val(rng);
        HistogramStats st = histogram_stats(s);
        auto o = testutil::oracle_stats(s);
        CHECK(st.range == Approx(o.range).epsilon(1e-9).margin(1e-12));
        CHECK(st.mean == Approx(o.mean).epsilon(1e-9));
        CHECK(st.geometric_mean == Approx(o.gmean).epsilon(1e-9));
        CHECK(st.harmonic_mean == Approx(o.hmean).epsilon(1e-9));
        CHECK(st.std_dev == Approx(o.stddev).epsilon(1e-9).margin(1e-12));
        CHECK(st.variance == Approx(o.variance).epsilon(1e-9).margin(1e-12));
        CHECK(st.median == Approx(o.median).epsilon(1e-9));
    }
}

TEST_CASE("positive samples order harmonic <= geometric <= arithmetic") {
    std::mt19937 rng(19);
    std::uniform_int_distribution<size_t> len(1, 500);
    std::uniform_real_distribution<double> val(0.001, 255.0);
    for (int i = 0; i < 300; ++i) {
        std::vector<double> s(len(rng));
        for (auto& v : s) v = val(rng);
        HistogramStats st = histogram_stats(s);
        double lo = *std::min_element(s.begin(), s.end());
        double hi = *std::max_element(s.begin(), s.end());
        const double eps = 1e-9;
        CHECK(st.harmonic_mean <= st.geometric_mean + eps);
        CHECK(st.geometric_mean <= st.mean + eps);
        CHECK(lo - eps <= st.harmonic_mean);
        CHECK(st.mean <= hi + eps);
        CHECK(st.variance == Approx(st.std_dev * st.std_dev).epsilon(1e-12).margin(1e-12));
    }
}
