#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <random>

#include "iris/lbp.hpp"

using namespace iris;
using Catch::Approx;

namespace {

// Worked 3x3 example: thresholding against the center 4 sets the corner and
// side bits so that the clockwise weights sum to 157.
const std::array<double, 9> kPatch{6, 3, 4, 5, 4, 5, 3, 1, 4};

}  // namespace

TEST_CASE("3x3 code on the worked example is 157") {
    REQUIRE(lbp_code_3x3(kPatch) == 157);
}

TEST_CASE("3x3 code edge cases") {
    std::array<double, 9> flat;
    flat.fill(42.0);
    REQUIRE(lbp_code_3x3(flat) == 255);  // every neighbor >= center
    std::array<double, 9> peak{1, 1, 1, 1, 9, 1, 1, 1, 1};
    REQUIRE(lbp_code_3x3(peak) == 0);
}

TEST_CASE("3x3 code ignores constant offset and positive scale") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> val(0.0, 255.0);
    std::uniform_real_distribution<double> off(-50.0, 50.0);
    std::uniform_real_distribution<double> scale(0.1, 9.0);
    for (int i = 0; i < 500; ++i) {
        std::array<double, 9> p;
        for (auto& v : p) v = val(rng);
        int base = lbp_code_3x3(p);
        double c = off(rng), s = scale(rng);
        std::array<double, 9> shifted = p, scaled = p;
        for (auto& v : shifted) v += c;
        for (auto& v : scaled) v *= s;
        REQUIRE(lbp_code_3x3(shifted) == base);
        REQUIRE(lbp_code_3x3(scaled) == base);
    }
}

TEST_CASE("3x3 contrast on the worked example") {
    // (6+4+5+4+5)/5 - (3+1+3)/3 = 4.8 - 2.33333 = 2.4666667
    REQUIRE(contrast_3x3(kPatch) == Approx(2.4666667).margin(1e-6));
}

TEST_CASE("3x3 contrast with an empty side") {
    std::array<double, 9> flat;
    flat.fill(7.0);
    REQUIRE(contrast_3x3(flat) == Approx(7.0));  // all neighbors >= center, low side empty
    std::array<double, 9> alt{10, 0, 10, 0, 5, 10, 0, 10, 0};
    REQUIRE(contrast_3x3(alt) == Approx(10.0));
}

TEST_CASE("transition counts over the circular bit sequence") {
    CHECK(transition_count(0b00000000, 8) == 0);
    CHECK(transition_count(0b01111000, 8) == 2);
    CHECK(transition_count(0b11101111, 8) == 2);
    CHECK(transition_count(0b10110101, 8) == 6);
    CHECK(transition_count(0b11111111, 8) == 0);
}

TEST_CASE("uniform pattern classification examples") {
    CHECK(is_uniform(0b00000000, 8));
    CHECK(is_uniform(0b01111000, 8));
    CHECK(is_uniform(0b11101111, 8));
    CHECK(is_uniform(0b01110000, 8));
    CHECK(is_uniform(0b11011111, 8));
    CHECK_FALSE(is_uniform(0b10110101, 8));
}

TEST_CASE("transition count is invariant under bit complement") {
    for (uint32_t code = 0; code < 256; ++code)
        CHECK(transition_count(code, 8) == transition_count(~code & 0xFFu, 8));
    std::mt19937 rng(29);
    for (int i = 0; i < 200; ++i) {
        uint32_t c16 = rng() & 0xFFFFu;
        CHECK(transition_count(c16, 16) == transition_count(~c16 & 0xFFFFu, 16));
        uint32_t c24 = rng() & 0xFFFFFFu;
        CHECK(transition_count(c24, 24) == transition_count(~c24 & 0xFFFFFFu, 24));
    }
}

TEST_CASE("exactly 58 uniform codes exist for P=8") {
    int uniform = 0;
    for (uint32_t code = 0; code < 256; ++code)
        if (is_uniform(code, 8)) ++uniform;
    REQUIRE(uniform == 58);
    REQUIRE(make_uniform_codes(8).size() == 58);
    UniformBinner binner(8);
    REQUIRE(binner.bin_count() == 59);
    // Generic count: P * (P - 1) + 2 uniform codes, one extra shared bin.
    REQUIRE(UniformBinner(16).bin_count() == 16 * 15 + 3);
    REQUIRE(UniformBinner(24).bin_count() == 24 * 23 + 3);
}

TEST_CASE("uniform bins are ordered by code with a shared non-uniform bin") {
    UniformBinner binner(8);
    CHECK(binner.bin(0) == 0);
    CHECK(binner.bin(255) == 57);
    CHECK(binner.bin(0b10110101) == 58);
    // The binner agrees with a direct enumeration rank.
    auto codes = make_uniform_codes(8);
    for (uint32_t code = 0; code < 256; ++code) {
        if (is_uniform(code, 8)) {
            auto it = std::lower_bound(codes.begin(), codes.end(), code);
            CHECK(binner.bin(code) == static_cast<int>(it - codes.begin()));
        } else {
            CHECK(binner.bin(code) == 58);
        }
    }
    CHECK(uniform_bin(0, 8) == 0);
}

TEST_CASE("general operator on a constant grid saturates all bits") {
    std::vector<double> flat(21 * 21, 9.0);
    GridView grid{21, 21, flat.data()};
    for (LbpConfig cfg : {LbpConfig{8, 1, true, false}, LbpConfig{16, 2, true, false},
                          LbpConfig{24, 3, true, false}}) {
        uint32_t code = lbp_code_general(grid, 10, 10, cfg);
        REQUIRE(code == (1u << cfg.neighbors) - 1);
    }
}

TEST_CASE("general (8,1) operator axis samples agree with the 3x3 code") {
    // Diagonal samples sit on the unit circle, not the corners, so they are
    // bilinear blends; only the four axis bits must reproduce the 3x3 bits.
    GridView grid{3, 3, kPatch.data()};
    LbpConfig cfg{8, 1, true, false};
    uint32_t code = lbp_code_general(grid, 1, 1, cfg);
    int code3 = lbp_code_3x3(kPatch);
    // 3x3 packs TL,T,TR,R,BR,B,BL,L at bits 0..7; the circular operator puts
    // E,S,W,N (y down) at bits 0,2,4,6.
    CHECK(((code >> 0) & 1) == ((code3 >> 3) & 1));  // east  == R
    CHECK(((code >> 2) & 1) == ((code3 >> 5) & 1));  // south == B
    CHECK(((code >> 4) & 1) == ((code3 >> 7) & 1));  // west  == L
    CHECK(((code >> 6) & 1) == ((code3 >> 1) & 1));  // north == T

    // Full frozen value from hand-evaluated bilinear samples: the 45/135
    // degree blends fall below the center 4, the 225 blend hits 5.0 and the
    // 315 blend hits 4.0 exactly.
    CHECK(code == 0b10110001u);
    CHECK(std::popcount(code) == 4);
}

TEST_CASE("general (16,2) operator on a vertical step through the center") {
    // Columns < 6 are 0, columns >= 6 are 255; the center sits mid-ramp at
    // x = 5.5 where the interpolated value is 127.5. A sample is set exactly
    // when its x offset is non-negative, including the two samples tangent
    // to the step, whose value equals the center's.
    std::vector<double> grid_data(13 * 9);
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 13; ++x) grid_data[static_cast<size_t>(y) * 13 + x] = x >= 6 ? 255.0 : 0.0;
    GridView grid{13, 9, grid_data.data()};
    LbpConfig cfg{16, 2, true, false};
    uint32_t code = lbp_code_general(grid, 5.5, 4, cfg);

    int expected = 0;
    for (int k = 0; k < 16; ++k)
        if (std::cos(2.0 * M_PI * k / 16.0) >= -1e-9) ++expected;
    REQUIRE(expected == 9);
    CHECK(std::popcount(code) == expected);
    for (int k = 0; k < 16; ++k) {
        bool set = (code >> k) & 1;
        bool want = std::cos(2.0 * M_PI * k / 16.0) >= -1e-9;
        CHECK(set == want);
    }
}

TEST_CASE("general operator rejects circles leaving the grid") {
    std::vector<double> flat(10 * 10, 1.0);
    GridView grid{10, 10, flat.data()};
    REQUIRE_THROWS_AS((lbp_code_general(grid, 0, 5, LbpConfig{8, 1, true, false})), ParameterError);
    REQUIRE_THROWS_AS((lbp_code_general(grid, 5, 9, LbpConfig{8, 1, true, false})), ParameterError);
    REQUIRE_THROWS_AS((lbp_code_general(grid, 8, 5, LbpConfig{16, 2, true, true})), ParameterError);
    REQUIRE_NOTHROW((lbp_code_general(grid, 5, 5, LbpConfig{8, 1, true, false})));
}

TEST_CASE("lbp config validation") {
    REQUIRE_THROWS_AS((LbpConfig{8, 2, true, false}.validate()), ParameterError);
    REQUIRE_THROWS_AS((LbpConfig{12, 1, true, false}.validate()), ParameterError);
    REQUIRE_THROWS_AS((LbpConfig{24, 3, false, false}.validate()), ParameterError);
    REQUIRE_NOTHROW((LbpConfig{24, 3, true, false}.validate()));
    REQUIRE_NOTHROW((LbpConfig{8, 1, false, false}.validate()));
}

TEST_CASE("general contrast with an empty low side") {
    std::vector<double> flat(9 * 9, 3.0);
    GridView grid{9, 9, flat.data()};
    LbpConfig cfg{8, 1, true, false};
    REQUIRE(contrast_general(grid, 4, 4, cfg) == Approx(3.0));
}
