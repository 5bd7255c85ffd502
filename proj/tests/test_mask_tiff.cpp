#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "graylith/mask.hpp"
#include "graylith/shapes.hpp"
#include "graylith/tiff.hpp"
#include "test_util.hpp"

using namespace graylith;
using namespace testutil;

namespace {

GrayMask make_mask(int w, int h, std::vector<std::uint8_t> px, double pitch = 0.5) {
    GrayMask m;
    m.px_w = w;
    m.px_h = h;
    m.pixels = std::move(px);
    m.pitch_x_um = pitch;
    m.pitch_y_um = pitch;
    return m;
}

std::uint32_t rd32le(const std::string& b, std::size_t off) {
    return static_cast<std::uint8_t>(b[off]) |
           (static_cast<std::uint8_t>(b[off + 1]) << 8) |
           (static_cast<std::uint8_t>(b[off + 2]) << 16) |
           (static_cast<std::uint32_t>(static_cast<std::uint8_t>(b[off + 3])) << 24);
}
std::uint16_t rd16le(const std::string& b, std::size_t off) {
    return static_cast<std::uint16_t>(static_cast<std::uint8_t>(b[off]) |
                                      (static_cast<std::uint8_t>(b[off + 1]) << 8));
}

// hand-rolled big-endian writer, independent of the library's builder
void be16(std::string& s, unsigned v) {
    s.push_back(static_cast<char>((v >> 8) & 0xFF));
    s.push_back(static_cast<char>(v & 0xFF));
}
void be32(std::string& s, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void be_entry(std::string& s, unsigned tag, unsigned type, std::uint32_t count,
              std::uint32_t value) {
    be16(s, tag);
    be16(s, type);
    be32(s, count);
    if (type == 3) { // SHORT: left-justified in the 4-byte value field
        be16(s, value);
        be16(s, 0);
    } else {
        be32(s, value);
    }
}

std::string build_be_tiff(unsigned photometric, bool tiled_tag,
                          const std::vector<std::uint8_t>& px) {
    unsigned n = tiled_tag ? 8u : 7u;
    std::uint32_t data_off = 8 + 2 + 12 * n + 4;
    std::string s = "MM";
    be16(s, 42);
    be32(s, 8);
    be16(s, n);
    be_entry(s, 256, 3, 1, 2);
    be_entry(s, 257, 3, 1, 2);
    be_entry(s, 258, 3, 1, 8);
    be_entry(s, 259, 3, 1, 1);
    be_entry(s, 262, 3, 1, photometric);
    be_entry(s, 273, 4, 1, data_off);
    be_entry(s, 279, 4, 1, 4);
    if (tiled_tag) be_entry(s, 322, 3, 1, 16);
    be32(s, 0);
    s.append(reinterpret_cast<const char*>(px.data()), px.size());
    return s;
}

void le16(std::string& s, unsigned v) {
    s.push_back(static_cast<char>(v & 0xFF));
    s.push_back(static_cast<char>((v >> 8) & 0xFF));
}
void le32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void le_entry(std::string& s, unsigned tag, unsigned type, std::uint32_t count,
              std::uint32_t value) {
    le16(s, tag);
    le16(s, type);
    le32(s, count);
    if (type == 3) {
        le16(s, value);
        le16(s, 0);
    } else {
        le32(s, value);
    }
}

} // namespace

TEST_CASE("encode_mask maps removal through the LUT") {
    DepthToGrayLUT lut = build_lut(linear_fit(15.0), 15.0);

    SECTION("all-zero field is black") {
        HeightField f({10.0, 10.0, 20, 20});
        GrayMask m = encode_mask(f, lut);
        for (std::uint8_t p : m.pixels) CHECK(p == 0);
    }

    SECTION("constant max_depth is full white") {
        HeightField f({10.0, 10.0, 20, 20}, 15.0);
        GrayMask m = encode_mask(f, lut);
        for (std::uint8_t p : m.pixels) CHECK(p == 255);
    }

    SECTION("quarter-depth ramp levels") {
        HeightField f({2.5, 0.5, 5, 1});
        f.removal = {0.0, 3.75, 7.5, 11.25, 15.0};
        WarningLog log;
        GrayMask m = encode_mask(f, lut, &log);
        CHECK(m.pixels == std::vector<std::uint8_t>{0, 64, 128, 191, 255});
        CHECK(log.empty());
        CHECK(m.pitch_x_um.value() == 0.5);
        CHECK(m.pitch_y_um.value() == 0.5);
        CHECK(m.provenance.find("monotone-pchip") != std::string::npos);
    }

    SECTION("beyond max depth clamps with one counted warning") {
        HeightField f({2.0, 0.5, 4, 1});
        f.removal = {16.0, 15.0, 20.0, 7.5};
        WarningLog log;
        GrayMask m = encode_mask(f, lut, &log);
        CHECK(m.pixels == std::vector<std::uint8_t>{255, 255, 255, 128});
        REQUIRE(log.size() == 1);
        CHECK(log.entries()[0].code == "ClampWarning");
        CHECK(log.entries()[0].count == 2);
    }

    SECTION("negative removal is an error") {
        HeightField f({1.0, 0.5, 2, 1});
        f.removal = {0.0, -0.001};
        CHECK_THROWS_AS(encode_mask(f, lut), NegativeDepth);
    }

    SECTION("monotone: deeper removal never darkens") {
        auto& gen = rng();
        std::uniform_real_distribution<double> u(0.0, 15.0);
        HeightField f({8.0, 8.0, 16, 16});
        for (double& r : f.removal) r = u(gen);
        GrayMask m = encode_mask(f, lut);
        std::vector<std::size_t> order(f.removal.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return f.removal[a] < f.removal[b];
        });
        for (std::size_t i = 1; i < order.size(); ++i)
            CHECK(m.pixels[order[i]] >= m.pixels[order[i - 1]]);
    }
}

TEST_CASE("write_pgm emits P5") {
    GrayMask m = make_mask(3, 2, {0, 1, 2, 3, 4, 5});
    std::string pgm = write_pgm(m);
    CHECK(pgm.substr(0, 11) == "P5\n3 2\n255\n");
    CHECK(pgm.size() == 11 + 6);
    CHECK(pgm[11] == 0);
    CHECK(pgm[16] == 5);
}

TEST_CASE("write_tiff pinned byte layout") {
    GrayMask m = make_mask(1, 1, {0});
    std::string t = write_tiff(m);

    REQUIRE(t.size() == 175);
    CHECK(t.substr(0, 2) == "II");
    CHECK(rd16le(t, 2) == 42);
    CHECK(rd32le(t, 4) == 8);    // IFD offset
    CHECK(rd16le(t, 8) == 12);   // entry count

    // ascending tag order
    std::vector<int> want_tags{256, 257, 258, 259, 262, 273, 277, 278, 279, 282, 283, 296};
    for (int i = 0; i < 12; ++i) CHECK(rd16le(t, 10 + 12 * i) == want_tags[i]);

    CHECK(rd32le(t, 10 + 8) == 1);        // width
    CHECK(rd32le(t, 22 + 8) == 1);        // height
    CHECK(rd16le(t, 34 + 8) == 8);        // bits per sample
    CHECK(rd16le(t, 46 + 8) == 1);        // compression: none
    CHECK(rd16le(t, 58 + 8) == 1);        // photometric: BlackIsZero
    CHECK(rd32le(t, 70 + 8) == 174);      // strip offset
    CHECK(rd16le(t, 82 + 8) == 1);        // samples per pixel
    CHECK(rd32le(t, 94 + 8) == 1);        // rows per strip
    CHECK(rd32le(t, 106 + 8) == 1);       // strip byte count
    CHECK(rd32le(t, 118 + 8) == 158);     // XResolution value offset
    CHECK(rd32le(t, 130 + 8) == 166);     // YResolution value offset
    CHECK(rd16le(t, 142 + 8) == 3);       // resolution unit: cm
    CHECK(rd32le(t, 154) == 0);           // no next IFD
    CHECK(rd32le(t, 158) == 20000);       // 10000 um/cm / 0.5 um/px
    CHECK(rd32le(t, 162) == 1);
    CHECK(rd32le(t, 166) == 20000);
    CHECK(rd32le(t, 170) == 1);
    CHECK(t[174] == 0);                   // the pixel

    SECTION("deterministic bytes") {
        CHECK(write_tiff(m) == t);
        GrayMask again = make_mask(1, 1, {0});
        CHECK(write_tiff(again) == t);
    }
}

TEST_CASE("full-field resolution tags") {
    GrayMask m = make_mask(1920, 1080, std::vector<std::uint8_t>(1920 * 1080, 7), 0.5);
    std::string t = write_tiff(m);
    CHECK(t.size() == 174u + 1920u * 1080u);
    CHECK(rd32le(t, 158) == 20000); // XResolution px/cm at 0.5 um pitch
    CHECK(rd32le(t, 162) == 1);
    GrayMask back = read_tiff(t);
    CHECK(back.px_w == 1920);
    CHECK(back.px_h == 1080);
    CHECK(std::abs(back.pitch_x_um.value() - 0.5) <= 1e-9);
    CHECK(std::abs(back.pitch_y_um.value() - 0.5) <= 1e-9);
}

TEST_CASE("tiff round-trip") {
    SECTION("2x2 example") {
        GrayMask m = make_mask(2, 2, {0, 255, 128, 64});
        GrayMask back = read_tiff(write_tiff(m));
        CHECK(back.pixels == m.pixels);
        CHECK(back.px_w == 2);
        CHECK(back.px_h == 2);
        CHECK(std::abs(back.pitch_x_um.value() - 0.5) <= 1e-9);
    }

    SECTION("random masks and pitches") {
        auto& gen = rng();
        std::uniform_int_distribution<int> dim(1, 40), gray(0, 255), pick(0, 5);
        const double pitches[] = {0.25, 0.5, 1.0, 1.25, 2.0, 0.3};
        for (int trial = 0; trial < 25; ++trial) {
            int w = dim(gen), h = dim(gen);
            double p = pitches[pick(gen)];
            std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h);
            for (auto& v : px) v = static_cast<std::uint8_t>(gray(gen));
            GrayMask m = make_mask(w, h, px, p);
            GrayMask back = read_tiff(write_tiff(m));
            CHECK(back.pixels == px);
            CHECK(back.px_w == w);
            CHECK(back.px_h == h);
            CHECK(std::abs(back.pitch_x_um.value() - p) <= 1e-9);
            CHECK(std::abs(back.pitch_y_um.value() - p) <= 1e-9);
        }
    }
}

TEST_CASE("read_tiff accepts foreign layouts") {
    SECTION("big-endian, no resolution tags") {
        std::string t = build_be_tiff(1, false, {5, 250, 1, 2});
        GrayMask m = read_tiff(t);
        CHECK(m.px_w == 2);
        CHECK(m.px_h == 2);
        CHECK(m.pixels == std::vector<std::uint8_t>{5, 250, 1, 2});
        CHECK(!m.pitch_x_um.has_value());
        CHECK(!m.pitch_y_um.has_value());
    }

    SECTION("WhiteIsZero is normalized by inversion") {
        std::string t = build_be_tiff(0, false, {5, 250, 1, 2});
        GrayMask m = read_tiff(t);
        CHECK(m.pixels == std::vector<std::uint8_t>{250, 5, 254, 253});
    }

    SECTION("multi-strip little-endian") {
        // 3x4, two strips of two rows each
        std::string s = "II";
        le16(s, 42);
        le32(s, 8);
        le16(s, 9);
        std::uint32_t arr1 = 8 + 2 + 9 * 12 + 4; // strip offsets array
        std::uint32_t arr2 = arr1 + 8;           // strip byte counts array
        std::uint32_t data = arr2 + 8;
        le_entry(s, 256, 3, 1, 3);
        le_entry(s, 257, 3, 1, 4);
        le_entry(s, 258, 3, 1, 8);
        le_entry(s, 259, 3, 1, 1);
        le_entry(s, 262, 3, 1, 1);
        le_entry(s, 273, 4, 2, arr1);
        le_entry(s, 277, 3, 1, 1);
        le_entry(s, 278, 4, 1, 2);
        le_entry(s, 279, 4, 2, arr2);
        le32(s, 0);
        le32(s, data);
        le32(s, data + 6);
        le32(s, 6);
        le32(s, 6);
        for (int k = 0; k < 12; ++k) s.push_back(static_cast<char>(k));
        GrayMask m = read_tiff(s);
        CHECK(m.px_w == 3);
        CHECK(m.px_h == 4);
        std::vector<std::uint8_t> want(12);
        std::iota(want.begin(), want.end(), std::uint8_t{0});
        CHECK(m.pixels == want);
    }
}

TEST_CASE("read_tiff refuses what it cannot represent") {
    GrayMask m = make_mask(2, 2, {1, 2, 3, 4});
    std::string good = write_tiff(m);

    SECTION("not a TIFF") {
        CHECK_THROWS_AS(read_tiff("\x89PNG\r\n\x1a\nxxxx"), NotTiff);
        CHECK_THROWS_AS(read_tiff("II"), NotTiff);
        std::string bad_magic = good;
        bad_magic[2] = 43;
        CHECK_THROWS_AS(read_tiff(bad_magic), NotTiff);
        std::string far_ifd = good;
        far_ifd[4] = static_cast<char>(0xFF); // IFD offset way past EOF
        far_ifd[5] = static_cast<char>(0xFF);
        CHECK_THROWS_AS(read_tiff(far_ifd), NotTiff);
    }

    SECTION("truncation") {
        std::string cut = good.substr(0, good.size() - 1); // one pixel short
        CHECK_THROWS_AS(read_tiff(cut), TruncatedFile);
        std::string mid_ifd = good.substr(0, 100);
        CHECK_THROWS_AS(read_tiff(mid_ifd), TruncatedFile);
        std::string lying = good; // declared byte count below the strip size
        lying[106 + 8] = 3;
        CHECK_THROWS_AS(read_tiff(lying), TruncatedFile);
    }

    SECTION("unsupported features stay loud") {
        std::string lzw = good;
        lzw[46 + 8] = 5; // compression
        CHECK_THROWS_AS(read_tiff(lzw), UnsupportedFeature);

        std::string deep = good;
        deep[34 + 8] = 16; // bits per sample
        CHECK_THROWS_AS(read_tiff(deep), UnsupportedFeature);

        std::string rgb = good;
        rgb[82 + 8] = 3; // samples per pixel
        CHECK_THROWS_AS(read_tiff(rgb), UnsupportedFeature);

        std::string pal = good;
        pal[58 + 8] = 3; // photometric: palette
        CHECK_THROWS_AS(read_tiff(pal), UnsupportedFeature);

        CHECK_THROWS_AS(read_tiff(build_be_tiff(1, true, {5, 250, 1, 2})),
                        UnsupportedFeature);
    }

    SECTION("writer input validation") {
        GrayMask bad = make_mask(2, 2, {1, 2, 3});
        CHECK_THROWS_AS(write_tiff(bad), ValidationError);
        GrayMask no_pitch;
        no_pitch.px_w = no_pitch.px_h = 1;
        no_pitch.pixels = {0};
        CHECK_THROWS_AS(write_tiff(no_pitch), ValidationError);
    }
}

TEST_CASE("float tiff round-trip for height fields") {
    HeightField f({1.5, 1.0, 3, 2});
    f.removal = {0.0, 0.5, 1.25, 7.515, 15.0, 2.25};
    std::string t = write_float_tiff(f);

    SECTION("layout") {
        CHECK(rd16le(t, 8) == 13); // one extra entry: SampleFormat
        CHECK(rd16le(t, 10 + 12 * 12) == 339);
        CHECK(t.size() == 186u + 4u * 6u);
    }

    SECTION("values round through float precision") {
        HeightField back = read_float_tiff(t);
        CHECK(back.area.px_w == 3);
        CHECK(back.area.px_h == 2);
        CHECK(back.area.width_um == 1.5);
        CHECK(back.area.height_um == 1.0);
        REQUIRE(back.removal.size() == 6);
        for (std::size_t k = 0; k < 6; ++k)
            CHECK(back.removal[k] ==
                  static_cast<double>(static_cast<float>(f.removal[k])));
    }

    SECTION("rejects negatives and NaNs in the data") {
        std::string neg = t;
        float bad = -1.0f;
        std::memcpy(neg.data() + 186, &bad, 4);
        CHECK_THROWS_AS(read_float_tiff(neg), NegativeDepth);

        std::string nan = t;
        std::uint32_t qnan = 0x7FC00000u;
        std::memcpy(nan.data() + 186, &qnan, 4);
        CHECK_THROWS_AS(read_float_tiff(nan), NegativeDepth);
    }

    SECTION("8-bit mask is not a float field") {
        GrayMask m = make_mask(2, 2, {1, 2, 3, 4});
        CHECK_THROWS_AS(read_float_tiff(write_tiff(m)), UnsupportedFeature);
    }

    SECTION("float field is not an 8-bit mask") {
        CHECK_THROWS_AS(read_tiff(t), UnsupportedFeature);
    }
}

TEST_CASE("rational approximation for resolution tags") {
    std::uint32_t n = 0, d = 0;
    detail::rational_approx_u32(20000.0, n, d);
    CHECK(n == 20000);
    CHECK(d == 1);

    detail::rational_approx_u32(10000.0 / 0.3, n, d);
    CHECK(std::abs(static_cast<double>(n) / d - 10000.0 / 0.3) <= 1e-6);

    detail::rational_approx_u32(1.0e12, n, d);
    CHECK(n == 0xFFFFFFFFu);
    CHECK(d == 1);

    CHECK_THROWS_AS(detail::rational_approx_u32(0.0, n, d), ValidationError);
}
