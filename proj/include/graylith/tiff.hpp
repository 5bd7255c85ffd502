// tiff.hpp - baseline TIFF 6.0 grayscale I/O with a fully pinned byte layout.
//
// Writer layout (8-bit masks, little-endian "II"):
//   0   "II" 42, IFD offset = 8
//   8   IFD: entry count 12, twelve 12-byte entries in ascending tag order,
//       next-IFD pointer 0                                  -> 150 bytes
//   158 XResolution RATIONAL, 166 YResolution RATIONAL (px per cm)
//   174 pixel data, one strip, row-major, top row first
// Tags: ImageWidth(256), ImageLength(257), BitsPerSample(258)=8,
//   Compression(259)=1, Photometric(262)=1 BlackIsZero, StripOffsets(273),
//   SamplesPerPixel(277)=1, RowsPerStrip(278)=px_h, StripByteCounts(279),
//   XResolution(282), YResolution(283), ResolutionUnit(296)=3 (cm).
// Identical masks produce identical bytes.
//
// The float variant (debug height dumps) adds SampleFormat(339)=3 and uses
// BitsPerSample=32: 13 entries, rationals at 170/178, data at 186.
//
// The reader accepts either byte order and multiple strips, normalizes
// Photometric 0 by inverting, and refuses anything outside the baseline
// 8-bit grayscale subset (UnsupportedFeature) rather than misreading it.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graylith/errors.hpp"
#include "graylith/field.hpp"
#include "graylith/mask.hpp"

namespace graylith {

namespace detail {

// Best rational approximation p/q of x > 0 with p, q <= 2^32-1, by
// continued-fraction convergents. Exact whenever x is exactly representable.
inline void rational_approx_u32(double x, std::uint32_t& num, std::uint32_t& den) {
    constexpr std::uint64_t kMax = 0xFFFFFFFFull;
    if (!(x > 0.0)) throw ValidationError("resolution must be positive");
    if (x >= static_cast<double>(kMax)) {
        num = 0xFFFFFFFFu;
        den = 1;
        return;
    }
    std::uint64_t p0 = 1, q0 = 0, p1 = 0, q1 = 1; // p0/q0 current, p1/q1 previous
    double frac = x;
    for (int iter = 0; iter < 64; ++iter) {
        double fl = std::floor(frac);
        std::uint64_t a = static_cast<std::uint64_t>(fl);
        std::uint64_t p2 = a * p0 + p1, q2 = a * q0 + q1;
        if (p2 > kMax || q2 > kMax) break;
        p1 = p0; q1 = q0; p0 = p2; q0 = q2;
        double rem = frac - fl;
        if (rem < 1e-15) break;
        frac = 1.0 / rem;
    }
    if (q0 == 0) { p0 = kMax; q0 = 1; }
    num = static_cast<std::uint32_t>(p0);
    den = static_cast<std::uint32_t>(q0);
}

struct TiffBuilder {
    std::string bytes;

    void u16(std::uint16_t v) {
        bytes.push_back(static_cast<char>(v & 0xFF));
        bytes.push_back(static_cast<char>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    // entry with inline value (left-justified for SHORT)
    void entry(std::uint16_t tag, std::uint16_t type, std::uint32_t count,
               std::uint32_t value) {
        u16(tag);
        u16(type);
        u32(count);
        if (type == 3) { // SHORT: low 2 bytes, then padding
            u16(static_cast<std::uint16_t>(value));
            u16(0);
        } else {
            u32(value);
        }
    }
};

inline constexpr std::uint16_t kTypeShort = 3, kTypeLong = 4, kTypeRational = 5;

} // namespace detail

inline std::string write_tiff(const GrayMask& mask) {
    if (mask.px_w <= 0 || mask.px_h <= 0 ||
        mask.pixels.size() != mask.pixel_count())
        throw ValidationError("mask geometry inconsistent");
    if (!mask.pitch_x_um || !mask.pitch_y_um)
        throw ValidationError(
            "mask pitch unknown; resolution tags are mandatory in this format");

    const std::uint32_t w = static_cast<std::uint32_t>(mask.px_w);
    const std::uint32_t h = static_cast<std::uint32_t>(mask.px_h);
    const std::uint32_t ifd_off = 8;
    const std::uint32_t ifd_size = 2 + 12 * 12 + 4; // 150
    const std::uint32_t xres_off = ifd_off + ifd_size; // 158
    const std::uint32_t yres_off = xres_off + 8;       // 166
    const std::uint32_t data_off = yres_off + 8;       // 174

    std::uint32_t xn, xd, yn, yd;
    detail::rational_approx_u32(10000.0 / *mask.pitch_x_um, xn, xd); // px per cm
    detail::rational_approx_u32(10000.0 / *mask.pitch_y_um, yn, yd);

    detail::TiffBuilder b;
    b.bytes.reserve(data_off + mask.pixels.size());
    b.bytes += "II";
    b.u16(42);
    b.u32(ifd_off);

    b.u16(12); // entry count
    b.entry(256, detail::kTypeLong, 1, w);
    b.entry(257, detail::kTypeLong, 1, h);
    b.entry(258, detail::kTypeShort, 1, 8);
    b.entry(259, detail::kTypeShort, 1, 1);
    b.entry(262, detail::kTypeShort, 1, 1);
    b.entry(273, detail::kTypeLong, 1, data_off);
    b.entry(277, detail::kTypeShort, 1, 1);
    b.entry(278, detail::kTypeLong, 1, h);
    b.entry(279, detail::kTypeLong, 1, w * h);
    b.entry(282, detail::kTypeRational, 1, xres_off);
    b.entry(283, detail::kTypeRational, 1, yres_off);
    b.entry(296, detail::kTypeShort, 1, 3);
    b.u32(0); // no further IFD

    b.u32(xn);
    b.u32(xd);
    b.u32(yn);
    b.u32(yd);
    b.bytes.append(reinterpret_cast<const char*>(mask.pixels.data()),
                   mask.pixels.size());
    return b.bytes;
}

// Debug dump of a scalar grid as 32-bit float TIFF (SampleFormat=3).
inline std::string write_float_tiff(const std::vector<double>& values, int px_w,
                                    int px_h, double pitch_x_um, double pitch_y_um) {
    if (px_w <= 0 || px_h <= 0 ||
        values.size() != static_cast<std::size_t>(px_w) * px_h)
        throw ValidationError("grid geometry inconsistent");

    const std::uint32_t w = static_cast<std::uint32_t>(px_w);
    const std::uint32_t h = static_cast<std::uint32_t>(px_h);
    const std::uint32_t ifd_size = 2 + 13 * 12 + 4; // 162
    const std::uint32_t xres_off = 8 + ifd_size;    // 170
    const std::uint32_t yres_off = xres_off + 8;    // 178
    const std::uint32_t data_off = yres_off + 8;    // 186

    std::uint32_t xn, xd, yn, yd;
    detail::rational_approx_u32(10000.0 / pitch_x_um, xn, xd);
    detail::rational_approx_u32(10000.0 / pitch_y_um, yn, yd);

    detail::TiffBuilder b;
    b.bytes.reserve(data_off + 4 * values.size());
    b.bytes += "II";
    b.u16(42);
    b.u32(8);

    b.u16(13);
    b.entry(256, detail::kTypeLong, 1, w);
    b.entry(257, detail::kTypeLong, 1, h);
    b.entry(258, detail::kTypeShort, 1, 32);
    b.entry(259, detail::kTypeShort, 1, 1);
    b.entry(262, detail::kTypeShort, 1, 1);
    b.entry(273, detail::kTypeLong, 1, data_off);
    b.entry(277, detail::kTypeShort, 1, 1);
    b.entry(278, detail::kTypeLong, 1, h);
    b.entry(279, detail::kTypeLong, 1, 4 * w * h);
    b.entry(282, detail::kTypeRational, 1, xres_off);
    b.entry(283, detail::kTypeRational, 1, yres_off);
    b.entry(296, detail::kTypeShort, 1, 3);
    b.entry(339, detail::kTypeShort, 1, 3); // SampleFormat: IEEE float
    b.u32(0);

    b.u32(xn);
    b.u32(xd);
    b.u32(yn);
    b.u32(yd);
    for (double v : values) {
        float f = static_cast<float>(v);
        char raw[4];
        std::memcpy(raw, &f, 4);
        b.bytes.append(raw, 4);
    }
    return b.bytes;
}

inline std::string write_float_tiff(const HeightField& field) {
    return write_float_tiff(field.removal, field.area.px_w, field.area.px_h,
                            field.area.pitch_x(), field.area.pitch_y());
}

namespace detail {

// Endian-aware cursor over the raw TIFF bytes.
struct TiffReader {
    std::string_view bytes;
    bool big_endian = false;

    std::uint16_t u16_at(std::size_t off) const {
        if (off + 2 > bytes.size())
            throw TruncatedFile("TIFF truncated inside a 16-bit field");
        auto b0 = static_cast<std::uint8_t>(bytes[off]);
        auto b1 = static_cast<std::uint8_t>(bytes[off + 1]);
        return big_endian ? static_cast<std::uint16_t>((b0 << 8) | b1)
                          : static_cast<std::uint16_t>((b1 << 8) | b0);
    }
    std::uint32_t u32_at(std::size_t off) const {
        if (off + 4 > bytes.size())
            throw TruncatedFile("TIFF truncated inside a 32-bit field");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            auto byte = static_cast<std::uint8_t>(bytes[off + (big_endian ? i : 3 - i)]);
            v = (v << 8) | byte;
        }
        return v;
    }
};

struct TiffEntry {
    std::uint16_t type = 0;
    std::uint32_t count = 0;
    std::size_t value_off = 0; // offset of the 4-byte value field itself
};

inline std::size_t tiff_type_size(std::uint16_t type) {
    switch (type) {
        case 1: return 1;  // BYTE
        case 3: return 2;  // SHORT
        case 4: return 4;  // LONG
        case 5: return 8;  // RATIONAL
        default: return 0; // unsupported for our tags
    }
}

// Reads element `idx` of an entry as an unsigned integer.
inline std::uint32_t entry_uint(const TiffReader& r, const TiffEntry& e,
                                std::uint32_t idx) {
    std::size_t esize = tiff_type_size(e.type);
    if (esize == 0 || e.type == 5)
        throw UnsupportedFeature("TIFF tag has non-integer type " +
                                 std::to_string(e.type));
    if (idx >= e.count) throw NotTiff("TIFF tag index out of range");
    std::size_t base = (esize * e.count <= 4)
                           ? e.value_off
                           : static_cast<std::size_t>(r.u32_at(e.value_off));
    std::size_t off = base + esize * idx;
    switch (esize) {
        case 1:
            if (off >= r.bytes.size()) throw TruncatedFile("TIFF value beyond file end");
            return static_cast<std::uint8_t>(r.bytes[off]);
        case 2: return r.u16_at(off);
        default: return r.u32_at(off);
    }
}

inline double entry_rational(const TiffReader& r, const TiffEntry& e) {
    if (e.type != 5) throw UnsupportedFeature("TIFF resolution tag is not RATIONAL");
    std::size_t base = static_cast<std::size_t>(r.u32_at(e.value_off));
    std::uint32_t num = r.u32_at(base);
    std::uint32_t den = r.u32_at(base + 4);
    if (den == 0) return 0.0;
    return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace detail

inline GrayMask read_tiff(std::string_view bytes) {
    if (bytes.size() < 8) throw NotTiff("file shorter than a TIFF header");
    detail::TiffReader r{bytes};
    if (bytes.substr(0, 2) == "II")
        r.big_endian = false;
    else if (bytes.substr(0, 2) == "MM")
        r.big_endian = true;
    else
        throw NotTiff("byte-order mark is neither 'II' nor 'MM'");
    if (r.u16_at(2) != 42) throw NotTiff("magic number is not 42");

    std::size_t ifd = r.u32_at(4);
    if (ifd < 8 || ifd + 2 > bytes.size())
        throw NotTiff("first IFD offset outside the file");
    std::uint16_t n_entries = r.u16_at(ifd);
    if (n_entries == 0) throw NotTiff("empty IFD");
    if (ifd + 2 + 12 * static_cast<std::size_t>(n_entries) + 4 > bytes.size())
        throw TruncatedFile("IFD extends beyond file end");

    std::optional<detail::TiffEntry> tags[350];
    auto get = [&](int tag) -> std::optional<detail::TiffEntry>& { return tags[tag]; };
    for (std::uint16_t i = 0; i < n_entries; ++i) {
        std::size_t off = ifd + 2 + 12 * static_cast<std::size_t>(i);
        std::uint16_t tag = r.u16_at(off);
        detail::TiffEntry e;
        e.type = r.u16_at(off + 2);
        e.count = r.u32_at(off + 4);
        e.value_off = off + 8;
        if (tag < 350) tags[tag] = e;
    }

    for (int tiled : {322, 323, 324, 325})
        if (get(tiled)) throw UnsupportedFeature("tiled TIFF is not supported");
    if (!get(256) || !get(257) || !get(273))
        throw NotTiff("required tag missing (width/length/strip offsets)");

    std::uint32_t width = detail::entry_uint(r, *get(256), 0);
    std::uint32_t height = detail::entry_uint(r, *get(257), 0);
    if (width == 0 || height == 0) throw NotTiff("zero image dimensions");

    std::uint32_t compression = get(259) ? detail::entry_uint(r, *get(259), 0) : 1;
    if (compression != 1)
        throw UnsupportedFeature("compression " + std::to_string(compression) +
                                 " (only uncompressed = 1 is supported)");
    if (get(277) && detail::entry_uint(r, *get(277), 0) != 1)
        throw UnsupportedFeature("multi-sample TIFF (color?) is not supported");
    std::uint32_t bits = get(258) ? detail::entry_uint(r, *get(258), 0) : 1;
    if (bits != 8)
        throw UnsupportedFeature("bits-per-sample " + std::to_string(bits) +
                                 " (only 8 is supported)");
    if (get(339) && detail::entry_uint(r, *get(339), 0) != 1)
        throw UnsupportedFeature("non-unsigned sample format");
    std::uint32_t photometric = get(262) ? detail::entry_uint(r, *get(262), 0) : 1;
    if (photometric > 1)
        throw UnsupportedFeature("photometric " + std::to_string(photometric) +
                                 " (only grayscale 0/1 is supported)");

    std::uint32_t rows_per_strip =
        get(278) ? detail::entry_uint(r, *get(278), 0) : height;
    if (rows_per_strip == 0) throw NotTiff("RowsPerStrip is zero");
    const detail::TiffEntry& strips = *get(273);
    std::uint32_t n_strips = strips.count;
    std::uint64_t expected_strips =
        (static_cast<std::uint64_t>(height) + rows_per_strip - 1) / rows_per_strip;
    if (n_strips != expected_strips)
        throw NotTiff("strip count inconsistent with image height");

    GrayMask mask;
    mask.px_w = static_cast<int>(width);
    mask.px_h = static_cast<int>(height);
    mask.pixels.reserve(static_cast<std::size_t>(width) * height);

    for (std::uint32_t s = 0; s < n_strips; ++s) {
        std::uint64_t row0 = static_cast<std::uint64_t>(s) * rows_per_strip;
        std::uint64_t rows = std::min<std::uint64_t>(rows_per_strip, height - row0);
        std::uint64_t need = rows * width;
        std::size_t off = detail::entry_uint(r, strips, s);
        if (get(279)) {
            std::uint64_t declared = detail::entry_uint(r, *get(279), s);
            if (declared < need)
                throw TruncatedFile("strip " + std::to_string(s) +
                                    " byte count below row data size");
        }
        if (off + need > bytes.size())
            throw TruncatedFile("strip " + std::to_string(s) + " runs past file end");
        const char* src = bytes.data() + off;
        mask.pixels.insert(mask.pixels.end(),
                           reinterpret_cast<const std::uint8_t*>(src),
                           reinterpret_cast<const std::uint8_t*>(src) + need);
    }
    if (photometric == 0) // WhiteIsZero -> normalize to BlackIsZero
        for (std::uint8_t& p : mask.pixels) p = static_cast<std::uint8_t>(255 - p);

    std::uint32_t res_unit = get(296) ? detail::entry_uint(r, *get(296), 0) : 2;
    double per_unit_um = res_unit == 3 ? 10000.0 : res_unit == 2 ? 25400.0 : 0.0;
    if (per_unit_um > 0.0) {
        if (get(282)) {
            double xres = detail::entry_rational(r, *get(282));
            if (xres > 0.0) mask.pitch_x_um = per_unit_um / xres;
        }
        if (get(283)) {
            double yres = detail::entry_rational(r, *get(283));
            if (yres > 0.0) mask.pitch_y_um = per_unit_um / yres;
        }
    }
    return mask;
}

// Counterpart of write_float_tiff: 32-bit float grayscale back into a
// HeightField. Resolution tags are required (they size the working area).
inline HeightField read_float_tiff(std::string_view bytes) {
    if (bytes.size() < 8) throw NotTiff("file shorter than a TIFF header");
    detail::TiffReader r{bytes};
    if (bytes.substr(0, 2) == "II")
        r.big_endian = false;
    else if (bytes.substr(0, 2) == "MM")
        r.big_endian = true;
    else
        throw NotTiff("byte-order mark is neither 'II' nor 'MM'");
    if (r.u16_at(2) != 42) throw NotTiff("magic number is not 42");

    std::size_t ifd = r.u32_at(4);
    if (ifd < 8 || ifd + 2 > bytes.size())
        throw NotTiff("first IFD offset outside the file");
    std::uint16_t n_entries = r.u16_at(ifd);
    if (ifd + 2 + 12 * static_cast<std::size_t>(n_entries) + 4 > bytes.size())
        throw TruncatedFile("IFD extends beyond file end");

    std::optional<detail::TiffEntry> tags[350];
    for (std::uint16_t i = 0; i < n_entries; ++i) {
        std::size_t off = ifd + 2 + 12 * static_cast<std::size_t>(i);
        std::uint16_t tag = r.u16_at(off);
        detail::TiffEntry e;
        e.type = r.u16_at(off + 2);
        e.count = r.u32_at(off + 4);
        e.value_off = off + 8;
        if (tag < 350) tags[tag] = e;
    }
    auto get = [&](int tag) -> std::optional<detail::TiffEntry>& { return tags[tag]; };

    if (!get(256) || !get(257) || !get(273))
        throw NotTiff("required tag missing (width/length/strip offsets)");
    if (get(259) && detail::entry_uint(r, *get(259), 0) != 1)
        throw UnsupportedFeature("compressed float TIFF is not supported");
    if (!get(339) || detail::entry_uint(r, *get(339), 0) != 3 || !get(258) ||
        detail::entry_uint(r, *get(258), 0) != 32)
        throw UnsupportedFeature("expected 32-bit IEEE float samples");
    std::uint32_t width = detail::entry_uint(r, *get(256), 0);
    std::uint32_t height = detail::entry_uint(r, *get(257), 0);
    if (width == 0 || height == 0) throw NotTiff("zero image dimensions");

    std::uint32_t rows_per_strip =
        get(278) ? detail::entry_uint(r, *get(278), 0) : height;
    if (rows_per_strip == 0) throw NotTiff("RowsPerStrip is zero");
    const detail::TiffEntry& strips = *get(273);
    std::uint64_t expected_strips =
        (static_cast<std::uint64_t>(height) + rows_per_strip - 1) / rows_per_strip;
    if (strips.count != expected_strips)
        throw NotTiff("strip count inconsistent with image height");

    std::optional<double> pitch_x, pitch_y;
    std::uint32_t res_unit = get(296) ? detail::entry_uint(r, *get(296), 0) : 2;
    double per_unit_um = res_unit == 3 ? 10000.0 : res_unit == 2 ? 25400.0 : 0.0;
    if (per_unit_um > 0.0) {
        if (get(282)) {
            double xres = detail::entry_rational(r, *get(282));
            if (xres > 0.0) pitch_x = per_unit_um / xres;
        }
        if (get(283)) {
            double yres = detail::entry_rational(r, *get(283));
            if (yres > 0.0) pitch_y = per_unit_um / yres;
        }
    }
    if (!pitch_x || !pitch_y)
        throw ValidationError("float TIFF lacks resolution tags; working area "
                              "cannot be reconstructed");

    WorkingArea area{*pitch_x * width, *pitch_y * height,
                     static_cast<int>(width), static_cast<int>(height)};
    HeightField field(area);
    std::size_t cell = 0;
    for (std::uint32_t s = 0; s < strips.count; ++s) {
        std::uint64_t row0 = static_cast<std::uint64_t>(s) * rows_per_strip;
        std::uint64_t rows = std::min<std::uint64_t>(rows_per_strip, height - row0);
        std::uint64_t need = rows * width * 4;
        std::size_t off = detail::entry_uint(r, strips, s);
        if (off + need > bytes.size())
            throw TruncatedFile("strip " + std::to_string(s) + " runs past file end");
        for (std::uint64_t k = 0; k < rows * width; ++k) {
            std::uint32_t raw = r.u32_at(off + 4 * k);
            float f;
            std::memcpy(&f, &raw, 4);
            if (!std::isfinite(f) || f < 0.0f)
                throw NegativeDepth("float TIFF removal value " +
                                    std::to_string(f) + " at pixel " +
                                    std::to_string(cell) + " is not a depth");
            field.removal[cell++] = static_cast<double>(f);
        }
    }
    return field;
}

} // namespace graylith
