// mask.hpp - 8-bit grayscale mask type, LUT encoding, and the debug PGM
// writer. Black (0) means no removal; brighter pixels remove more resist.
#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "graylith/calibration.hpp"
#include "graylith/errors.hpp"
#include "graylith/field.hpp"

namespace graylith {

struct GrayMask {
    int px_w = 0;
    int px_h = 0;
    std::vector<std::uint8_t> pixels; // row-major, top row first
    std::optional<double> pitch_x_um; // um per pixel, if known
    std::optional<double> pitch_y_um;
    std::string provenance; // LUT id, carried for reports

    std::uint8_t at(int i, int j) const {
        return pixels[static_cast<std::size_t>(i) * px_w + j];
    }
    std::uint8_t& at(int i, int j) {
        return pixels[static_cast<std::size_t>(i) * px_w + j];
    }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(px_w) * static_cast<std::size_t>(px_h);
    }
};

// pixel = LUT(removal / max_depth). Removal beyond the LUT's max depth
// clamps to full scale; one ClampWarning totals the affected pixels.
inline GrayMask encode_mask(const HeightField& field, const DepthToGrayLUT& lut,
                            WarningLog* warnings = nullptr) {
    field.area.validate();
    GrayMask mask;
    mask.px_w = field.area.px_w;
    mask.px_h = field.area.px_h;
    mask.pitch_x_um = field.area.pitch_x();
    mask.pitch_y_um = field.area.pitch_y();
    mask.provenance = lut.id();
    mask.pixels.resize(field.removal.size());

    std::size_t clamped = 0;
    for (std::size_t k = 0; k < field.removal.size(); ++k) {
        double r = field.removal[k];
        if (r < 0.0)
            throw NegativeDepth("removal " + std::to_string(r) +
                                " um is negative at pixel " + std::to_string(k));
        double t = r / lut.max_depth_um;
        if (t > 1.0) {
            t = 1.0;
            ++clamped;
        }
        mask.pixels[k] = lut.at_norm(t);
    }
    if (clamped > 0)
        warn(warnings, "ClampWarning",
             std::to_string(clamped) + " pixel(s) exceeded LUT max depth " +
                 std::to_string(lut.max_depth_um) + " um and were clamped",
             clamped);
    return mask;
}

// Binary PGM (P5), same pixel semantics as the TIFF output.
inline std::string write_pgm(const GrayMask& mask) {
    char header[64];
    int n = std::snprintf(header, sizeof header, "P5\n%d %d\n255\n", mask.px_w,
                          mask.px_h);
    std::string out(header, static_cast<std::size_t>(n));
    out.append(reinterpret_cast<const char*>(mask.pixels.data()),
               mask.pixels.size());
    return out;
}

} // namespace graylith
