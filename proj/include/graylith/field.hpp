// field.hpp - working area geometry plus the two scalar grids everything
// else passes around: ElevationField (rasterizer output, um above z=0,
// -inf where nothing was hit) and HeightField (removal depth in um, >= 0).
//
// Grids are row-major. Pixel (row i, col j) has its center at
//   x = (j + 0.5) * pitch_x,  y = (i + 0.5) * pitch_y
// with row 0 at the smallest y.
#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "graylith/errors.hpp"

namespace graylith {

struct WorkingArea {
    double width_um = 0.0;
    double height_um = 0.0;
    int px_w = 0;
    int px_h = 0;

    double pitch_x() const { return width_um / px_w; }
    double pitch_y() const { return height_um / px_h; }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(px_w) * static_cast<std::size_t>(px_h);
    }

    void validate() const {
        if (px_w <= 0 || px_h <= 0 || !(width_um > 0.0) || !(height_um > 0.0))
            throw ValidationError("working area must have positive size");
    }

    friend bool operator==(const WorkingArea& a, const WorkingArea& b) {
        return a.width_um == b.width_um && a.height_um == b.height_um &&
               a.px_w == b.px_w && a.px_h == b.px_h;
    }
};

// Full DMD field of the writer described in the docs: 1920 x 1080 mirrors,
// 0.5 um per pixel, i.e. 960 x 540 um^2.
inline WorkingArea default_working_area() { return {960.0, 540.0, 1920, 1080}; }

// Marks pixels no triangle covered.
inline constexpr double kBackground = -std::numeric_limits<double>::infinity();

struct ElevationField {
    WorkingArea area;
    std::vector<double> z; // um, kBackground where uncovered

    explicit ElevationField(const WorkingArea& a = {})
        : area(a), z(a.pixel_count(), kBackground) {}

    double& at(int i, int j) { return z[static_cast<std::size_t>(i) * area.px_w + j]; }
    double at(int i, int j) const { return z[static_cast<std::size_t>(i) * area.px_w + j]; }
};

struct HeightField {
    WorkingArea area;
    std::vector<double> removal; // um of resist removed, >= 0

    explicit HeightField(const WorkingArea& a = {}, double fill = 0.0)
        : area(a), removal(a.pixel_count(), fill) {}

    double& at(int i, int j) { return removal[static_cast<std::size_t>(i) * area.px_w + j]; }
    double at(int i, int j) const { return removal[static_cast<std::size_t>(i) * area.px_w + j]; }
};

} // namespace graylith
