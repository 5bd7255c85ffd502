// raster.hpp - orthographic top-down triangle rasterizer with a max-z depth
// buffer, and the elevation -> removal conversion.
//
// Coverage is decided in integer arithmetic: vertices snap to a 1/256-pixel
// subgrid and a pixel center is inside when all three edge functions are
// positive, or zero on an edge the triangle owns under the top-left rule.
// Two triangles sharing an edge therefore cover each center exactly once,
// for any vertex order. Elevation itself is interpolated from the original
// double-precision vertices via the plane equation, so flat geometry stays
// exact; interpolated z is clamped to the triangle's own [z_min, z_max].
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "graylith/errors.hpp"
#include "graylith/field.hpp"
#include "graylith/mesh.hpp"

namespace graylith {

namespace detail {

inline constexpr std::int64_t kSubpixels = 256; // snap resolution per pixel

// Top-left ownership for a directed edge (dx, dy) of a triangle oriented
// with positive integer area. Row 0 sits at the smallest y, so "top" edges
// run in +x with the interior above them in image terms.
inline bool edge_owned(std::int64_t dx, std::int64_t dy) {
    return dy < 0 || (dy == 0 && dx > 0);
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
    return -floor_div(-a, b);
}

} // namespace detail

inline ElevationField rasterize_top_view(const Mesh& mesh, const WorkingArea& area) {
    area.validate();
    ElevationField field(area);
    const double pitch_x = area.pitch_x();
    const double pitch_y = area.pitch_y();
    const std::int64_t S = detail::kSubpixels;

    for (const Triangle& tri : mesh.triangles) {
        if (!finite(tri.a) || !finite(tri.b) || !finite(tri.c))
            throw InvalidCoordinate("mesh contains a non-finite vertex coordinate");

        // Snapped subpixel coordinates (x in units of pitch_x/256, y likewise).
        std::int64_t ax = std::llround(tri.a.x / pitch_x * S);
        std::int64_t ay = std::llround(tri.a.y / pitch_y * S);
        std::int64_t bx = std::llround(tri.b.x / pitch_x * S);
        std::int64_t by = std::llround(tri.b.y / pitch_y * S);
        std::int64_t cx = std::llround(tri.c.x / pitch_x * S);
        std::int64_t cy = std::llround(tri.c.y / pitch_y * S);

        __int128 area2 = static_cast<__int128>(bx - ax) * (cy - ay) -
                         static_cast<__int128>(by - ay) * (cx - ax);
        if (area2 == 0) continue; // zero footprint after snapping
        if (area2 < 0) {          // orient positive; z-plane below is order-free
            std::swap(bx, cx);
            std::swap(by, cy);
        }

        // Plane through the *unsnapped* vertices: z = za - (nx dx + ny dy)/nz.
        Vec3 n = cross(tri.b - tri.a, tri.c - tri.a);
        if (n.z == 0.0) continue; // vertical wall, no top surface
        const double z_lo = std::min({tri.a.z, tri.b.z, tri.c.z});
        const double z_hi = std::max({tri.a.z, tri.b.z, tri.c.z});

        // Candidate pixel centers: cx_j = j*S + S/2 within the snapped bbox.
        std::int64_t sx_min = std::min({ax, bx, cx}), sx_max = std::max({ax, bx, cx});
        std::int64_t sy_min = std::min({ay, by, cy}), sy_max = std::max({ay, by, cy});
        std::int64_t j0 = std::max<std::int64_t>(0, detail::ceil_div(sx_min - S / 2, S));
        std::int64_t j1 = std::min<std::int64_t>(area.px_w - 1, detail::floor_div(sx_max - S / 2, S));
        std::int64_t i0 = std::max<std::int64_t>(0, detail::ceil_div(sy_min - S / 2, S));
        std::int64_t i1 = std::min<std::int64_t>(area.px_h - 1, detail::floor_div(sy_max - S / 2, S));

        const std::int64_t e0dx = bx - ax, e0dy = by - ay;
        const std::int64_t e1dx = cx - bx, e1dy = cy - by;
        const std::int64_t e2dx = ax - cx, e2dy = ay - cy;
        const bool own0 = detail::edge_owned(e0dx, e0dy);
        const bool own1 = detail::edge_owned(e1dx, e1dy);
        const bool own2 = detail::edge_owned(e2dx, e2dy);

        for (std::int64_t i = i0; i <= i1; ++i) {
            const std::int64_t py = i * S + S / 2;
            for (std::int64_t j = j0; j <= j1; ++j) {
                const std::int64_t px = j * S + S / 2;
                __int128 e0 = static_cast<__int128>(e0dx) * (py - ay) -
                              static_cast<__int128>(e0dy) * (px - ax);
                if (e0 < 0 || (e0 == 0 && !own0)) continue;
                __int128 e1 = static_cast<__int128>(e1dx) * (py - by) -
                              static_cast<__int128>(e1dy) * (px - bx);
                if (e1 < 0 || (e1 == 0 && !own1)) continue;
                __int128 e2 = static_cast<__int128>(e2dx) * (py - cy) -
                              static_cast<__int128>(e2dy) * (px - cx);
                if (e2 < 0 || (e2 == 0 && !own2)) continue;

                const double x_um = (j + 0.5) * pitch_x;
                const double y_um = (i + 0.5) * pitch_y;
                double z = tri.a.z - (n.x * (x_um - tri.a.x) + n.y * (y_um - tri.a.y)) / n.z;
                z = std::clamp(z, z_lo, z_hi);
                double& cell = field.at(static_cast<int>(i), static_cast<int>(j));
                if (z > cell) cell = z;
            }
        }
    }
    return field;
}

// removal = clamp(z_top - z, 0, max_depth) on covered pixels; uncovered
// pixels receive background_removal. A single ClampWarning totals how many
// covered pixels hit either clamp.
inline HeightField elevation_to_removal(const ElevationField& elev, double z_top_um,
                                        double max_depth_um,
                                        double background_removal_um = 0.0,
                                        WarningLog* warnings = nullptr) {
    if (!(max_depth_um > 0.0) || !std::isfinite(max_depth_um))
        throw ValidationError("max depth must be positive");
    if (!std::isfinite(z_top_um))
        throw InvalidCoordinate("z_top must be finite");
    if (background_removal_um < 0.0 || background_removal_um > max_depth_um)
        throw DepthOverflow("background removal outside [0, max_depth]");

    HeightField out(elev.area);
    std::size_t clamped = 0;
    for (std::size_t k = 0; k < elev.z.size(); ++k) {
        double z = elev.z[k];
        if (z == kBackground) {
            out.removal[k] = background_removal_um;
            continue;
        }
        double r = z_top_um - z;
        if (r < 0.0) {
            r = 0.0;
            ++clamped;
        } else if (r > max_depth_um) {
            r = max_depth_um;
            ++clamped;
        }
        out.removal[k] = r;
    }
    if (clamped > 0)
        warn(warnings, "ClampWarning",
             std::to_string(clamped) + " pixel(s) clamped to [0, " +
                 std::to_string(max_depth_um) + "] um removal",
             clamped);
    return out;
}

} // namespace graylith
