// shapes.hpp - analytic removal-depth generators for the stock test
// structures (ramps, stairs, sinusoids, lens arrays, simple solids) plus
// relief inversion for mold masks.
//
// Every generator samples pixel centers. Local coordinates (u, v) run from
// the footprint origin; a pixel belongs to the shape when its center lies in
// [0, w) x [0, h). Overlapping shapes combine by pixelwise max.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "graylith/errors.hpp"
#include "graylith/field.hpp"

namespace graylith {

enum class ShapeKind {
    ramp,       // removal rises linearly 0 -> max_depth along +u
    stairs,     // n_steps equal treads, first tread already one step deep
    sinusoid,   // egg-crate: product of x and y sines around max_depth/2
    lens_array, // grid of concave spherical-cap lenses
    pyramid,    // square base, apex up (deepest at the rim)
    cone,       // circular base, apex up
    cylinder,   // flat-topped circular post
    cube,       // flat-topped square post
    hemisphere, // single dome
};

inline const char* to_string(ShapeKind k) {
    switch (k) {
        case ShapeKind::ramp: return "ramp";
        case ShapeKind::stairs: return "stairs";
        case ShapeKind::sinusoid: return "sinusoid";
        case ShapeKind::lens_array: return "lens_array";
        case ShapeKind::pyramid: return "pyramid";
        case ShapeKind::cone: return "cone";
        case ShapeKind::cylinder: return "cylinder";
        case ShapeKind::cube: return "cube";
        case ShapeKind::hemisphere: return "hemisphere";
    }
    return "?";
}

inline ShapeKind shape_kind_from_string(const std::string& s) {
    for (ShapeKind k : {ShapeKind::ramp, ShapeKind::stairs, ShapeKind::sinusoid,
                        ShapeKind::lens_array, ShapeKind::pyramid, ShapeKind::cone,
                        ShapeKind::cylinder, ShapeKind::cube, ShapeKind::hemisphere})
        if (s == to_string(k)) return k;
    throw ValidationError("unknown shape kind '" + s + "'");
}

struct ShapeSpec {
    ShapeKind kind = ShapeKind::ramp;
    double origin_x_um = 0.0; // footprint corner in working-area coordinates
    double origin_y_um = 0.0;
    double width_um = 250.0; // footprint, matches the 250 x 250 um^2 test dies
    double height_um = 250.0;
    double max_depth_um = 15.0;

    int n_steps = 5; // stairs

    double amplitude_um = -1.0; // sinusoid; < 0 means max_depth/2
    double freq_x_per_um = 0.01; // cycles per um
    double freq_y_per_um = 0.01;
    double phase_rad = 0.0;

    double lens_diameter_um = 30.0; // lens_array
    double lens_pitch_um = -1.0;    // < 0 means diameter (close packed)
    double dome_height_um = -1.0;   // sag; < 0 means radius (true hemispherical cap)

    double base_size_um = 10.0; // pyramid/cone/cylinder/cube/hemisphere: side or diameter
    double solid_height_um = -1.0; // < 0 means base_size (hemisphere: base_size/2)
};

namespace detail {

// Concave cap: removal max_depth at the base circle, max_depth - sag at the
// apex, elliptical profile scale*sqrt(r^2 - d^2). For sag == r this is an
// exact spherical cap (a full hemisphere).
inline double cap_removal(double du, double dv, double radius, double sag,
                          double max_depth) {
    double d2 = radius * radius - (du * du + dv * dv);
    if (d2 <= 0.0) return max_depth;
    return max_depth - (sag / radius) * std::sqrt(d2);
}

} // namespace detail

inline void validate_shape(const ShapeSpec& s) {
    if (!(s.width_um > 0.0) || !(s.height_um > 0.0))
        throw ValidationError("shape footprint must be positive");
    if (!(s.max_depth_um > 0.0))
        throw ValidationError("shape max_depth must be positive");
    if (s.kind == ShapeKind::stairs && s.n_steps < 1)
        throw ValidationError("stairs need n_steps >= 1");
    if (s.kind == ShapeKind::sinusoid) {
        if (s.freq_x_per_um < 0.0 || s.freq_y_per_um < 0.0)
            throw ValidationError("sinusoid frequencies must be >= 0");
        if (s.amplitude_um >= 0.0 && s.amplitude_um > s.max_depth_um / 2.0)
            throw ValidationError("sinusoid amplitude may not exceed max_depth/2");
    }
    if (s.kind == ShapeKind::lens_array) {
        if (!(s.lens_diameter_um > 0.0))
            throw ValidationError("lens diameter must be positive");
        double sag = s.dome_height_um < 0.0 ? s.lens_diameter_um / 2.0 : s.dome_height_um;
        if (!(sag > 0.0) || sag > s.max_depth_um)
            throw ValidationError("lens sag must lie in (0, max_depth]");
    }
    if (s.kind == ShapeKind::hemisphere || s.kind == ShapeKind::pyramid ||
        s.kind == ShapeKind::cone || s.kind == ShapeKind::cylinder ||
        s.kind == ShapeKind::cube) {
        if (!(s.base_size_um > 0.0))
            throw ValidationError("solid base size must be positive");
        double h = s.solid_height_um;
        if (h >= 0.0 && h > s.max_depth_um)
            throw ValidationError("solid height may not exceed max_depth");
    }
}

// Removal depth of one shape at local footprint coordinates (u, v), both
// already verified to lie in [0, w) x [0, h).
inline double shape_removal(const ShapeSpec& s, double u, double v) {
    const double w = s.width_um, h = s.height_um, d = s.max_depth_um;
    switch (s.kind) {
        case ShapeKind::ramp:
            return d * (u / w);
        case ShapeKind::stairs: {
            double tread = std::floor(static_cast<double>(s.n_steps) * u / w);
            double r = d * (1.0 + tread) / s.n_steps;
            return std::min(r, d);
        }
        case ShapeKind::sinusoid: {
            double amp = s.amplitude_um < 0.0 ? d / 2.0 : s.amplitude_um;
            double tau = 2.0 * std::numbers::pi;
            double sx = std::sin(tau * s.freq_x_per_um * u + s.phase_rad);
            double sy = std::sin(tau * s.freq_y_per_um * v + s.phase_rad);
            return d / 2.0 + amp * sx * sy;
        }
        case ShapeKind::lens_array: {
            double pitch = s.lens_pitch_um < 0.0 ? s.lens_diameter_um : s.lens_pitch_um;
            double radius = s.lens_diameter_um / 2.0;
            double sag = s.dome_height_um < 0.0 ? radius : s.dome_height_um;
            // nearest lens center on the pitch grid (centers at half pitches)
            double cu = (std::floor(u / pitch) + 0.5) * pitch;
            double cv = (std::floor(v / pitch) + 0.5) * pitch;
            return detail::cap_removal(u - cu, v - cv, radius, sag, d);
        }
        case ShapeKind::pyramid: {
            double a = s.base_size_um / 2.0;
            double hh = s.solid_height_um < 0.0 ? s.base_size_um : s.solid_height_um;
            double du = std::abs(u - w / 2.0), dv = std::abs(v - h / 2.0);
            double linf = std::max(du, dv);
            if (linf >= a) return d;
            return d - hh * (1.0 - linf / a);
        }
        case ShapeKind::cone: {
            double a = s.base_size_um / 2.0;
            double hh = s.solid_height_um < 0.0 ? s.base_size_um : s.solid_height_um;
            double du = u - w / 2.0, dv = v - h / 2.0;
            double l2 = std::sqrt(du * du + dv * dv);
            if (l2 >= a) return d;
            return d - hh * (1.0 - l2 / a);
        }
        case ShapeKind::cylinder: {
            double a = s.base_size_um / 2.0;
            double hh = s.solid_height_um < 0.0 ? s.base_size_um : s.solid_height_um;
            double du = u - w / 2.0, dv = v - h / 2.0;
            return (du * du + dv * dv < a * a) ? d - hh : d;
        }
        case ShapeKind::cube: {
            double a = s.base_size_um / 2.0;
            double hh = s.solid_height_um < 0.0 ? s.base_size_um : s.solid_height_um;
            double du = std::abs(u - w / 2.0), dv = std::abs(v - h / 2.0);
            return (std::max(du, dv) < a) ? d - hh : d;
        }
        case ShapeKind::hemisphere: {
            double radius = s.base_size_um / 2.0;
            double sag = s.solid_height_um < 0.0 ? radius : s.solid_height_um;
            return detail::cap_removal(u - w / 2.0, v - h / 2.0, radius, sag, d);
        }
    }
    return 0.0;
}

// Renders one shape into `out` (pixelwise max). The footprint must fit the
// working area; a small epsilon forgives decimal dust on the far edge.
inline void add_shape(HeightField& out, const ShapeSpec& s) {
    validate_shape(s);
    const WorkingArea& area = out.area;
    constexpr double eps = 1e-9;
    if (s.origin_x_um < -eps || s.origin_y_um < -eps ||
        s.origin_x_um + s.width_um > area.width_um + eps ||
        s.origin_y_um + s.height_um > area.height_um + eps)
        throw FootprintOverflow(std::string(to_string(s.kind)) + " footprint [" +
                                std::to_string(s.width_um) + " x " +
                                std::to_string(s.height_um) + "] um at (" +
                                std::to_string(s.origin_x_um) + ", " +
                                std::to_string(s.origin_y_um) +
                                ") exceeds the working area");

    const double pitch_x = area.pitch_x(), pitch_y = area.pitch_y();
    int j0 = std::max(0, static_cast<int>(std::ceil(s.origin_x_um / pitch_x - 0.5)));
    int j1 = std::min(area.px_w - 1,
                      static_cast<int>(std::floor((s.origin_x_um + s.width_um) / pitch_x - 0.5)));
    int i0 = std::max(0, static_cast<int>(std::ceil(s.origin_y_um / pitch_y - 0.5)));
    int i1 = std::min(area.px_h - 1,
                      static_cast<int>(std::floor((s.origin_y_um + s.height_um) / pitch_y - 0.5)));

    for (int i = i0; i <= i1; ++i) {
        double v = (i + 0.5) * pitch_y - s.origin_y_um;
        if (v < 0.0 || v >= s.height_um) continue;
        for (int j = j0; j <= j1; ++j) {
            double u = (j + 0.5) * pitch_x - s.origin_x_um;
            if (u < 0.0 || u >= s.width_um) continue;
            double r = std::clamp(shape_removal(s, u, v), 0.0, s.max_depth_um);
            double& cell = out.at(i, j);
            if (r > cell) cell = r;
        }
    }
}

inline HeightField generate_shape(const ShapeSpec& s, const WorkingArea& area) {
    area.validate();
    HeightField out(area);
    add_shape(out, s);
    return out;
}

// Complement for mold masks: r' = max_depth - r. Involutive wherever the
// complement is itself exactly representable.
inline HeightField invert_relief(const HeightField& field, double max_depth_um) {
    if (!(max_depth_um > 0.0))
        throw ValidationError("max depth must be positive");
    HeightField out(field.area);
    for (std::size_t k = 0; k < field.removal.size(); ++k) {
        double r = field.removal[k];
        if (r < 0.0 || r > max_depth_um)
            throw DepthOverflow("removal " + std::to_string(r) +
                                " um outside [0, " + std::to_string(max_depth_um) +
                                "] um at pixel " + std::to_string(k));
        out.removal[k] = max_depth_um - r;
    }
    return out;
}

} // namespace graylith
