// mesh.hpp - triangle soup with validation and affine transforms.
//
// Conventions: right-handed coordinates, +z up, all lengths in micrometers.
// The rasterizer looks straight down -z, so x/y place a design on the mask
// and z is surface elevation.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "graylith/errors.hpp"

namespace graylith {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend bool operator==(Vec3 a, Vec3 b) { return a.x == b.x && a.y == b.y && a.z == b.z; }
};

inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(Vec3 v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

inline bool finite(Vec3 v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

struct Triangle {
    Vec3 a, b, c;

    double area() const { return 0.5 * norm(cross(b - a, c - a)); }
};

struct Mesh {
    std::vector<Triangle> triangles;
    std::string name; // solid name from STL, empty otherwise

    bool empty() const { return triangles.empty(); }
    std::size_t size() const { return triangles.size(); }
};

// Triangles with area at or below this (um^2) count as degenerate.
inline constexpr double kDegenerateAreaUm2 = 1e-12;

struct MeshReport {
    std::size_t triangle_count = 0;
    std::size_t degenerate_count = 0;
    Vec3 bbox_min{0, 0, 0};
    Vec3 bbox_max{0, 0, 0};
    bool has_bbox = false; // false for an empty mesh
};

// Scans the mesh once; throws InvalidCoordinate on NaN/Inf vertices.
inline MeshReport validate_mesh(const Mesh& mesh) {
    MeshReport rep;
    rep.triangle_count = mesh.triangles.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    Vec3 lo{inf, inf, inf}, hi{-inf, -inf, -inf};
    for (const Triangle& t : mesh.triangles) {
        for (const Vec3& v : {t.a, t.b, t.c}) {
            if (!finite(v))
                throw InvalidCoordinate("mesh contains a non-finite vertex coordinate");
            lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
            hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
        }
        if (t.area() <= kDegenerateAreaUm2) ++rep.degenerate_count;
    }
    if (!mesh.triangles.empty()) {
        rep.bbox_min = lo;
        rep.bbox_max = hi;
        rep.has_bbox = true;
    }
    return rep;
}

// v' = v * scale + translate, componentwise. Scale components must be finite
// and nonzero (a zero component silently flattens the mesh; reject instead).
inline Mesh transform_mesh(const Mesh& mesh, Vec3 scale, Vec3 translate) {
    for (double s : {scale.x, scale.y, scale.z})
        if (s == 0.0 || !std::isfinite(s))
            throw ZeroScale("transform scale components must be finite and nonzero");
    if (!finite(translate))
        throw InvalidCoordinate("transform translation must be finite");
    Mesh out;
    out.name = mesh.name;
    out.triangles.reserve(mesh.triangles.size());
    auto map = [&](Vec3 v) -> Vec3 {
        return {v.x * scale.x + translate.x,
                v.y * scale.y + translate.y,
                v.z * scale.z + translate.z};
    };
    for (const Triangle& t : mesh.triangles)
        out.triangles.push_back({map(t.a), map(t.b), map(t.c)});
    return out;
}

} // namespace graylith
