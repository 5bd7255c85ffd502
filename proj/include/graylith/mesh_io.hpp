// mesh_io.hpp - STL (binary + ASCII) and OBJ parsing, binary STL output.
//
// Binary STL layout: 80-byte header, uint32 triangle count n, then n facets
// of 50 bytes each (float32 normal, three float32 vertices, uint16 attribute),
// all little-endian. A stream is treated as binary when its length equals
// 84 + 50*n; otherwise a leading "solid" selects the ASCII grammar.
// Stored facet normals are ignored on input and recomputed on output.
#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "graylith/errors.hpp"
#include "graylith/mesh.hpp"

namespace graylith {

namespace detail {

inline std::uint32_t read_u32le(const char* p) {
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    return v; // host is little-endian (x86-64 / aarch64)
}

inline float read_f32le(const char* p) {
    float v;
    std::memcpy(&v, p, 4);
    return v;
}

inline bool binary_stl_consistent(std::string_view bytes) {
    if (bytes.size() < 84) return false;
    std::uint64_t n = read_u32le(bytes.data() + 80);
    return bytes.size() == 84 + 50 * n;
}

// Splits on unix/dos newlines, keeps 1-based numbering for messages.
struct LineCursor {
    std::string_view text;
    std::size_t pos = 0;
    std::size_t line_no = 0;

    bool next(std::string_view& line) {
        if (pos >= text.size()) return false;
        std::size_t nl = text.find('\n', pos);
        std::size_t end = (nl == std::string_view::npos) ? text.size() : nl;
        line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = (nl == std::string_view::npos) ? text.size() : nl + 1;
        ++line_no;
        return true;
    }
};

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline double parse_double_token(std::string_view tok, std::size_t line_no,
                                 const char* what) {
    std::string buf(tok);
    char* end = nullptr;
    double v = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size())
        throw SyntaxError("line " + std::to_string(line_no) + ": bad " + what +
                          " '" + buf + "'");
    if (!std::isfinite(v))
        throw InvalidCoordinate("line " + std::to_string(line_no) +
                                ": non-finite " + what + " '" + buf + "'");
    return v;
}

} // namespace detail

inline Mesh parse_stl_binary(std::string_view bytes) {
    if (bytes.size() < 84)
        throw TruncatedFile("binary STL shorter than 84-byte preamble (" +
                            std::to_string(bytes.size()) + " bytes)");
    std::uint64_t n = detail::read_u32le(bytes.data() + 80);
    if (bytes.size() != 84 + 50 * n)
        throw TruncatedFile("binary STL length " + std::to_string(bytes.size()) +
                            " != 84 + 50*" + std::to_string(n));
    Mesh mesh;
    mesh.triangles.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k) {
        const char* f = bytes.data() + 84 + 50 * k;
        Triangle t;
        Vec3* verts[3] = {&t.a, &t.b, &t.c};
        for (int vi = 0; vi < 3; ++vi) {
            const char* p = f + 12 + 12 * vi; // skip stored normal
            *verts[vi] = {detail::read_f32le(p),
                          detail::read_f32le(p + 4),
                          detail::read_f32le(p + 8)};
            if (!finite(*verts[vi]))
                throw InvalidCoordinate("binary STL facet " + std::to_string(k) +
                                        " has a non-finite vertex");
        }
        mesh.triangles.push_back(t);
    }
    return mesh;
}

inline Mesh parse_stl_ascii(std::string_view text) {
    detail::LineCursor cur{text};
    std::string_view line;
    Mesh mesh;

    auto fail = [&](const std::string& msg) -> SyntaxError {
        return SyntaxError("line " + std::to_string(cur.line_no) + ": " + msg);
    };
    auto next_tokens = [&](std::vector<std::string_view>& toks) -> bool {
        while (cur.next(line)) {
            toks = detail::split_ws(line);
            if (!toks.empty()) return true;
        }
        return false;
    };

    std::vector<std::string_view> toks;
    bool saw_solid = false;
    while (next_tokens(toks)) {
        if (toks[0] != "solid")
            throw fail("expected 'solid', got '" + std::string(toks[0]) + "'");
        if (!saw_solid && toks.size() > 1)
            mesh.name = std::string(toks[1]);
        saw_solid = true;

        for (;;) {
            if (!next_tokens(toks)) throw fail("unexpected end of file inside solid");
            if (toks[0] == "endsolid") break;
            if (toks[0] != "facet" || toks.size() < 2 || toks[1] != "normal")
                throw fail("expected 'facet normal' or 'endsolid'");
            if (toks.size() != 5) throw fail("'facet normal' needs 3 components");
            // Normal components must at least parse; values are ignored.
            for (int i = 2; i < 5; ++i)
                detail::parse_double_token(toks[i], cur.line_no, "normal component");

            if (!next_tokens(toks) || toks.size() != 2 || toks[0] != "outer" ||
                toks[1] != "loop")
                throw fail("expected 'outer loop'");

            Triangle t;
            Vec3* verts[3] = {&t.a, &t.b, &t.c};
            for (int vi = 0; vi < 3; ++vi) {
                if (!next_tokens(toks)) throw fail("unexpected end of file in loop");
                if (toks[0] != "vertex" || toks.size() != 4)
                    throw fail("expected 'vertex x y z'");
                verts[vi]->x = detail::parse_double_token(toks[1], cur.line_no, "coordinate");
                verts[vi]->y = detail::parse_double_token(toks[2], cur.line_no, "coordinate");
                verts[vi]->z = detail::parse_double_token(toks[3], cur.line_no, "coordinate");
            }
            if (!next_tokens(toks) || toks[0] != "endloop")
                throw fail("expected 'endloop' (exactly 3 vertices per facet)");
            if (!next_tokens(toks) || toks[0] != "endfacet")
                throw fail("expected 'endfacet'");
            mesh.triangles.push_back(t);
        }
    }
    if (!saw_solid) throw SyntaxError("line 1: empty ASCII STL (no 'solid')");
    return mesh;
}

// Autodetecting entry point: ASCII iff the file begins with "solid" AND
// parses under the ASCII grammar. Binary files that merely start with
// "solid" in their comment header (they exist in the wild) fail the ASCII
// parse and fall back to the binary path via the length equation.
inline Mesh parse_stl(std::string_view bytes) {
    if (bytes.substr(0, 5) == "solid") {
        try {
            return parse_stl_ascii(bytes);
        } catch (const ValidationError&) {
            if (detail::binary_stl_consistent(bytes)) return parse_stl_binary(bytes);
            throw; // genuine ASCII syntax problem, keep the line-numbered error
        }
    }
    return parse_stl_binary(bytes);
}

// OBJ subset: 'v' and 'f' records. Faces are fan-triangulated, indices are
// 1-based (negative = relative to current vertex count), 'i/t/n' suffixes are
// ignored. Any other record type is skipped with a warning, once per keyword.
inline Mesh parse_obj(std::string_view text, WarningLog* warnings = nullptr) {
    detail::LineCursor cur{text};
    std::string_view line;
    std::vector<Vec3> vertices;
    Mesh mesh;
    std::vector<std::string> warned_keywords;

    while (cur.next(line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        auto toks = detail::split_ws(line);
        if (toks.empty()) continue;

        if (toks[0] == "v") {
            if (toks.size() < 4)
                throw SyntaxError("line " + std::to_string(cur.line_no) +
                                  ": 'v' needs at least 3 coordinates");
            Vec3 v{detail::parse_double_token(toks[1], cur.line_no, "coordinate"),
                   detail::parse_double_token(toks[2], cur.line_no, "coordinate"),
                   detail::parse_double_token(toks[3], cur.line_no, "coordinate")};
            vertices.push_back(v);
        } else if (toks[0] == "f") {
            if (toks.size() < 4)
                throw SyntaxError("line " + std::to_string(cur.line_no) +
                                  ": 'f' needs at least 3 vertices");
            std::vector<Vec3> poly;
            for (std::size_t i = 1; i < toks.size(); ++i) {
                std::string spec(toks[i].substr(0, toks[i].find('/')));
                char* end = nullptr;
                long idx = std::strtol(spec.c_str(), &end, 10);
                if (end != spec.c_str() + spec.size() || spec.empty())
                    throw SyntaxError("line " + std::to_string(cur.line_no) +
                                      ": bad face index '" + std::string(toks[i]) + "'");
                long resolved = idx > 0 ? idx - 1
                              : idx < 0 ? static_cast<long>(vertices.size()) + idx
                                        : -1;
                if (resolved < 0 || resolved >= static_cast<long>(vertices.size()))
                    throw IndexOutOfRange("line " + std::to_string(cur.line_no) +
                                          ": face index " + std::to_string(idx) +
                                          " outside vertex table of size " +
                                          std::to_string(vertices.size()));
                poly.push_back(vertices[static_cast<std::size_t>(resolved)]);
            }
            for (std::size_t i = 1; i + 1 < poly.size(); ++i)
                mesh.triangles.push_back({poly[0], poly[i], poly[i + 1]});
        } else {
            std::string kw(toks[0]);
            bool seen = false;
            for (const auto& w : warned_keywords) seen = seen || w == kw;
            if (!seen) {
                warned_keywords.push_back(kw);
                warn(warnings, "UnknownRecord",
                     "OBJ record '" + kw + "' ignored (line " +
                         std::to_string(cur.line_no) + ")");
            }
        }
    }
    return mesh;
}

inline std::string write_stl_binary(const Mesh& mesh) {
    std::string out;
    out.resize(84 + 50 * mesh.triangles.size(), '\0');
    const char header[] = "graylith binary STL";
    std::memcpy(out.data(), header, sizeof(header) - 1);
    std::uint32_t n = static_cast<std::uint32_t>(mesh.triangles.size());
    std::memcpy(out.data() + 80, &n, 4);

    auto put_f32 = [&](std::size_t off, double v) {
        float f = static_cast<float>(v);
        std::memcpy(out.data() + off, &f, 4);
    };
    for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
        const Triangle& t = mesh.triangles[k];
        std::size_t off = 84 + 50 * k;
        Vec3 nrm = cross(t.b - t.a, t.c - t.a);
        double len = norm(nrm);
        if (len > 0.0) nrm = {nrm.x / len, nrm.y / len, nrm.z / len};
        put_f32(off + 0, nrm.x);
        put_f32(off + 4, nrm.y);
        put_f32(off + 8, nrm.z);
        const Vec3* verts[3] = {&t.a, &t.b, &t.c};
        for (int vi = 0; vi < 3; ++vi) {
            put_f32(off + 12 + 12 * vi + 0, verts[vi]->x);
            put_f32(off + 12 + 12 * vi + 4, verts[vi]->y);
            put_f32(off + 12 + 12 * vi + 8, verts[vi]->z);
        }
        // attribute byte count stays zero
    }
    return out;
}

} // namespace graylith
