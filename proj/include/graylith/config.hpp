// config.hpp - declarative project config: "[section]" headers and
// "key = value" lines. Sections and keys may repeat where that makes sense
// ([shape] blocks, segment/exclude lines). Unknown sections or keys are
// errors, not warnings: a typo in a mask recipe must not pass silently.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graylith/analysis.hpp"
#include "graylith/calibration.hpp"
#include "graylith/devsim.hpp"
#include "graylith/errors.hpp"
#include "graylith/field.hpp"
#include "graylith/mesh.hpp"
#include "graylith/shapes.hpp"

namespace graylith {

struct ConfigSection {
    std::string name;
    std::size_t line_no = 0;
    std::vector<std::pair<std::string, std::string>> entries;

    const std::string* find(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return &v;
        return nullptr;
    }
    std::vector<std::string> all(const std::string& key) const {
        std::vector<std::string> out;
        for (const auto& [k, v] : entries)
            if (k == key) out.push_back(v);
        return out;
    }
};

struct ConfigDoc {
    std::vector<ConfigSection> sections;

    const ConfigSection* find(const std::string& name) const {
        for (const auto& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string_view::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return std::string(s.substr(a, b - a + 1));
}

} // namespace detail

inline ConfigDoc parse_config(std::string_view text) {
    ConfigDoc doc;
    std::size_t pos = 0, line_no = 0;
    while (pos <= text.size()) {
        if (pos == text.size()) break;
        std::size_t nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos
                                                    ? text.size() - pos
                                                    : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        std::string line = detail::trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw SyntaxError("line " + std::to_string(line_no) +
                                  ": unterminated section header");
            std::string name = detail::trim(std::string_view(line).substr(1, line.size() - 2));
            if (name.empty())
                throw SyntaxError("line " + std::to_string(line_no) +
                                  ": empty section name");
            doc.sections.push_back({name, line_no, {}});
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw SyntaxError("line " + std::to_string(line_no) +
                              ": expected 'key = value' or '[section]'");
        if (doc.sections.empty())
            throw SyntaxError("line " + std::to_string(line_no) +
                              ": key before any [section]");
        std::string key = detail::trim(std::string_view(line).substr(0, eq));
        std::string value = detail::trim(std::string_view(line).substr(eq + 1));
        if (key.empty())
            throw SyntaxError("line " + std::to_string(line_no) + ": empty key");
        if (value.empty())
            throw SyntaxError("line " + std::to_string(line_no) + ": empty value for '" +
                              key + "'");
        doc.sections.back().entries.push_back({key, value});
    }
    return doc;
}

namespace detail {

inline ValidationError cfg_error(const ConfigSection& sec, const std::string& key,
                                 const std::string& what) {
    return ValidationError("[" + sec.name + "] " + key + ": " + what);
}

inline double cfg_double(const ConfigSection& sec, const std::string& key,
                         std::optional<double> fallback = {}) {
    const std::string* v = sec.find(key);
    if (!v) {
        if (fallback) return *fallback;
        throw cfg_error(sec, key, "required key missing");
    }
    char* end = nullptr;
    double d = std::strtod(v->c_str(), &end);
    if (end != v->c_str() + v->size() || v->empty())
        throw cfg_error(sec, key, "not a number: '" + *v + "'");
    return d;
}

inline int cfg_int(const ConfigSection& sec, const std::string& key,
                   std::optional<int> fallback = {}) {
    const std::string* v = sec.find(key);
    if (!v) {
        if (fallback) return *fallback;
        throw cfg_error(sec, key, "required key missing");
    }
    char* end = nullptr;
    long n = std::strtol(v->c_str(), &end, 10);
    if (end != v->c_str() + v->size() || v->empty())
        throw cfg_error(sec, key, "not an integer: '" + *v + "'");
    return static_cast<int>(n);
}

inline bool cfg_bool(const ConfigSection& sec, const std::string& key,
                     bool fallback) {
    const std::string* v = sec.find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw cfg_error(sec, key, "expected true/false, got '" + *v + "'");
}

inline std::vector<double> cfg_tuple(const ConfigSection& sec, const std::string& key,
                                     const std::string& value, std::size_t arity) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        std::size_t comma = value.find(',', start);
        std::string part = trim(std::string_view(value).substr(
            start, comma == std::string::npos ? value.size() - start : comma - start));
        char* end = nullptr;
        double d = std::strtod(part.c_str(), &end);
        if (part.empty() || end != part.c_str() + part.size())
            throw cfg_error(sec, key, "bad component '" + part + "'");
        out.push_back(d);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.size() != arity)
        throw cfg_error(sec, key, "expected " + std::to_string(arity) +
                                      " comma-separated numbers");
    return out;
}

inline void cfg_check_keys(const ConfigSection& sec,
                           std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : sec.entries) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw cfg_error(sec, k, "unknown key");
    }
}

} // namespace detail

struct MeshJob {
    std::filesystem::path file;
    Vec3 scale{1.0, 1.0, 1.0};
    Vec3 translate_um{0.0, 0.0, 0.0};
    std::optional<double> z_top_um; // default: mesh bbox z-max
    double background_removal_um = 0.0;
};

struct ProjectConfig {
    WorkingArea area = default_working_area();
    std::filesystem::path calibration_file; // empty: synthetic linear LUT
    FitMethod method = FitMethod::monotone_pchip;
    double max_depth_um = 15.0;
    int lut_entries = 256;

    std::vector<ShapeSpec> shapes; // combined by pixelwise max
    std::optional<MeshJob> mesh;

    BlurSpec blur;

    std::optional<ScanLine> scan;
    std::vector<Segment> segments;
    std::vector<Exclusion> exclusions;

    std::filesystem::path out_dir = "out";
    bool emit_inverted = false; // also write the mold (complement) mask
    bool float_tiff = false;    // dump float32 TIFFs of the height fields
};

// Parses the doc into a typed config. Relative paths resolve against
// `base_dir` (the config file's directory).
inline ProjectConfig project_config_from(const ConfigDoc& doc,
                                         const std::filesystem::path& base_dir) {
    ProjectConfig cfg;
    bool saw_singleton[5] = {}; // area, calibration, mesh, blur, output
    auto once = [&](int slot, const ConfigSection& sec) {
        if (saw_singleton[slot])
            throw ValidationError("[" + sec.name + "]: section appears twice");
        saw_singleton[slot] = true;
    };
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };

    // [area] first: shape origin defaults depend on it, regardless of file order
    for (const ConfigSection& sec : doc.sections) {
        if (sec.name != "area") continue;
        once(0, sec);
        detail::cfg_check_keys(sec, {"width_um", "height_um", "px_w", "px_h"});
        cfg.area.width_um = detail::cfg_double(sec, "width_um", 960.0);
        cfg.area.height_um = detail::cfg_double(sec, "height_um", 540.0);
        cfg.area.px_w = detail::cfg_int(sec, "px_w", 1920);
        cfg.area.px_h = detail::cfg_int(sec, "px_h", 1080);
        cfg.area.validate();
    }

    for (const ConfigSection& sec : doc.sections) {
        if (sec.name == "area") {
            continue; // handled above
        } else if (sec.name == "calibration") {
            once(1, sec);
            detail::cfg_check_keys(sec, {"file", "method", "max_depth_um", "entries"});
            if (const std::string* f = sec.find("file")) cfg.calibration_file = resolve(*f);
            if (const std::string* m = sec.find("method"))
                cfg.method = fit_method_from_string(*m);
            cfg.max_depth_um = detail::cfg_double(sec, "max_depth_um", 15.0);
            if (!(cfg.max_depth_um > 0.0))
                throw detail::cfg_error(sec, "max_depth_um", "must be positive");
            cfg.lut_entries = detail::cfg_int(sec, "entries", 256);
            if (cfg.lut_entries < 2)
                throw detail::cfg_error(sec, "entries", "needs at least 2");
        } else if (sec.name == "mesh") {
            once(2, sec);
            detail::cfg_check_keys(sec, {"file", "scale", "translate_um", "z_top_um",
                                         "background_removal_um"});
            MeshJob job;
            const std::string* f = sec.find("file");
            if (!f) throw detail::cfg_error(sec, "file", "required key missing");
            job.file = resolve(*f);
            if (const std::string* s = sec.find("scale")) {
                auto t = detail::cfg_tuple(sec, "scale", *s, 3);
                job.scale = {t[0], t[1], t[2]};
            }
            if (const std::string* s = sec.find("translate_um")) {
                auto t = detail::cfg_tuple(sec, "translate_um", *s, 3);
                job.translate_um = {t[0], t[1], t[2]};
            }
            if (sec.find("z_top_um")) job.z_top_um = detail::cfg_double(sec, "z_top_um");
            job.background_removal_um =
                detail::cfg_double(sec, "background_removal_um", 0.0);
            cfg.mesh = job;
        } else if (sec.name == "shape") {
            detail::cfg_check_keys(
                sec, {"kind", "origin_um", "width_um", "height_um", "max_depth_um",
                      "n_steps", "amplitude_um", "freq_x_per_um", "freq_y_per_um",
                      "phase_rad", "lens_diameter_um", "lens_pitch_um",
                      "dome_height_um", "base_size_um", "solid_height_um"});
            ShapeSpec s;
            const std::string* kind = sec.find("kind");
            if (!kind) throw detail::cfg_error(sec, "kind", "required key missing");
            s.kind = shape_kind_from_string(*kind);
            s.width_um = detail::cfg_double(sec, "width_um", 250.0);
            s.height_um = detail::cfg_double(sec, "height_um", 250.0);
            s.max_depth_um = detail::cfg_double(sec, "max_depth_um", 15.0);
            if (const std::string* o = sec.find("origin_um")) {
                auto t = detail::cfg_tuple(sec, "origin_um", *o, 2);
                s.origin_x_um = t[0];
                s.origin_y_um = t[1];
            } else { // default: centered in the working area
                s.origin_x_um = (cfg.area.width_um - s.width_um) / 2.0;
                s.origin_y_um = (cfg.area.height_um - s.height_um) / 2.0;
            }
            s.n_steps = detail::cfg_int(sec, "n_steps", 5);
            s.amplitude_um = detail::cfg_double(sec, "amplitude_um", -1.0);
            s.freq_x_per_um = detail::cfg_double(sec, "freq_x_per_um", 0.01);
            s.freq_y_per_um = detail::cfg_double(sec, "freq_y_per_um", 0.01);
            s.phase_rad = detail::cfg_double(sec, "phase_rad", 0.0);
            s.lens_diameter_um = detail::cfg_double(sec, "lens_diameter_um", 30.0);
            s.lens_pitch_um = detail::cfg_double(sec, "lens_pitch_um", -1.0);
            s.dome_height_um = detail::cfg_double(sec, "dome_height_um", -1.0);
            s.base_size_um = detail::cfg_double(sec, "base_size_um", 10.0);
            s.solid_height_um = detail::cfg_double(sec, "solid_height_um", -1.0);
            validate_shape(s);
            cfg.shapes.push_back(s);
        } else if (sec.name == "blur") {
            once(3, sec);
            detail::cfg_check_keys(sec, {"sigma_um", "truncation_radius"});
            cfg.blur.sigma_um = detail::cfg_double(sec, "sigma_um", 0.0);
            if (cfg.blur.sigma_um < 0.0)
                throw detail::cfg_error(sec, "sigma_um", "must be >= 0");
            cfg.blur.truncation_radius = detail::cfg_double(sec, "truncation_radius", 4.0);
            if (!(cfg.blur.truncation_radius > 0.0))
                throw detail::cfg_error(sec, "truncation_radius", "must be positive");
        } else if (sec.name == "analysis") {
            detail::cfg_check_keys(sec, {"scan_from_um", "scan_to_um", "n_samples",
                                         "segment", "exclude"});
            ScanLine scan;
            const std::string* from = sec.find("scan_from_um");
            const std::string* to = sec.find("scan_to_um");
            if (!from || !to)
                throw detail::cfg_error(sec, "scan_from_um/scan_to_um",
                                        "both endpoints are required");
            auto f = detail::cfg_tuple(sec, "scan_from_um", *from, 2);
            auto t = detail::cfg_tuple(sec, "scan_to_um", *to, 2);
            scan.x0_um = f[0];
            scan.y0_um = f[1];
            scan.x1_um = t[0];
            scan.y1_um = t[1];
            scan.n_samples = detail::cfg_int(sec, "n_samples", 500);
            if (scan.n_samples < 2)
                throw detail::cfg_error(sec, "n_samples", "needs at least 2");
            cfg.scan = scan;
            for (const std::string& v : sec.all("segment")) {
                // label,s_start,s_end
                std::size_t c1 = v.find(',');
                if (c1 == std::string::npos)
                    throw detail::cfg_error(sec, "segment",
                                            "expected 'label,s_start_um,s_end_um'");
                Segment seg;
                seg.label = detail::trim(std::string_view(v).substr(0, c1));
                auto nums = detail::cfg_tuple(sec, "segment", v.substr(c1 + 1), 2);
                seg.s_start_um = nums[0];
                seg.s_end_um = nums[1];
                if (seg.label.empty() || seg.s_end_um < seg.s_start_um)
                    throw detail::cfg_error(sec, "segment", "bad segment '" + v + "'");
                cfg.segments.push_back(seg);
            }
            for (const std::string& v : sec.all("exclude")) {
                // s_start,s_end[,reason]
                std::size_t c1 = v.find(',');
                std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                                         : v.find(',', c1 + 1);
                if (c1 == std::string::npos)
                    throw detail::cfg_error(sec, "exclude",
                                            "expected 's_start_um,s_end_um[,reason]'");
                std::string numpart =
                    c2 == std::string::npos ? v : v.substr(0, c2);
                auto nums = detail::cfg_tuple(sec, "exclude", numpart, 2);
                Exclusion ex;
                ex.s_start_um = nums[0];
                ex.s_end_um = nums[1];
                if (c2 != std::string::npos)
                    ex.reason = detail::trim(std::string_view(v).substr(c2 + 1));
                if (ex.s_end_um < ex.s_start_um)
                    throw detail::cfg_error(sec, "exclude", "bad range '" + v + "'");
                cfg.exclusions.push_back(ex);
            }
        } else if (sec.name == "output") {
            once(4, sec);
            detail::cfg_check_keys(sec, {"dir", "emit_inverted", "float_tiff"});
            // resolved once, below, together with the "out" default
            if (const std::string* d = sec.find("dir")) cfg.out_dir = *d;
            cfg.emit_inverted = detail::cfg_bool(sec, "emit_inverted", false);
            cfg.float_tiff = detail::cfg_bool(sec, "float_tiff", false);
        } else {
            throw ValidationError("[" + sec.name + "]: unknown section (line " +
                                  std::to_string(sec.line_no) + ")");
        }
    }
    if (cfg.out_dir.is_relative()) cfg.out_dir = base_dir / cfg.out_dir;
    return cfg;
}

} // namespace graylith
