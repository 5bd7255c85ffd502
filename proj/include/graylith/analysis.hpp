// analysis.hpp - the digital profilometer: scanline extraction, residuals,
// overall/segment RMS, and report emission (CSV + summary + SVG plot).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graylith/errors.hpp"
#include "graylith/field.hpp"

namespace graylith {

enum class ProfileSource { design, simulated, measured };

inline const char* to_string(ProfileSource s) {
    switch (s) {
        case ProfileSource::design: return "design";
        case ProfileSource::simulated: return "simulated";
        case ProfileSource::measured: return "measured";
    }
    return "?";
}

struct Profile {
    std::vector<double> s_um;     // arc length from scan start, strictly increasing
    std::vector<double> depth_um; // removal depth at s
    ProfileSource source = ProfileSource::design;

    std::size_t size() const { return s_um.size(); }
};

namespace detail {

// Bilinear sample at (x, y) um. Pixel centers carry the samples; the outer
// half-pixel ring extrapolates the boundary cell linearly so the full field
// extent [0,w]x[0,h] is addressable.
inline double sample_bilinear(const HeightField& f, double x, double y) {
    const double gx = x / f.area.pitch_x() - 0.5;
    const double gy = y / f.area.pitch_y() - 0.5;
    int j0 = static_cast<int>(std::floor(gx));
    int i0 = static_cast<int>(std::floor(gy));
    j0 = std::clamp(j0, 0, std::max(0, f.area.px_w - 2));
    i0 = std::clamp(i0, 0, std::max(0, f.area.px_h - 2));
    int j1 = std::min(j0 + 1, f.area.px_w - 1);
    int i1 = std::min(i0 + 1, f.area.px_h - 1);
    double fx = f.area.px_w == 1 ? 0.0 : gx - j0;
    double fy = f.area.px_h == 1 ? 0.0 : gy - i0;
    double top = (1.0 - fx) * f.at(i0, j0) + fx * f.at(i0, j1);
    double bot = (1.0 - fx) * f.at(i1, j0) + fx * f.at(i1, j1);
    return (1.0 - fy) * top + fy * bot;
}

inline constexpr double kEdgeEps = 1e-9; // forgives decimal dust at the rim

} // namespace detail

inline Profile extract_profile(const HeightField& field, double x0_um, double y0_um,
                               double x1_um, double y1_um, int n_samples,
                               ProfileSource source = ProfileSource::design) {
    field.area.validate();
    if (n_samples < 2) throw ValidationError("profile needs n_samples >= 2");
    for (auto [x, y] : {std::pair{x0_um, y0_um}, std::pair{x1_um, y1_um}})
        if (x < -detail::kEdgeEps || x > field.area.width_um + detail::kEdgeEps ||
            y < -detail::kEdgeEps || y > field.area.height_um + detail::kEdgeEps)
            throw OutOfBounds("scan endpoint (" + std::to_string(x) + ", " +
                              std::to_string(y) + ") um outside field extent " +
                              std::to_string(field.area.width_um) + " x " +
                              std::to_string(field.area.height_um) + " um");

    const double length = std::hypot(x1_um - x0_um, y1_um - y0_um);
    Profile p;
    p.source = source;
    p.s_um.resize(static_cast<std::size_t>(n_samples));
    p.depth_um.resize(static_cast<std::size_t>(n_samples));
    for (int k = 0; k < n_samples; ++k) {
        double t = static_cast<double>(k) / (n_samples - 1);
        p.s_um[static_cast<std::size_t>(k)] = t * length;
        p.depth_um[static_cast<std::size_t>(k)] = detail::sample_bilinear(
            field, x0_um + t * (x1_um - x0_um), y0_um + t * (y1_um - y0_um));
    }
    return p;
}

// r(s) = expected(s) - observed(s) on expected's s grid. An observed profile
// on a different grid is linearly resampled; it must cover expected's range.
inline std::vector<double> residuals(const Profile& observed,
                                     const Profile& expected) {
    if (expected.size() < 1) throw EmptyRange("expected profile has no samples");
    if (observed.size() < 1) throw EmptyRange("observed profile has no samples");

    std::vector<double> out(expected.size());
    if (observed.s_um == expected.s_um) { // common path: same scanline
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] = expected.depth_um[k] - observed.depth_um[k];
        return out;
    }
    if (observed.size() < 2)
        throw GridMismatch("observed profile too short to resample");
    for (std::size_t k = 0; k < expected.size(); ++k) {
        double s = expected.s_um[k];
        if (s < observed.s_um.front() - detail::kEdgeEps ||
            s > observed.s_um.back() + detail::kEdgeEps)
            throw GridMismatch("observed range [" +
                               std::to_string(observed.s_um.front()) + ", " +
                               std::to_string(observed.s_um.back()) +
                               "] um does not cover expected s = " +
                               std::to_string(s) + " um");
        auto it = std::lower_bound(observed.s_um.begin(), observed.s_um.end(), s);
        std::size_t hi = static_cast<std::size_t>(it - observed.s_um.begin());
        if (hi == 0) hi = 1;
        if (hi >= observed.size()) hi = observed.size() - 1;
        std::size_t lo = hi - 1;
        double t = (s - observed.s_um[lo]) / (observed.s_um[hi] - observed.s_um[lo]);
        double obs = (1.0 - t) * observed.depth_um[lo] + t * observed.depth_um[hi];
        out[k] = expected.depth_um[k] - obs;
    }
    return out;
}

// Max-scaled two-pass RMS: exact for constant series (rms(c,...,c) == |c|).
inline double rms(std::span<const double> values) {
    if (values.empty()) throw EmptyRange("RMS over zero samples");
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    if (m == 0.0) return 0.0;
    double acc = 0.0;
    for (double v : values) {
        double q = v / m;
        acc += q * q;
    }
    return m * std::sqrt(acc / static_cast<double>(values.size()));
}

// RMS over samples whose s lies in [s_start, s_end], inclusive.
inline double rms(std::span<const double> s, std::span<const double> values,
                  double s_start, double s_end) {
    if (s.size() != values.size())
        throw ValidationError("RMS needs matching s/value arrays");
    std::vector<double> sel;
    for (std::size_t k = 0; k < s.size(); ++k)
        if (s[k] >= s_start && s[k] <= s_end) sel.push_back(values[k]);
    if (sel.empty())
        throw EmptyRange("no samples in [" + std::to_string(s_start) + ", " +
                         std::to_string(s_end) + "] um");
    return rms(sel);
}

struct ScanLine {
    double x0_um = 0.0, y0_um = 0.0;
    double x1_um = 0.0, y1_um = 0.0;
    int n_samples = 500;
};

struct Segment {
    std::string label;
    double s_start_um = 0.0;
    double s_end_um = 0.0;
};

struct Exclusion {
    double s_start_um = 0.0;
    double s_end_um = 0.0;
    std::string reason;
};

struct SegmentRms {
    std::string label;
    double s_start_um = 0.0;
    double s_end_um = 0.0;
    double rms_um = 0.0;
    std::size_t samples = 0;
};

struct ComparisonReport {
    std::vector<double> s_um, expected_um, observed_um, residual_um;
    std::vector<bool> excluded; // per sample, from the exclusion ranges
    double overall_rms_um = 0.0;
    std::size_t overall_samples = 0;
    std::vector<SegmentRms> segments;
    std::vector<Exclusion> exclusions;
};

inline ComparisonReport compare(const HeightField& design,
                                const HeightField& observed, const ScanLine& scan,
                                const std::vector<Segment>& segments = {},
                                const std::vector<Exclusion>& exclusions = {}) {
    Profile exp_p = extract_profile(design, scan.x0_um, scan.y0_um, scan.x1_um,
                                    scan.y1_um, scan.n_samples,
                                    ProfileSource::design);
    Profile obs_p = extract_profile(observed, scan.x0_um, scan.y0_um, scan.x1_um,
                                    scan.y1_um, scan.n_samples,
                                    ProfileSource::simulated);

    ComparisonReport rep;
    rep.s_um = exp_p.s_um;
    rep.expected_um = exp_p.depth_um;
    rep.observed_um = obs_p.depth_um;
    rep.residual_um = residuals(obs_p, exp_p);
    rep.exclusions = exclusions;

    rep.excluded.assign(rep.s_um.size(), false);
    for (std::size_t k = 0; k < rep.s_um.size(); ++k)
        for (const Exclusion& ex : exclusions)
            if (rep.s_um[k] >= ex.s_start_um && rep.s_um[k] <= ex.s_end_um)
                rep.excluded[k] = true;

    std::vector<double> kept_s, kept_r;
    for (std::size_t k = 0; k < rep.s_um.size(); ++k)
        if (!rep.excluded[k]) {
            kept_s.push_back(rep.s_um[k]);
            kept_r.push_back(rep.residual_um[k]);
        }
    if (kept_r.empty())
        throw EmptyRange("all scan samples fall inside exclusion ranges");
    rep.overall_rms_um = rms(kept_r);
    rep.overall_samples = kept_r.size();

    for (const Segment& seg : segments) {
        std::vector<double> seg_r;
        for (std::size_t k = 0; k < kept_s.size(); ++k)
            if (kept_s[k] >= seg.s_start_um && kept_s[k] <= seg.s_end_um)
                seg_r.push_back(kept_r[k]);
        if (seg_r.empty())
            throw EmptyRange("segment '" + seg.label + "' [" +
                             std::to_string(seg.s_start_um) + ", " +
                             std::to_string(seg.s_end_um) + "] um has no samples");
        rep.segments.push_back(
            {seg.label, seg.s_start_um, seg.s_end_um, rms(seg_r), seg_r.size()});
    }
    return rep;
}

namespace detail {

inline std::string fmt(const char* spec, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline void write_file_or_throw(const std::filesystem::path& path,
                                std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("short write to " + path.string());
}

// Fixed-size SVG line chart of expected/observed/residual vs s.
inline std::string render_svg(const ComparisonReport& rep) {
    constexpr double W = 800, H = 500;
    constexpr double ml = 70, mr = 20, mt = 20, mb = 55;
    const double pw = W - ml - mr, ph = H - mt - mb;

    double s_lo = rep.s_um.front(), s_hi = rep.s_um.back();
    double v_lo = 0.0, v_hi = 0.0;
    for (const auto* series : {&rep.expected_um, &rep.observed_um, &rep.residual_um})
        for (double v : *series) {
            v_lo = std::min(v_lo, v);
            v_hi = std::max(v_hi, v);
        }
    if (v_hi == v_lo) v_hi = v_lo + 1.0;
    if (s_hi == s_lo) s_hi = s_lo + 1.0;

    auto px = [&](double s) { return ml + (s - s_lo) / (s_hi - s_lo) * pw; };
    auto py = [&](double v) { return mt + (v_hi - v) / (v_hi - v_lo) * ph; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
           "viewBox=\"0 0 800 500\">\n";
    svg += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";

    // axes + ticks
    svg += "<g stroke=\"#333\" stroke-width=\"1\" fill=\"none\">\n";
    svg += "<path d=\"M" + fmt("%.2f", ml) + " " + fmt("%.2f", mt) + " V" +
           fmt("%.2f", mt + ph) + " H" + fmt("%.2f", ml + pw) + "\"/>\n";
    svg += "</g>\n<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333\">\n";
    for (int t = 0; t <= 5; ++t) {
        double s = s_lo + (s_hi - s_lo) * t / 5.0;
        double v = v_lo + (v_hi - v_lo) * t / 5.0;
        svg += "<text x=\"" + fmt("%.2f", px(s)) + "\" y=\"" + fmt("%.2f", mt + ph + 18) +
               "\" text-anchor=\"middle\">" + fmt("%.6g", s) + "</text>\n";
        svg += "<text x=\"" + fmt("%.2f", ml - 8) + "\" y=\"" + fmt("%.2f", py(v) + 4) +
               "\" text-anchor=\"end\">" + fmt("%.6g", v) + "</text>\n";
    }
    svg += "<text x=\"" + fmt("%.2f", ml + pw / 2) + "\" y=\"" +
           fmt("%.2f", H - 10) + "\" text-anchor=\"middle\">s (\xC2\xB5m)</text>\n";
    svg += "<text x=\"14\" y=\"" + fmt("%.2f", mt + ph / 2) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
           fmt("%.2f", mt + ph / 2) + ")\">depth (\xC2\xB5m)</text>\n";
    // legend
    const char* names[3] = {"expected", "observed", "residual"};
    const char* colors[3] = {"#1f77b4", "#ff7f0e", "#2ca02c"};
    for (int c = 0; c < 3; ++c) {
        double y = mt + 16 + 18 * c;
        svg += "<rect x=\"" + fmt("%.2f", ml + pw - 110) + "\" y=\"" + fmt("%.2f", y - 9) +
               "\" width=\"24\" height=\"4\" fill=\"" + colors[c] + "\"/>\n";
        svg += "<text x=\"" + fmt("%.2f", ml + pw - 80) + "\" y=\"" + fmt("%.2f", y) +
               "\">" + names[c] + "</text>\n";
    }
    svg += "</g>\n";

    const std::vector<double>* series[3] = {&rep.expected_um, &rep.observed_um,
                                            &rep.residual_um};
    for (int c = 0; c < 3; ++c) {
        svg += "<polyline fill=\"none\" stroke=\"";
        svg += colors[c];
        svg += "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < rep.s_um.size(); ++k) {
            if (k) svg += ' ';
            svg += fmt("%.2f", px(rep.s_um[k])) + "," + fmt("%.2f", py((*series[c])[k]));
        }
        svg += "\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace detail

// Writes residuals.csv, summary.txt and plot.svg into `dir` (created if
// needed). Deterministic: the same report yields identical bytes.
inline void emit_report(const ComparisonReport& rep,
                        const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create report directory " + dir.string() +
                          ": " + ec.message());

    std::string csv = "s_um,expected_um,observed_um,residual_um\n";
    for (std::size_t k = 0; k < rep.s_um.size(); ++k) {
        csv += detail::fmt("%.12g", rep.s_um[k]) + "," +
               detail::fmt("%.12g", rep.expected_um[k]) + "," +
               detail::fmt("%.12g", rep.observed_um[k]) + "," +
               detail::fmt("%.12g", rep.residual_um[k]) + "\n";
    }
    detail::write_file_or_throw(dir / "residuals.csv", csv);

    std::string txt = "overall rms_um = " + detail::fmt("%.9g", rep.overall_rms_um) +
                      " (" + std::to_string(rep.overall_samples) + " samples)\n";
    for (const SegmentRms& s : rep.segments)
        txt += "segment " + s.label + ": rms_um = " + detail::fmt("%.9g", s.rms_um) +
               " over [" + detail::fmt("%.9g", s.s_start_um) + ", " +
               detail::fmt("%.9g", s.s_end_um) + "] um (" +
               std::to_string(s.samples) + " samples)\n";
    for (const Exclusion& e : rep.exclusions)
        txt += "excluded [" + detail::fmt("%.9g", e.s_start_um) + ", " +
               detail::fmt("%.9g", e.s_end_um) + "] um: " +
               (e.reason.empty() ? "(no reason given)" : e.reason) + "\n";
    detail::write_file_or_throw(dir / "summary.txt", txt);

    detail::write_file_or_throw(dir / "plot.svg", detail::render_svg(rep));
}

// Dektak profilometer export: two-column CSV "position_um,height_um" with an
// optional header line. depth = sign * height + offset, so downward-carved
// surfaces (negative heights) become positive removal depths.
inline Profile load_dektak_csv(std::string_view text, double sign = 1.0,
                               double offset_um = 0.0) {
    Profile p;
    p.source = ProfileSource::measured;
    std::size_t pos = 0, line_no = 0;
    bool first_data_candidate = true;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string line(text.substr(pos, nl == std::string_view::npos
                                              ? text.size() - pos
                                              : nl - pos));
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string t = line;
        t.erase(0, t.find_first_not_of(" \t"));
        if (t.empty() || t[0] == '#') continue;

        double s, v;
        char extra;
        int got = std::sscanf(t.c_str(), "%lf , %lf %c", &s, &v, &extra);
        if (got < 2) {
            if (first_data_candidate) { // header line, e.g. "position_um,height_um"
                first_data_candidate = false;
                continue;
            }
            throw SyntaxError("line " + std::to_string(line_no) +
                              ": expected 'position_um,height_um'");
        }
        if (got > 2)
            throw SyntaxError("line " + std::to_string(line_no) +
                              ": trailing characters after two columns");
        first_data_candidate = false;
        p.s_um.push_back(s);
        p.depth_um.push_back(sign * v + offset_um);
    }
    if (p.s_um.empty()) throw TooFewPoints("Dektak CSV contains no samples");

    // scans run monotonically; sort defensively, reject duplicate positions
    std::vector<std::size_t> order(p.s_um.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return p.s_um[a] < p.s_um[b];
    });
    Profile sorted;
    sorted.source = p.source;
    for (std::size_t k : order) {
        if (!sorted.s_um.empty() && p.s_um[k] == sorted.s_um.back())
            throw SyntaxError("duplicate scan position " +
                              std::to_string(p.s_um[k]) + " um");
        sorted.s_um.push_back(p.s_um[k]);
        sorted.depth_um.push_back(p.depth_um[k]);
    }
    return sorted;
}

} // namespace graylith
