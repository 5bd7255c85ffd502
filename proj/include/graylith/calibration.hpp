// calibration.hpp - contrast-curve ingestion, monotone fitting, and the
// inverted/normalized depth -> gray lookup table.
//
// The fit is monotone piecewise-cubic Hermite interpolation with Steffen's
// slope limiter (parabolic slopes clipped to twice the smaller neighbouring
// secant). That keeps D(g) non-decreasing for non-decreasing knot values and
// reproduces quadratics exactly on uniform grids. Non-monotone data is
// projected first with pool-adjacent-violators; "isotonic+smoothing"
// additionally runs one [1,2,1]/4 pass over the projected values.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "graylith/errors.hpp"

namespace graylith {

struct CalibrationPoint {
    int gray = 0;
    double depth_um = 0.0;
};

struct ContrastCurve {
    std::vector<CalibrationPoint> points; // sorted by gray, strictly increasing
    std::string metadata;                 // free text: power, time, resist, ...
};

// CSV with header "gray,depth_um". '#' lines are collected as metadata,
// duplicate gray rows are averaged.
inline ContrastCurve load_calibration(std::string_view csv) {
    ContrastCurve curve;
    std::size_t pos = 0, line_no = 0;
    bool header_seen = false;
    std::vector<CalibrationPoint> raw;

    while (pos <= csv.size()) {
        std::size_t nl = csv.find('\n', pos);
        std::string_view line = csv.substr(pos, nl == std::string_view::npos
                                                    ? csv.size() - pos
                                                    : nl - pos);
        pos = nl == std::string_view::npos ? csv.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        std::string trimmed(line);
        trimmed.erase(0, trimmed.find_first_not_of(" \t"));
        if (!trimmed.empty() && trimmed.find_last_not_of(" \t") != std::string::npos)
            trimmed.erase(trimmed.find_last_not_of(" \t") + 1);
        if (trimmed.empty()) continue;
        if (trimmed[0] == '#') {
            if (!curve.metadata.empty()) curve.metadata += '\n';
            curve.metadata += trimmed.substr(trimmed.find_first_not_of("# \t"));
            continue;
        }
        if (!header_seen) {
            std::string squashed;
            for (char c : trimmed)
                if (c != ' ' && c != '\t') squashed += c;
            if (squashed != "gray,depth_um")
                throw SyntaxError("line " + std::to_string(line_no) +
                                  ": expected header 'gray,depth_um'");
            header_seen = true;
            continue;
        }

        std::size_t comma = trimmed.find(',');
        if (comma == std::string::npos)
            throw SyntaxError("line " + std::to_string(line_no) +
                              ": expected 'gray,depth_um' row");
        std::string gs = trimmed.substr(0, comma);
        std::string ds = trimmed.substr(comma + 1);
        char* end = nullptr;
        long g = std::strtol(gs.c_str(), &end, 10);
        if (end != gs.c_str() + gs.size() || gs.empty())
            throw SyntaxError("line " + std::to_string(line_no) +
                              ": gray must be an integer, got '" + gs + "'");
        double d = std::strtod(ds.c_str(), &end);
        if (end != ds.c_str() + ds.size() || ds.empty() || !std::isfinite(d))
            throw SyntaxError("line " + std::to_string(line_no) +
                              ": bad depth '" + ds + "'");
        if (g < 0 || g > 255)
            throw GrayOutOfRange("line " + std::to_string(line_no) + ": gray " +
                                 std::to_string(g) + " outside 0..255");
        if (d < 0.0)
            throw NegativeDepth("line " + std::to_string(line_no) + ": depth " +
                                ds + " um is negative");
        raw.push_back({static_cast<int>(g), d});
    }

    std::stable_sort(raw.begin(), raw.end(),
                     [](const CalibrationPoint& a, const CalibrationPoint& b) {
                         return a.gray < b.gray;
                     });
    for (std::size_t i = 0; i < raw.size();) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < raw.size() && raw[j].gray == raw[i].gray) sum += raw[j++].depth_um;
        curve.points.push_back({raw[i].gray, sum / static_cast<double>(j - i)});
        i = j;
    }
    if (curve.points.size() < 2)
        throw TooFewPoints("calibration needs at least 2 distinct gray levels, got " +
                           std::to_string(curve.points.size()));
    return curve;
}

// Pool-adjacent-violators: least-squares non-decreasing projection.
inline std::vector<double> isotonic_regression(std::span<const double> y) {
    struct Block {
        double sum;
        std::size_t n;
    };
    std::vector<Block> blocks;
    blocks.reserve(y.size());
    for (double v : y) {
        blocks.push_back({v, 1});
        while (blocks.size() > 1) {
            Block& b = blocks[blocks.size() - 1];
            Block& a = blocks[blocks.size() - 2];
            if (a.sum * static_cast<double>(b.n) <= b.sum * static_cast<double>(a.n))
                break; // means already ordered
            a.sum += b.sum;
            a.n += b.n;
            blocks.pop_back();
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (const Block& b : blocks)
        out.insert(out.end(), b.n, b.sum / static_cast<double>(b.n));
    return out;
}

enum class FitMethod { monotone_pchip, isotonic_smoothing };

inline const char* to_string(FitMethod m) {
    return m == FitMethod::monotone_pchip ? "monotone-pchip" : "isotonic+smoothing";
}

inline FitMethod fit_method_from_string(const std::string& s) {
    if (s == "monotone-pchip") return FitMethod::monotone_pchip;
    if (s == "isotonic+smoothing") return FitMethod::isotonic_smoothing;
    throw ValidationError("unknown fit method '" + s + "'");
}

// Monotone non-decreasing D(g): gray -> depth (um) over [gray_min, gray_max].
class FittedCurve {
public:
    FittedCurve() = default;
    FittedCurve(std::vector<double> gray, std::vector<double> depth,
                std::vector<double> slope, std::string method)
        : gray_(std::move(gray)), depth_(std::move(depth)),
          slope_(std::move(slope)), method_(std::move(method)) {
        if (gray_.size() < 2 || gray_.size() != depth_.size() ||
            gray_.size() != slope_.size())
            throw ValidationError("fitted curve needs matching knot arrays (>= 2)");
    }

    double gray_min() const { return gray_.front(); }
    double gray_max() const { return gray_.back(); }
    const std::string& method() const { return method_; }
    const std::vector<double>& knot_gray() const { return gray_; }
    const std::vector<double>& knot_depth() const { return depth_; }
    const std::vector<double>& knot_slope() const { return slope_; }

    // Evaluate D(g); outside the domain the endpoint value extends flat.
    double operator()(double g) const {
        if (g <= gray_.front()) return depth_.front();
        if (g >= gray_.back()) return depth_.back();
        std::size_t hi = static_cast<std::size_t>(
            std::upper_bound(gray_.begin(), gray_.end(), g) - gray_.begin());
        std::size_t lo = hi - 1;
        double hstep = gray_[hi] - gray_[lo];
        double t = (g - gray_[lo]) / hstep;
        double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
        double h10 = t * (1 - t) * (1 - t);
        double h01 = t * t * (3 - 2 * t);
        double h11 = t * t * (t - 1);
        return h00 * depth_[lo] + h10 * hstep * slope_[lo] +
               h01 * depth_[hi] + h11 * hstep * slope_[hi];
    }

private:
    std::vector<double> gray_, depth_, slope_;
    std::string method_;
};

namespace detail {

// Steffen (1990): parabolic knot slopes, clipped so each interval's cubic
// stays within its endpoints. Exact for data lying on a parabola whenever no
// clip fires.
inline std::vector<double> steffen_slopes(const std::vector<double>& x,
                                          const std::vector<double>& y) {
    std::size_t n = x.size();
    std::vector<double> h(n - 1), d(n - 1), m(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        d[i] = (y[i + 1] - y[i]) / h[i];
    }
    if (n == 2) {
        m[0] = m[1] = d[0];
        return m;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double p = (d[i - 1] * h[i] + d[i] * h[i - 1]) / (h[i - 1] + h[i]);
        if (d[i - 1] * d[i] <= 0.0)
            m[i] = 0.0;
        else if (std::abs(p) > 2.0 * std::min(std::abs(d[i - 1]), std::abs(d[i])))
            m[i] = 2.0 * (d[i] > 0 ? 1.0 : -1.0) *
                   std::min(std::abs(d[i - 1]), std::abs(d[i]));
        else
            m[i] = p;
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double p = d0 * (1.0 + h0 / (h0 + h1)) - d1 * (h0 / (h0 + h1));
        if (p * d0 <= 0.0) return 0.0;
        if (std::abs(p) > 2.0 * std::abs(d0)) return 2.0 * d0;
        return p;
    };
    m[0] = end_slope(h[0], h[1], d[0], d[1]);
    m[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    return m;
}

inline bool non_decreasing(std::span<const double> v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] < v[i - 1]) return false;
    return true;
}

} // namespace detail

inline FittedCurve fit_contrast(const ContrastCurve& curve,
                                FitMethod method = FitMethod::monotone_pchip) {
    if (curve.points.size() < 2)
        throw TooFewPoints("fit needs at least 2 calibration points");
    std::vector<double> gray, depth;
    gray.reserve(curve.points.size());
    depth.reserve(curve.points.size());
    for (const CalibrationPoint& p : curve.points) {
        if (!gray.empty() && p.gray <= gray.back())
            throw ValidationError("calibration grays must be strictly increasing");
        gray.push_back(static_cast<double>(p.gray));
        depth.push_back(p.depth_um);
    }

    std::vector<double> vals;
    if (method == FitMethod::isotonic_smoothing) {
        vals = isotonic_regression(depth);
        if (vals.size() > 2) {
            std::vector<double> sm(vals);
            for (std::size_t i = 1; i + 1 < vals.size(); ++i)
                sm[i] = 0.25 * vals[i - 1] + 0.5 * vals[i] + 0.25 * vals[i + 1];
            vals = isotonic_regression(sm); // smoothing preserves order, but be safe
        }
    } else {
        vals = detail::non_decreasing(depth) ? depth : isotonic_regression(depth);
    }
    std::vector<double> slopes = detail::steffen_slopes(gray, vals);
    return FittedCurve(std::move(gray), std::move(vals), std::move(slopes),
                       to_string(method));
}

// Forward evaluation used by the developer simulation. Real-valued gray is
// accepted; values outside the fitted domain clamp with a warning.
inline double gray_to_depth(const FittedCurve& fit, double gray,
                            WarningLog* warnings = nullptr) {
    if (gray < fit.gray_min() || gray > fit.gray_max()) {
        warn(warnings, "ClampWarning",
             "gray " + std::to_string(gray) + " outside fitted domain [" +
                 std::to_string(fit.gray_min()) + ", " +
                 std::to_string(fit.gray_max()) + "], clamped");
        gray = std::clamp(gray, fit.gray_min(), fit.gray_max());
    }
    return fit(gray);
}

// Inverted, normalized calibration: entry k encodes the gray level whose
// fitted depth equals (k / (N-1)) * max_depth.
struct DepthToGrayLUT {
    double max_depth_um = 0.0;
    int gray_min = 0;
    int gray_max = 255;
    std::vector<std::uint8_t> table; // N entries, normalized depth 0..1
    std::string method;

    int entries() const { return static_cast<int>(table.size()); }

    // t = depth / max_depth in [0,1]; nearest-entry lookup.
    std::uint8_t at_norm(double t) const {
        long k = std::llround(t * static_cast<double>(table.size() - 1));
        k = std::clamp(k, 0L, static_cast<long>(table.size()) - 1);
        return table[static_cast<std::size_t>(k)];
    }

    std::string id() const {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s|%d entries|max_depth %.9g um",
                      method.c_str(), entries(), max_depth_um);
        return buf;
    }
};

inline DepthToGrayLUT build_lut(const FittedCurve& fit, double max_depth_um,
                                int entries = 256) {
    if (!(max_depth_um > 0.0) || !std::isfinite(max_depth_um))
        throw ValidationError("max depth must be positive");
    if (entries < 2) throw ValidationError("LUT needs at least 2 entries");
    if (max_depth_um > fit(fit.gray_max()))
        throw DepthNotReachable("max depth " + std::to_string(max_depth_um) +
                                " um exceeds fitted depth " +
                                std::to_string(fit(fit.gray_max())) +
                                " um at gray " + std::to_string(fit.gray_max()));

    DepthToGrayLUT lut;
    lut.max_depth_um = max_depth_um;
    lut.gray_min = static_cast<int>(std::lround(fit.gray_min()));
    lut.gray_max = static_cast<int>(std::lround(fit.gray_max()));
    lut.method = fit.method();
    lut.table.resize(static_cast<std::size_t>(entries));

    for (int k = 0; k < entries; ++k) {
        double target = max_depth_um * (static_cast<double>(k) / (entries - 1));
        double lo = fit.gray_min(), hi = fit.gray_max();
        double g;
        if (fit(lo) >= target) {
            g = lo;
        } else {
            // invariant: D(lo) < target <= D(hi)
            while (hi - lo > 1e-6) {
                double mid = 0.5 * (lo + hi);
                if (fit(mid) < target)
                    lo = mid;
                else
                    hi = mid;
            }
            g = 0.5 * (lo + hi);
        }
        long rounded = std::llround(g); // round half away from zero
        rounded = std::clamp(rounded, 0L, 255L);
        lut.table[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(rounded);
        // Bisection tolerance could let rounding wobble one level backwards
        // right at a half-integer; keep the table non-decreasing regardless.
        if (k > 0 && lut.table[k] < lut.table[k - 1]) lut.table[k] = lut.table[k - 1];
    }
    return lut;
}

// --- JSON round-trip -------------------------------------------------------
// Schema: { format, version, max_depth_um, method, gray_domain: [lo, hi],
//           lut: [...], fit: { gray: [...], depth_um: [...], slope: [...] } }

inline std::string lut_to_json(const DepthToGrayLUT& lut, const FittedCurve& fit) {
    nlohmann::ordered_json j;
    j["format"] = "graylith-lut";
    j["version"] = 1;
    j["max_depth_um"] = lut.max_depth_um;
    j["method"] = lut.method;
    j["gray_domain"] = {lut.gray_min, lut.gray_max};
    j["lut"] = lut.table;
    j["fit"] = {{"gray", fit.knot_gray()},
                {"depth_um", fit.knot_depth()},
                {"slope", fit.knot_slope()}};
    return j.dump(2) + "\n";
}

struct CalibrationData {
    FittedCurve fit;
    DepthToGrayLUT lut;
};

inline CalibrationData calibration_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SyntaxError(std::string("LUT JSON: ") + e.what());
    }
    try {
        if (j.value("format", "") != "graylith-lut")
            throw ValidationError("LUT JSON: missing format tag 'graylith-lut'");
        CalibrationData data;
        const auto& f = j.at("fit");
        data.fit = FittedCurve(f.at("gray").get<std::vector<double>>(),
                               f.at("depth_um").get<std::vector<double>>(),
                               f.at("slope").get<std::vector<double>>(),
                               j.at("method").get<std::string>());
        data.lut.max_depth_um = j.at("max_depth_um").get<double>();
        data.lut.method = j.at("method").get<std::string>();
        data.lut.gray_min = j.at("gray_domain").at(0).get<int>();
        data.lut.gray_max = j.at("gray_domain").at(1).get<int>();
        data.lut.table = j.at("lut").get<std::vector<std::uint8_t>>();
        if (data.lut.table.size() < 2)
            throw ValidationError("LUT JSON: table needs at least 2 entries");
        if (!(data.lut.max_depth_um > 0.0))
            throw ValidationError("LUT JSON: max_depth_um must be positive");
        return data;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("LUT JSON: ") + e.what());
    }
}

} // namespace graylith
