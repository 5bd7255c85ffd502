// devsim.hpp - forward development simulation: gray -> dose -> (optional
// lateral-diffusion blur) -> removal depth through the fitted contrast curve.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "graylith/calibration.hpp"
#include "graylith/errors.hpp"
#include "graylith/field.hpp"
#include "graylith/mask.hpp"

namespace graylith {

// Normalized exposure dose, proportional to gray (linear mirror-duty model).
struct DoseField {
    WorkingArea area;
    std::vector<double> dose;

    explicit DoseField(const WorkingArea& a = {}, double fill = 0.0)
        : area(a), dose(a.pixel_count(), fill) {}

    double& at(int i, int j) { return dose[static_cast<std::size_t>(i) * area.px_w + j]; }
    double at(int i, int j) const { return dose[static_cast<std::size_t>(i) * area.px_w + j]; }
};

struct BlurSpec {
    double sigma_um = 0.0;          // 0 disables the blur entirely
    double truncation_radius = 4.0; // kernel reaches truncation_radius * sigma
    // boundary handling is always clamp-to-edge
};

inline DoseField mask_to_dose(const GrayMask& mask) {
    if (!mask.pitch_x_um || !mask.pitch_y_um)
        throw ValidationError("mask pitch unknown; cannot size the dose field "
                              "(pass a working area or a TIFF with resolution tags)");
    WorkingArea area{*mask.pitch_x_um * mask.px_w, *mask.pitch_y_um * mask.px_h,
                     mask.px_w, mask.px_h};
    DoseField out(area);
    for (std::size_t k = 0; k < mask.pixels.size(); ++k)
        out.dose[k] = static_cast<double>(mask.pixels[k]) / 255.0;
    return out;
}

// One-sided Gaussian taps at pixel pitch: w_k = exp(-(k*pitch)^2 / (2 sigma^2))
// for |k| <= truncation_radius*sigma/pitch, normalized to sum exactly 1.
inline std::vector<double> gaussian_kernel(double sigma_um, double pitch_um,
                                           double truncation_radius = 4.0) {
    if (sigma_um < 0.0 || !std::isfinite(sigma_um))
        throw ValidationError("blur sigma must be >= 0");
    if (!(pitch_um > 0.0)) throw ValidationError("pitch must be positive");
    if (!(truncation_radius > 0.0))
        throw ValidationError("truncation radius must be positive");
    if (sigma_um == 0.0) return {1.0};

    // tiny epsilon so radius = exact integer multiples of pitch keeps its tap
    int k_max = static_cast<int>(
        std::floor(truncation_radius * sigma_um / pitch_um + 1e-12));
    std::vector<double> w(static_cast<std::size_t>(2 * k_max + 1));
    double sum = 0.0;
    for (int k = -k_max; k <= k_max; ++k) {
        double d = static_cast<double>(k) * pitch_um;
        double v = std::exp(-(d * d) / (2.0 * sigma_um * sigma_um));
        w[static_cast<std::size_t>(k + k_max)] = v;
        sum += v;
    }
    for (double& v : w) v /= sum;
    return w;
}

inline DoseField blur_dose(const DoseField& in, const BlurSpec& blur) {
    if (blur.sigma_um == 0.0) return in; // bit-exact identity
    in.area.validate();

    const int w = in.area.px_w, h = in.area.px_h;
    auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : v > hi ? hi : v; };

    std::vector<double> kx =
        gaussian_kernel(blur.sigma_um, in.area.pitch_x(), blur.truncation_radius);
    std::vector<double> ky =
        gaussian_kernel(blur.sigma_um, in.area.pitch_y(), blur.truncation_radius);
    const int rx = static_cast<int>(kx.size() / 2);
    const int ry = static_cast<int>(ky.size() / 2);

    DoseField mid(in.area), out(in.area);
    for (int i = 0; i < h; ++i) // rows first: horizontal pass
        for (int j = 0; j < w; ++j) {
            double acc = 0.0;
            for (int k = -rx; k <= rx; ++k)
                acc += kx[static_cast<std::size_t>(k + rx)] *
                       in.at(i, clampi(j + k, 0, w - 1));
            mid.at(i, j) = acc;
        }
    for (int i = 0; i < h; ++i) // vertical pass
        for (int j = 0; j < w; ++j) {
            double acc = 0.0;
            for (int k = -ry; k <= ry; ++k)
                acc += ky[static_cast<std::size_t>(k + ry)] *
                       mid.at(clampi(i + k, 0, h - 1), j);
            out.at(i, j) = acc;
        }
    return out;
}

// removal = D(dose * 255), evaluated on the continuous fit (no second
// quantization). Dose beyond 1 clamps; one warning carries the pixel count.
inline HeightField develop(const DoseField& dose, const FittedCurve& fit,
                           WarningLog* warnings = nullptr) {
    dose.area.validate();
    HeightField out(dose.area);
    std::size_t clamped = 0;
    WarningLog domain_log; // collapse per-pixel domain clamps into one line
    for (std::size_t k = 0; k < dose.dose.size(); ++k) {
        double d = dose.dose[k];
        if (!std::isfinite(d) || d < 0.0)
            throw ValidationError("dose must be finite and >= 0, got " +
                                  std::to_string(d) + " at pixel " +
                                  std::to_string(k));
        if (d > 1.0) {
            d = 1.0;
            ++clamped;
        }
        out.removal[k] = gray_to_depth(fit, d * 255.0, &domain_log);
    }
    if (clamped > 0)
        warn(warnings, "ClampWarning",
             std::to_string(clamped) + " dose value(s) above 1 clamped", clamped);
    if (!domain_log.empty())
        warn(warnings, "ClampWarning",
             std::to_string(domain_log.size()) +
                 " pixel(s) outside the fitted gray domain [" +
                 std::to_string(fit.gray_min()) + ", " +
                 std::to_string(fit.gray_max()) + "], clamped",
             domain_log.size());
    return out;
}

inline HeightField simulate(const GrayMask& mask, const FittedCurve& fit,
                            const BlurSpec& blur = {},
                            WarningLog* warnings = nullptr) {
    return develop(blur_dose(mask_to_dose(mask), blur), fit, warnings);
}

} // namespace graylith
