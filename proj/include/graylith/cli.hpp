// cli.hpp - subcommand surface: calibrate, generate, rasterize, encode,
// simulate, analyze, pipeline. Exit codes: 0 success, 1 validation error,
// 2 I/O error. Warnings go to stderr and are never fatal.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "graylith/analysis.hpp"
#include "graylith/calibration.hpp"
#include "graylith/config.hpp"
#include "graylith/devsim.hpp"
#include "graylith/errors.hpp"
#include "graylith/field.hpp"
#include "graylith/field_io.hpp"
#include "graylith/mask.hpp"
#include "graylith/mesh.hpp"
#include "graylith/mesh_io.hpp"
#include "graylith/raster.hpp"
#include "graylith/shapes.hpp"
#include "graylith/tiff.hpp"

namespace graylith::cli {

inline constexpr const char* kVersion = "graylith 0.1.0";

namespace detail {

namespace fs = std::filesystem;

inline std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed on " + path.string());
    return bytes;
}

inline void spew(const fs::path& path, std::string_view bytes) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec)
            throw IoError("cannot create " + path.parent_path().string() + ": " +
                          ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("short write to " + path.string());
}

inline void report_warnings(const WarningLog& log, std::ostream& err) {
    for (const Warning& w : log.entries())
        err << "warning: " << w.code << ": " << w.message << "\n";
}

inline void note_artifact(const fs::path& path, std::ostream& out) {
    out << "wrote " << path.string() << "\n";
}

inline Mesh load_mesh_file(const fs::path& path, WarningLog* warnings) {
    std::string bytes = slurp(path);
    if (path.extension() == ".obj") return parse_obj(bytes, warnings);
    return parse_stl(bytes); // autodetects binary vs ASCII
}

// Field artifacts: float TIFF if the bytes look like TIFF, else the CSV grid.
inline HeightField read_field_file(const fs::path& path) {
    std::string bytes = slurp(path);
    if (bytes.size() >= 2 && (bytes.substr(0, 2) == "II" || bytes.substr(0, 2) == "MM"))
        return read_float_tiff(bytes);
    return read_field_csv(bytes);
}

inline void write_field_file(const fs::path& path, const HeightField& field,
                             std::ostream& out) {
    std::string ext = path.extension().string();
    if (ext == ".tif" || ext == ".tiff")
        spew(path, write_float_tiff(field));
    else
        spew(path, write_field_csv(field));
    note_artifact(path, out);
}

inline void write_mask_file(const fs::path& path, const GrayMask& mask,
                            std::ostream& out) {
    if (path.extension() == ".pgm")
        spew(path, write_pgm(mask));
    else
        spew(path, write_tiff(mask));
    note_artifact(path, out);
}

inline ProjectConfig load_config_file(const fs::path& path) {
    ConfigDoc doc = parse_config(slurp(path));
    return project_config_from(doc, path.parent_path().empty()
                                        ? fs::path(".")
                                        : path.parent_path());
}

// Linear 0 -> max_depth curve used when no calibration CSV is configured.
inline FittedCurve synthetic_linear_fit(double max_depth_um) {
    ContrastCurve curve;
    curve.points = {{0, 0.0}, {255, max_depth_um}};
    curve.metadata = "synthetic linear calibration";
    return fit_contrast(curve, FitMethod::monotone_pchip);
}

inline FittedCurve fit_from_config(const ProjectConfig& cfg) {
    if (cfg.calibration_file.empty()) return synthetic_linear_fit(cfg.max_depth_um);
    ContrastCurve curve = load_calibration(slurp(cfg.calibration_file));
    return fit_contrast(curve, cfg.method);
}

inline HeightField design_from_config(const ProjectConfig& cfg, WarningLog* warnings) {
    if (!cfg.mesh && cfg.shapes.empty())
        throw ValidationError("config defines neither [shape] nor [mesh]");
    HeightField design(cfg.area);
    if (cfg.mesh) {
        const MeshJob& job = *cfg.mesh;
        Mesh mesh = load_mesh_file(job.file, warnings);
        mesh = transform_mesh(mesh, job.scale, job.translate_um);
        MeshReport rep = validate_mesh(mesh);
        ElevationField elev = rasterize_top_view(mesh, cfg.area);
        double z_top = job.z_top_um ? *job.z_top_um
                                    : (rep.has_bbox ? rep.bbox_max.z : 0.0);
        design = elevation_to_removal(elev, z_top, cfg.max_depth_um,
                                      job.background_removal_um, warnings);
    }
    for (const ShapeSpec& s : cfg.shapes) add_shape(design, s);
    return design;
}

struct CalibrateArgs {
    std::string csv, out;
    std::string method = "monotone-pchip";
    double max_depth = -1.0; // < 0: use the full calibrated depth
    int entries = 256;
};

inline void cmd_calibrate(const CalibrateArgs& a, std::ostream& out,
                          std::ostream& err) {
    WarningLog log;
    ContrastCurve curve = load_calibration(slurp(a.csv));
    FittedCurve fit = fit_contrast(curve, fit_method_from_string(a.method));
    double max_depth = a.max_depth < 0.0 ? fit(fit.gray_max()) : a.max_depth;
    DepthToGrayLUT lut = build_lut(fit, max_depth, a.entries);
    spew(a.out, lut_to_json(lut, fit));
    note_artifact(a.out, out);
    report_warnings(log, err);
}

struct GenerateArgs {
    std::string config, out;
    bool invert = false;
};

inline void cmd_generate(const GenerateArgs& a, std::ostream& out,
                         std::ostream& err) {
    ProjectConfig cfg = load_config_file(a.config);
    if (cfg.shapes.empty())
        throw ValidationError("config has no [shape] sections to generate");
    WarningLog log;
    HeightField design(cfg.area);
    for (const ShapeSpec& s : cfg.shapes) add_shape(design, s);
    if (a.invert) design = invert_relief(design, cfg.max_depth_um);
    write_field_file(a.out, design, out);
    report_warnings(log, err);
}

struct RasterizeArgs {
    std::string mesh, config, out;
};

inline void cmd_rasterize(const RasterizeArgs& a, std::ostream& out,
                          std::ostream& err) {
    ProjectConfig cfg = load_config_file(a.config);
    WarningLog log;
    MeshJob job = cfg.mesh.value_or(MeshJob{});
    job.file = a.mesh; // CLI argument wins over [mesh] file
    cfg.mesh = job;
    cfg.shapes.clear();
    HeightField field = design_from_config(cfg, &log);
    write_field_file(a.out, field, out);
    report_warnings(log, err);
}

struct EncodeArgs {
    std::string field, lut, out;
};

inline void cmd_encode(const EncodeArgs& a, std::ostream& out, std::ostream& err) {
    HeightField field = read_field_file(a.field);
    CalibrationData cal = calibration_from_json(slurp(a.lut));
    WarningLog log;
    GrayMask mask = encode_mask(field, cal.lut, &log);
    write_mask_file(a.out, mask, out);
    report_warnings(log, err);
}

struct SimulateArgs {
    std::string mask, lut, out;
    double sigma = 0.0;
    double truncation = 4.0;
    double pitch = -1.0; // override when the mask lacks resolution tags
};

inline void cmd_simulate(const SimulateArgs& a, std::ostream& out,
                         std::ostream& err) {
    GrayMask mask = read_tiff(slurp(a.mask));
    if (a.pitch > 0.0) {
        mask.pitch_x_um = a.pitch;
        mask.pitch_y_um = a.pitch;
    }
    CalibrationData cal = calibration_from_json(slurp(a.lut));
    if (a.sigma < 0.0) throw ValidationError("--sigma must be >= 0");
    WarningLog log;
    BlurSpec blur{a.sigma, a.truncation};
    HeightField sim = simulate(mask, cal.fit, blur, &log);
    write_field_file(a.out, sim, out);
    report_warnings(log, err);
}

struct AnalyzeArgs {
    std::string design, observed, config, out;
};

inline std::string analysis_fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline void cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
    ProjectConfig cfg = load_config_file(a.config);
    if (!cfg.scan)
        throw ValidationError("config has no [analysis] scan_from_um/scan_to_um");
    HeightField design = read_field_file(a.design);
    HeightField observed = read_field_file(a.observed);
    ComparisonReport rep =
        compare(design, observed, *cfg.scan, cfg.segments, cfg.exclusions);
    emit_report(rep, a.out);
    note_artifact(fs::path(a.out) / "residuals.csv", out);
    note_artifact(fs::path(a.out) / "summary.txt", out);
    note_artifact(fs::path(a.out) / "plot.svg", out);
    out << "overall rms_um = " << analysis_fmt(rep.overall_rms_um) << " ("
        << rep.overall_samples << " samples)\n";
    (void)err;
}

inline void cmd_pipeline(const std::string& config_path, std::ostream& out,
                         std::ostream& err) {
    ProjectConfig cfg = load_config_file(config_path);
    WarningLog log;

    FittedCurve fit = fit_from_config(cfg);
    DepthToGrayLUT lut = build_lut(fit, cfg.max_depth_um, cfg.lut_entries);
    spew(cfg.out_dir / "lut.json", lut_to_json(lut, fit));
    note_artifact(cfg.out_dir / "lut.json", out);

    HeightField design = design_from_config(cfg, &log);
    write_field_file(cfg.out_dir / "design.csv", design, out);
    if (cfg.float_tiff) write_field_file(cfg.out_dir / "design.tif", design, out);

    GrayMask mask = encode_mask(design, lut, &log);
    write_mask_file(cfg.out_dir / "mask.tif", mask, out);
    if (cfg.emit_inverted) {
        HeightField mold = invert_relief(design, cfg.max_depth_um);
        GrayMask mold_mask = encode_mask(mold, lut, &log);
        write_mask_file(cfg.out_dir / "mask_inverted.tif", mold_mask, out);
    }

    HeightField sim = simulate(mask, fit, cfg.blur, &log);
    write_field_file(cfg.out_dir / "simulated.csv", sim, out);
    if (cfg.float_tiff) write_field_file(cfg.out_dir / "simulated.tif", sim, out);

    if (cfg.scan) {
        ComparisonReport rep =
            compare(design, sim, *cfg.scan, cfg.segments, cfg.exclusions);
        emit_report(rep, cfg.out_dir / "report");
        note_artifact(cfg.out_dir / "report" / "summary.txt", out);
        out << "overall rms_um = " << analysis_fmt(rep.overall_rms_um) << " ("
            << rep.overall_samples << " samples)\n";
    }
    report_warnings(log, err);
}

} // namespace detail

// Entry point shared by the binary and the tests. Streams are injectable so
// tests can capture output.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    CLI::App app{"grayscale lithography mask toolchain"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(0, 1);

    detail::CalibrateArgs cal;
    CLI::App* c_cal = app.add_subcommand(
        "calibrate", "Fit a contrast curve CSV and export the depth->gray LUT");
    c_cal->add_option("csv", cal.csv, "calibration CSV (gray,depth_um)")->required();
    c_cal->add_option("--out", cal.out, "output LUT JSON path")->required();
    c_cal->add_option("--method", cal.method,
                      "fit method: monotone-pchip | isotonic+smoothing");
    c_cal->add_option("--max-depth", cal.max_depth,
                      "LUT max depth in um (default: full calibrated depth)");
    c_cal->add_option("--entries", cal.entries, "LUT entry count (default 256)");

    detail::GenerateArgs gen;
    CLI::App* c_gen = app.add_subcommand(
        "generate", "Generate a height field from [shape] sections in a config");
    c_gen->add_option("config", gen.config, "project config file")->required();
    c_gen->add_option("--out", gen.out, "output field (.csv or .tif)")->required();
    c_gen->add_flag("--invert", gen.invert, "emit the mold (complement) relief");

    detail::RasterizeArgs ras;
    CLI::App* c_ras = app.add_subcommand(
        "rasterize", "Rasterize an STL/OBJ mesh into a height field");
    c_ras->add_option("mesh", ras.mesh, "mesh file (.stl or .obj)")->required();
    c_ras->add_option("config", ras.config, "project config file")->required();
    c_ras->add_option("--out", ras.out, "output field (.csv or .tif)")->required();

    detail::EncodeArgs enc;
    CLI::App* c_enc = app.add_subcommand(
        "encode", "Encode a height field into an 8-bit grayscale mask");
    c_enc->add_option("field", enc.field, "height field (.csv or float .tif)")
        ->required();
    c_enc->add_option("lut", enc.lut, "LUT JSON from 'calibrate'")->required();
    c_enc->add_option("--out", enc.out, "output mask (.tif or .pgm)")->required();

    detail::SimulateArgs sim;
    CLI::App* c_sim = app.add_subcommand(
        "simulate", "Forward-simulate development of a mask");
    c_sim->add_option("mask", sim.mask, "mask TIFF")->required();
    c_sim->add_option("lut", sim.lut, "LUT JSON (carries the fitted curve)")
        ->required();
    c_sim->add_option("--sigma", sim.sigma, "lateral diffusion sigma in um (default 0)");
    c_sim->add_option("--truncation", sim.truncation,
                      "kernel truncation radius in sigmas (default 4)");
    c_sim->add_option("--pitch", sim.pitch,
                      "um/px override for masks without resolution tags");
    c_sim->add_option("--out", sim.out, "output field (.csv or .tif)")->required();

    detail::AnalyzeArgs ana;
    CLI::App* c_ana = app.add_subcommand(
        "analyze", "Compare a design field against an observed field");
    c_ana->add_option("design", ana.design, "design height field")->required();
    c_ana->add_option("observed", ana.observed, "observed height field")->required();
    c_ana->add_option("config", ana.config, "config with [analysis] section")
        ->required();
    c_ana->add_option("--out", ana.out, "report directory")->required();

    std::string pipeline_config;
    CLI::App* c_pipe = app.add_subcommand(
        "pipeline", "Run calibrate -> design -> encode -> simulate -> analyze");
    c_pipe->add_option("config", pipeline_config, "project config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 1; // usage problems are validation errors
    }

    try {
        if (app.got_subcommand(c_cal)) detail::cmd_calibrate(cal, out, err);
        else if (app.got_subcommand(c_gen)) detail::cmd_generate(gen, out, err);
        else if (app.got_subcommand(c_ras)) detail::cmd_rasterize(ras, out, err);
        else if (app.got_subcommand(c_enc)) detail::cmd_encode(enc, out, err);
        else if (app.got_subcommand(c_sim)) detail::cmd_simulate(sim, out, err);
        else if (app.got_subcommand(c_ana)) detail::cmd_analyze(ana, out, err);
        else if (app.got_subcommand(c_pipe)) detail::cmd_pipeline(pipeline_config, out, err);
        else {
            err << app.help() << std::flush;
            return 1;
        }
        return 0;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace graylith::cli
