// field_io.hpp - plain-text interchange for HeightFields.
//
// Format: one header line "px_w,px_h,width_um,height_um", then px_h rows of
// px_w comma-separated removal values (um), printed with %.17g so the parse
// round-trips bit-exactly.
#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>

#include "graylith/errors.hpp"
#include "graylith/field.hpp"

namespace graylith {

inline std::string write_field_csv(const HeightField& field) {
    field.area.validate();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", field.area.px_w,
                  field.area.px_h, field.area.width_um, field.area.height_um);
    std::string out = buf;
    out.reserve(out.size() + field.removal.size() * 20);
    for (int i = 0; i < field.area.px_h; ++i) {
        for (int j = 0; j < field.area.px_w; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", field.at(i, j));
            if (j) out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

inline HeightField read_field_csv(std::string_view text) {
    std::size_t pos = 0, line_no = 0;
    auto next_line = [&](std::string& line) -> bool {
        if (pos >= text.size()) return false;
        std::size_t nl = text.find('\n', pos);
        std::size_t end = nl == std::string_view::npos ? text.size() : nl;
        line.assign(text.substr(pos, end - pos));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        return true;
    };

    std::string line;
    if (!next_line(line)) throw TruncatedFile("field CSV is empty");
    WorkingArea area;
    char extra;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf%c", &area.px_w, &area.px_h,
                    &area.width_um, &area.height_um, &extra) != 4)
        throw SyntaxError("line 1: expected header 'px_w,px_h,width_um,height_um'");
    area.validate();

    HeightField field(area);
    for (int i = 0; i < area.px_h; ++i) {
        if (!next_line(line))
            throw TruncatedFile("field CSV ends after " + std::to_string(i) +
                                " of " + std::to_string(area.px_h) + " rows");
        const char* p = line.c_str();
        for (int j = 0; j < area.px_w; ++j) {
            char* end = nullptr;
            double v = std::strtod(p, &end);
            if (end == p)
                throw SyntaxError("line " + std::to_string(line_no) + ": row has " +
                                  std::to_string(j) + " of " +
                                  std::to_string(area.px_w) + " values");
            if (v < 0.0)
                throw NegativeDepth("line " + std::to_string(line_no) +
                                    ": removal " + std::to_string(v) + " um < 0");
            field.at(i, j) = v;
            p = end;
            if (j + 1 < area.px_w) {
                if (*p != ',')
                    throw SyntaxError("line " + std::to_string(line_no) +
                                      ": expected ',' after value " +
                                      std::to_string(j + 1));
                ++p;
            }
        }
        while (*p == ' ' || *p == '\t') ++p;
        if (*p != '\0')
            throw SyntaxError("line " + std::to_string(line_no) +
                              ": trailing characters after " +
                              std::to_string(area.px_w) + " values");
    }
    return field;
}

} // namespace graylith
