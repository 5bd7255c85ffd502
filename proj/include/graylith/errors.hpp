// errors.hpp - error hierarchy and warning sink shared by all graylith modules.
//
// Two fatal families: ValidationError (bad input, CLI exit code 1) and
// IoError (filesystem trouble, CLI exit code 2). Everything recoverable is
// reported through WarningLog and never throws.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace graylith {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input violates a documented precondition or format rule.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Underlying I/O failed (missing file, permission, short write, ...).
class IoError : public Error {
public:
    using Error::Error;
};

#define GRAYLITH_VALIDATION_ERROR(NAME)                                    \
    class NAME : public ValidationError {                                  \
    public:                                                                \
        using ValidationError::ValidationError;                            \
    }

GRAYLITH_VALIDATION_ERROR(TruncatedFile);     // byte stream shorter than declared
GRAYLITH_VALIDATION_ERROR(SyntaxError);       // unparsable text, message carries line no.
GRAYLITH_VALIDATION_ERROR(InvalidCoordinate); // NaN/Inf vertex data
GRAYLITH_VALIDATION_ERROR(IndexOutOfRange);   // face index outside vertex table
GRAYLITH_VALIDATION_ERROR(ZeroScale);         // degenerate transform requested
GRAYLITH_VALIDATION_ERROR(FootprintOverflow); // shape does not fit the working area
GRAYLITH_VALIDATION_ERROR(DepthOverflow);     // removal exceeds declared max depth
GRAYLITH_VALIDATION_ERROR(TooFewPoints);      // calibration needs at least two samples
GRAYLITH_VALIDATION_ERROR(NegativeDepth);     // calibration depth below zero
GRAYLITH_VALIDATION_ERROR(GrayOutOfRange);    // gray level outside 0..255
GRAYLITH_VALIDATION_ERROR(DepthNotReachable); // requested depth beyond curve maximum
GRAYLITH_VALIDATION_ERROR(NotTiff);           // stream is not a TIFF at all
GRAYLITH_VALIDATION_ERROR(UnsupportedFeature);// valid TIFF, but outside the baseline subset
GRAYLITH_VALIDATION_ERROR(OutOfBounds);       // profile endpoint outside the field
GRAYLITH_VALIDATION_ERROR(GridMismatch);      // profiles not resampleable onto each other
GRAYLITH_VALIDATION_ERROR(EmptyRange);        // statistic requested over zero samples

#undef GRAYLITH_VALIDATION_ERROR

// Non-fatal diagnostics. Callers pass a WarningLog* (or nullptr to discard);
// library code never prints.
struct Warning {
    std::string code;    // stable identifier, e.g. "ClampWarning"
    std::string message; // human-readable detail
    std::size_t count = 1;
};

class WarningLog {
public:
    void add(std::string code, std::string message, std::size_t count = 1) {
        entries_.push_back({std::move(code), std::move(message), count});
    }
    const std::vector<Warning>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    void clear() { entries_.clear(); }

private:
    std::vector<Warning> entries_;
};

inline void warn(WarningLog* log, std::string code, std::string message,
                 std::size_t count = 1) {
    if (log) log->add(std::move(code), std::move(message), count);
}

} // namespace graylith
