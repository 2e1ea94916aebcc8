#pragma once

#include <stdexcept>
#include <string>

namespace llb {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input text (file/stream). Carries a 1-based line number when known.
struct ParseError : Error {
    long line;
    ParseError(long line_, const std::string& reason)
        : Error("parse error at line " + std::to_string(line_) + ": " + reason), line(line_) {}
};

// Structurally invalid input (well-formed text, bad content).
struct ValidationError : Error {
    using Error::Error;
};

struct MissingFace : ValidationError {
    using ValidationError::ValidationError;
};
struct DuplicateCell : ValidationError {
    using ValidationError::ValidationError;
};
struct NonSimplicial : ValidationError {
    using ValidationError::ValidationError;
};
struct DegreeOutOfRange : ValidationError {
    using ValidationError::ValidationError;
};
struct NotSymmetric : ValidationError {
    using ValidationError::ValidationError;
};
struct InvalidProbeCount : ValidationError {
    using ValidationError::ValidationError;
};
struct RelatorViolated : ValidationError {
    using ValidationError::ValidationError;
};
struct DegreeMismatch : ValidationError {
    using ValidationError::ValidationError;
};
struct UnsupportedFamily : ValidationError {
    using ValidationError::ValidationError;
};
struct NoFreeQuotient : ValidationError {
    using ValidationError::ValidationError;
};
struct RadiusMismatch : ValidationError {
    using ValidationError::ValidationError;
};
struct Disconnected : ValidationError {
    using ValidationError::ValidationError;
};
struct UnsupportedSpace : ValidationError {
    using ValidationError::ValidationError;
};
struct TOutOfWindow : ValidationError {
    using ValidationError::ValidationError;
};
struct WindowEmpty : ValidationError {
    using ValidationError::ValidationError;
};
struct GridTooCoarse : ValidationError {
    using ValidationError::ValidationError;
};

// A computation refused to start or continue because it would exceed a
// configured resource cap.
struct ResourceError : Error {
    using Error::Error;
};
struct TooLargeForExact : ResourceError {
    using ResourceError::ResourceError;
};
struct TruncationUnreachable : ResourceError {
    using ResourceError::ResourceError;
};

// Broken internal invariant; should never fire on valid inputs.
struct InternalError : Error {
    using Error::Error;
};
struct PruningUnsound : InternalError {
    using InternalError::InternalError;
};

}  // namespace llb
