#pragma once

#include <stdexcept>
#include <string>

namespace ptyroi {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed file contents (bad magic, version, dtype, field syntax).
struct FormatError : Error {
    using Error::Error;
};

/// Structurally valid input carrying invalid values (negative intensity,
/// non-finite data, header/body length mismatch).
struct DataError : Error {
    using Error::Error;
};

/// Grid/window geometry violations (out-of-bounds window, duplicate scan
/// cell, shape mismatch).
struct GeometryError : Error {
    using Error::Error;
};

/// Size preconditions (too small phantom, too few samples).
struct SizeError : Error {
    using Error::Error;
};

/// Filesystem failures.
struct IoError : Error {
    using Error::Error;
};

/// Numerically degenerate situations: zero total intensity, zero spread on a
/// CoM axis, all-identical clustering input, empty selection.
struct NumericalError : Error {
    using Error::Error;
};

}  // namespace ptyroi
