#pragma once

#include <stdexcept>
#include <string>

namespace dealias {

// Error taxonomy. Callers that care about the distinction catch the
// specific type; everything derives from std::runtime_error (or
// std::invalid_argument for misuse) so generic handlers still work.

struct InvalidArgument : std::invalid_argument {
  explicit InvalidArgument(const std::string& msg) : std::invalid_argument(msg) {}
};

// Batch statistics are undefined (e.g. batch norm over a single value).
struct DegenerateBatch : InvalidArgument {
  explicit DegenerateBatch(const std::string& msg) : InvalidArgument(msg) {}
};

// A reference signal with zero norm cannot be used for relative errors.
struct DegenerateReference : InvalidArgument {
  explicit DegenerateReference(const std::string& msg) : InvalidArgument(msg) {}
};

// Grid size outside what the transform supports.
struct UnsupportedSize : InvalidArgument {
  explicit UnsupportedSize(const std::string& msg) : InvalidArgument(msg) {}
};

// NaN/Inf reached a place that refuses to propagate it.
struct NumericFault : std::runtime_error {
  explicit NumericFault(const std::string& msg) : std::runtime_error(msg) {}
};

// A serialized file does not match the expected layout or version.
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// A serialized file is structurally valid but fails its integrity check.
struct CorruptionError : std::runtime_error {
  explicit CorruptionError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dealias
