#pragma once

#include <stdexcept>

namespace spikekit {

// Common base so the CLI boundary can catch the whole family at once.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };        // dimension mismatch
struct ConfigError : Error { using Error::Error; };       // invalid configuration value
struct BoundsError : Error { using Error::Error; };       // index or window out of range
struct InputError : Error { using Error::Error; };        // bad user-supplied data
struct FormatError : Error { using Error::Error; };       // unrecognized file layout
struct CorruptionError : Error { using Error::Error; };   // structurally damaged file
struct IoError : Error { using Error::Error; };           // underlying stream failure

}  // namespace spikekit
