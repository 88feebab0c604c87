#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "spikekit/spike_stream.hpp"

namespace spikekit {

// SPK1 container, all multi-byte fields little-endian:
//   magic   "SPK1"   4 bytes
//   version u16      currently 1
//   width   u32
//   height  u32
//   t_len   u32
//   dt_us   f64
//   theta   f64
//   lambda  f64
// followed by the bit-packed payload, one byte-aligned plane per time step.
inline constexpr char kStreamMagic[4] = {'S', 'P', 'K', '1'};
inline constexpr uint16_t kStreamVersion = 1;
inline constexpr int64_t kStreamHeaderBytes = 42;

// Returns the number of bytes written.
int64_t write_stream(const SpikeStream& stream, std::ostream& sink);
SpikeStream read_stream(std::istream& source);

int64_t write_stream_file(const SpikeStream& stream, const std::string& path);
SpikeStream read_stream_file(const std::string& path);

// Dense (one byte per pixel, nonzero = spike) <-> packed plane conversion.
// pack_plane/unpack_plane are the production byte-at-a-time routines; the
// *_naive variants walk bit by bit and exist as the reference baseline for
// correctness checks and throughput comparisons.
void pack_plane(const uint8_t* dense, int64_t n, uint8_t* packed);
void unpack_plane(const uint8_t* packed, int64_t n, uint8_t* dense);
void pack_plane_naive(const uint8_t* dense, int64_t n, uint8_t* packed);
void unpack_plane_naive(const uint8_t* packed, int64_t n, uint8_t* dense);

}  // namespace spikekit
