#pragma once

#include <cstdint>
#include <vector>

#include "spikekit/errors.hpp"
#include "spikekit/tensor.hpp"

namespace spikekit {

// Bit-packed binary volume of t_len time planes, each height x width. Planes
// are byte-aligned (padding bits are zero); within a plane bits run row-major
// with bit 0 of each byte being the leftmost of its eight pixels. The sensor
// parameters that produced the stream ride along as metadata.
struct SpikeStream {
  int64_t width = 0;
  int64_t height = 0;
  int64_t t_len = 0;
  double dt_us = 1.0;
  double theta = 2.0;
  double lambda = 1.0;
  std::vector<uint8_t> bits;

  static SpikeStream zeros(int64_t width, int64_t height, int64_t t_len,
                           double dt_us = 1.0, double theta = 2.0,
                           double lambda = 1.0);

  int64_t plane_bytes() const { return (width * height + 7) / 8; }
  int64_t payload_bytes() const { return plane_bytes() * t_len; }

  bool get(int64_t t, int64_t y, int64_t x) const {
    const int64_t p = y * width + x;
    return (bits[static_cast<size_t>(t * plane_bytes() + (p >> 3))] >> (p & 7)) & 1;
  }

  void set(int64_t t, int64_t y, int64_t x, bool v) {
    const int64_t p = y * width + x;
    uint8_t& b = bits[static_cast<size_t>(t * plane_bytes() + (p >> 3))];
    const uint8_t mask = static_cast<uint8_t>(1u << (p & 7));
    b = v ? (b | mask) : (b & static_cast<uint8_t>(~mask));
  }

  int64_t count_spikes() const;
  int64_t count_spikes(int64_t t, int64_t y, int64_t x, int64_t len) const;

  void check_plane(int64_t t) const;
  void check_pixel(int64_t y, int64_t x) const;
};

// Contiguous temporal sub-volume [start, start+len); metadata is preserved.
SpikeStream slice_time(const SpikeStream& stream, int64_t start, int64_t len);

// Unpacks [start, start+len) planes into a dense len x H x W tensor of 0/1.
Tensor to_tensor(const SpikeStream& stream, int64_t start, int64_t len);

// Zero-pads the spatial extent on the right/bottom edges.
SpikeStream pad_spatial(const SpikeStream& stream, int64_t new_height,
                        int64_t new_width);

}  // namespace spikekit
