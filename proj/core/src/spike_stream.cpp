#include "spikekit/spike_stream.hpp"

#include <bit>
#include <cstring>
#include <string>

namespace spikekit {

SpikeStream SpikeStream::zeros(int64_t width, int64_t height, int64_t t_len,
                               double dt_us, double theta, double lambda) {
  if (width <= 0 || height <= 0 || t_len <= 0) {
    throw ConfigError("spike stream dimensions must be positive");
  }
  SpikeStream s;
  s.width = width;
  s.height = height;
  s.t_len = t_len;
  s.dt_us = dt_us;
  s.theta = theta;
  s.lambda = lambda;
  s.bits.assign(static_cast<size_t>(s.payload_bytes()), 0);
  return s;
}

int64_t SpikeStream::count_spikes() const {
  int64_t n = 0;
  for (uint8_t b : bits) n += std::popcount(static_cast<unsigned>(b));
  return n;
}

int64_t SpikeStream::count_spikes(int64_t t, int64_t y, int64_t x, int64_t len) const {
  int64_t n = 0;
  for (int64_t k = 0; k < len; ++k) n += get(t + k, y, x) ? 1 : 0;
  return n;
}

void SpikeStream::check_plane(int64_t t) const {
  if (t < 0 || t >= t_len) {
    throw BoundsError("time step " + std::to_string(t) + " out of [0, " +
                      std::to_string(t_len) + ")");
  }
}

void SpikeStream::check_pixel(int64_t y, int64_t x) const {
  if (y < 0 || y >= height || x < 0 || x >= width) {
    throw BoundsError("pixel (" + std::to_string(y) + ", " + std::to_string(x) +
                      ") outside " + std::to_string(height) + "x" + std::to_string(width));
  }
}

SpikeStream slice_time(const SpikeStream& stream, int64_t start, int64_t len) {
  if (start < 0 || len < 1 || start + len > stream.t_len) {
    throw BoundsError("temporal slice [" + std::to_string(start) + ", " +
                      std::to_string(start + len) + ") out of [0, " +
                      std::to_string(stream.t_len) + ")");
  }
  SpikeStream out = SpikeStream::zeros(stream.width, stream.height, len,
                                       stream.dt_us, stream.theta, stream.lambda);
  const int64_t pb = stream.plane_bytes();
  std::memcpy(out.bits.data(), stream.bits.data() + start * pb,
              static_cast<size_t>(len * pb));
  return out;
}

Tensor to_tensor(const SpikeStream& stream, int64_t start, int64_t len) {
  if (start < 0 || len < 1 || start + len > stream.t_len) {
    throw BoundsError("temporal window [" + std::to_string(start) + ", " +
                      std::to_string(start + len) + ") out of [0, " +
                      std::to_string(stream.t_len) + ")");
  }
  Tensor out({len, stream.height, stream.width});
  double* dst = out.data();
  for (int64_t t = 0; t < len; ++t) {
    for (int64_t y = 0; y < stream.height; ++y) {
      for (int64_t x = 0; x < stream.width; ++x) {
        *dst++ = stream.get(start + t, y, x) ? 1.0 : 0.0;
      }
    }
  }
  return out;
}

SpikeStream pad_spatial(const SpikeStream& stream, int64_t new_height,
                        int64_t new_width) {
  if (new_height < stream.height || new_width < stream.width) {
    throw ConfigError("pad_spatial cannot shrink the stream");
  }
  if (new_height == stream.height && new_width == stream.width) return stream;
  SpikeStream out = SpikeStream::zeros(new_width, new_height, stream.t_len,
                                       stream.dt_us, stream.theta, stream.lambda);
  for (int64_t t = 0; t < stream.t_len; ++t) {
    for (int64_t y = 0; y < stream.height; ++y) {
      for (int64_t x = 0; x < stream.width; ++x) {
        if (stream.get(t, y, x)) out.set(t, y, x, true);
      }
    }
  }
  return out;
}

}  // namespace spikekit
