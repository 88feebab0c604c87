#include "spikekit/recon.hpp"

#include <algorithm>
#include <string>

namespace spikekit {

IntensityMap tfp(const SpikeStream& stream, int64_t start, int64_t len) {
  if (start < 0 || len < 1 || start + len > stream.t_len) {
    throw BoundsError("tfp: window [" + std::to_string(start) + ", " +
                      std::to_string(start + len) + ") out of [0, " +
                      std::to_string(stream.t_len) + ")");
  }
  IntensityMap map;
  map.window_start = start;
  map.window_len = len;
  map.values = Tensor({1, stream.height, stream.width});
  double* dst = map.values.data();
  const auto denom = static_cast<double>(len);
  for (int64_t y = 0; y < stream.height; ++y) {
    for (int64_t x = 0; x < stream.width; ++x) {
      *dst++ = static_cast<double>(stream.count_spikes(start, y, x, len)) / denom;
    }
  }
  return map;
}

IntensityMap tfi(const SpikeStream& stream, int64_t t, const SensorConfig& cfg) {
  stream.check_plane(t);
  IntensityMap map;
  map.window_start = 0;
  map.window_len = stream.t_len;
  map.values = Tensor({1, stream.height, stream.width});
  double* dst = map.values.data();
  const double scale = cfg.theta / (cfg.lambda * cfg.dt_us);

  for (int64_t y = 0; y < stream.height; ++y) {
    for (int64_t x = 0; x < stream.width; ++x, ++dst) {
      // Spike steps for this pixel, in order.
      int64_t prev = -1, next = -1, last = -1, second_last = -1;
      int64_t first = -1, second = -1, count = 0;
      for (int64_t k = 0; k < stream.t_len; ++k) {
        if (!stream.get(k, y, x)) continue;
        ++count;
        if (first < 0) first = k;
        else if (second < 0) second = k;
        if (k <= t) prev = k;
        if (k > t && next < 0) next = k;
        second_last = last;
        last = k;
      }
      if (count < 2) {
        *dst = 0.0;
        continue;
      }
      int64_t isi;
      if (prev >= 0 && next >= 0) {
        isi = next - prev;
      } else if (prev >= 0) {
        isi = last - second_last;  // last complete interval before t
      } else {
        isi = second - first;      // first complete interval after t
      }
      *dst = std::clamp(scale / static_cast<double>(isi), 0.0, 1.0);
    }
  }
  return map;
}

IntensityMap intensity_map(const SpikeStream& stream) {
  return tfp(stream, 0, stream.t_len);
}

}  // namespace spikekit
