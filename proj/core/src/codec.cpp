#include "spikekit/codec.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace spikekit {

namespace {

void put_u16(uint8_t* p, uint16_t v) {
  p[0] = static_cast<uint8_t>(v);
  p[1] = static_cast<uint8_t>(v >> 8);
}

void put_u32(uint8_t* p, uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<uint8_t>(v >> (8 * i));
}

void put_f64(uint8_t* p, double v) {
  const uint64_t u = std::bit_cast<uint64_t>(v);
  for (int i = 0; i < 8; ++i) p[i] = static_cast<uint8_t>(u >> (8 * i));
}

uint16_t get_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t get_u32(const uint8_t* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const uint8_t* p) {
  uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(u);
}

}  // namespace

int64_t write_stream(const SpikeStream& stream, std::ostream& sink) {
  if (stream.width <= 0 || stream.height <= 0 || stream.t_len <= 0) {
    throw ConfigError("write_stream: stream has no extent");
  }
  if (static_cast<int64_t>(stream.bits.size()) != stream.payload_bytes()) {
    throw ShapeError("write_stream: payload size does not match dimensions");
  }
  uint8_t header[kStreamHeaderBytes];
  std::memcpy(header, kStreamMagic, 4);
  put_u16(header + 4, kStreamVersion);
  put_u32(header + 6, static_cast<uint32_t>(stream.width));
  put_u32(header + 10, static_cast<uint32_t>(stream.height));
  put_u32(header + 14, static_cast<uint32_t>(stream.t_len));
  put_f64(header + 18, stream.dt_us);
  put_f64(header + 26, stream.theta);
  put_f64(header + 34, stream.lambda);
  sink.write(reinterpret_cast<const char*>(header), kStreamHeaderBytes);
  sink.write(reinterpret_cast<const char*>(stream.bits.data()),
             static_cast<std::streamsize>(stream.bits.size()));
  if (!sink) throw IoError("write_stream: sink write failed");
  return kStreamHeaderBytes + static_cast<int64_t>(stream.bits.size());
}

SpikeStream read_stream(std::istream& source) {
  uint8_t header[kStreamHeaderBytes];
  source.read(reinterpret_cast<char*>(header), 4);
  if (source.gcount() != 4) {
    throw CorruptionError("read_stream: truncated header, expected " +
                          std::to_string(kStreamHeaderBytes) + " bytes, got " +
                          std::to_string(source.gcount()));
  }
  if (std::memcmp(header, kStreamMagic, 4) != 0) {
    throw FormatError("read_stream: bad magic, not an SPK1 stream");
  }
  source.read(reinterpret_cast<char*>(header) + 4, kStreamHeaderBytes - 4);
  if (source.gcount() != kStreamHeaderBytes - 4) {
    throw CorruptionError("read_stream: truncated header, expected " +
                          std::to_string(kStreamHeaderBytes) + " bytes, got " +
                          std::to_string(4 + source.gcount()));
  }
  const uint16_t version = get_u16(header + 4);
  if (version != kStreamVersion) {
    throw FormatError("read_stream: unsupported version " + std::to_string(version));
  }
  const uint32_t width = get_u32(header + 6);
  const uint32_t height = get_u32(header + 10);
  const uint32_t t_len = get_u32(header + 14);
  if (width == 0 || height == 0 || t_len == 0) {
    throw FormatError("read_stream: zero extent in header");
  }
  SpikeStream stream = SpikeStream::zeros(width, height, t_len,
                                          get_f64(header + 18),
                                          get_f64(header + 26),
                                          get_f64(header + 34));
  const int64_t expected = stream.payload_bytes();
  source.read(reinterpret_cast<char*>(stream.bits.data()),
              static_cast<std::streamsize>(expected));
  const int64_t got = source.gcount();
  if (got != expected) {
    throw CorruptionError("read_stream: truncated payload, expected " +
                          std::to_string(expected) + " bytes, got " +
                          std::to_string(got));
  }
  return stream;
}

int64_t write_stream_file(const SpikeStream& stream, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const int64_t n = write_stream(stream, out);
  out.flush();
  if (!out) throw IoError("write to " + path + " failed");
  return n;
}

SpikeStream read_stream_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_stream(in);
}

void pack_plane(const uint8_t* dense, int64_t n, uint8_t* packed) {
  const int64_t full = n / 8;
  for (int64_t b = 0; b < full; ++b) {
    const uint8_t* d = dense + b * 8;
    packed[b] = static_cast<uint8_t>(
        (d[0] != 0) | ((d[1] != 0) << 1) | ((d[2] != 0) << 2) |
        ((d[3] != 0) << 3) | ((d[4] != 0) << 4) | ((d[5] != 0) << 5) |
        ((d[6] != 0) << 6) | ((d[7] != 0) << 7));
  }
  if (n % 8) {
    uint8_t tail = 0;
    for (int64_t i = full * 8; i < n; ++i) {
      if (dense[i]) tail |= static_cast<uint8_t>(1u << (i & 7));
    }
    packed[full] = tail;
  }
}

namespace {

// Each table entry expands one packed byte to eight 0/1 bytes, bit j landing
// in byte j of the little-endian word.
constexpr std::array<uint64_t, 256> make_unpack_table() {
  std::array<uint64_t, 256> table{};
  for (int b = 0; b < 256; ++b) {
    uint64_t v = 0;
    for (int j = 0; j < 8; ++j) {
      v |= static_cast<uint64_t>((b >> j) & 1) << (8 * j);
    }
    table[static_cast<size_t>(b)] = v;
  }
  return table;
}

constexpr std::array<uint64_t, 256> kUnpackTable = make_unpack_table();

}  // namespace

void unpack_plane(const uint8_t* packed, int64_t n, uint8_t* dense) {
  const int64_t full = n / 8;
  if constexpr (std::endian::native == std::endian::little) {
    for (int64_t b = 0; b < full; ++b) {
      const uint64_t v = kUnpackTable[packed[b]];
      std::memcpy(dense + b * 8, &v, 8);
    }
  } else {
    for (int64_t b = 0; b < full; ++b) {
      const uint8_t v = packed[b];
      uint8_t* d = dense + b * 8;
      for (int j = 0; j < 8; ++j) d[j] = (v >> j) & 1;
    }
  }
  for (int64_t i = full * 8; i < n; ++i) {
    dense[i] = (packed[i >> 3] >> (i & 7)) & 1;
  }
}

void pack_plane_naive(const uint8_t* dense, int64_t n, uint8_t* packed) {
  const int64_t bytes = (n + 7) / 8;
  for (int64_t b = 0; b < bytes; ++b) packed[b] = 0;
  for (int64_t i = 0; i < n; ++i) {
    if (dense[i]) {
      packed[i / 8] = static_cast<uint8_t>(packed[i / 8] | (1u << (i % 8)));
    }
  }
}

void unpack_plane_naive(const uint8_t* packed, int64_t n, uint8_t* dense) {
  for (int64_t i = 0; i < n; ++i) {
    dense[i] = (packed[i / 8] >> (i % 8)) & 1;
  }
}

}  // namespace spikekit
