#include "spikekit/params_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace spikekit {

namespace {

void put_u16(std::ostream& out, uint16_t v) {
  const char b[2] = {static_cast<char>(v), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

void put_u32(std::ostream& out, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>(v >> (8 * i));
  out.write(b, 4);
}

void put_f64(std::ostream& out, double v) {
  const uint64_t u = std::bit_cast<uint64_t>(v);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>(u >> (8 * i));
  out.write(b, 8);
}

uint16_t get_u16(std::istream& in) {
  uint8_t b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  if (in.gcount() != 2) throw CorruptionError("parameter blob: truncated u16");
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

uint32_t get_u32(std::istream& in) {
  uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) throw CorruptionError("parameter blob: truncated u32");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  uint8_t b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (in.gcount() != 8) throw CorruptionError("parameter blob: truncated f64");
  uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(u);
}

void write_tensor_body(std::ostream& out, const Tensor& t) {
  put_u32(out, static_cast<uint32_t>(t.ndim()));
  for (int64_t d : t.shape()) put_u32(out, static_cast<uint32_t>(d));
  for (double v : t.values()) put_f64(out, v);
}

Tensor read_tensor_body(std::istream& in) {
  const uint32_t ndim = get_u32(in);
  if (ndim == 0 || ndim > 8) throw FormatError("parameter blob: bad tensor rank");
  std::vector<int64_t> shape(ndim);
  int64_t numel = 1;
  for (auto& d : shape) {
    d = get_u32(in);
    if (d <= 0) throw FormatError("parameter blob: bad tensor extent");
    numel *= d;
  }
  std::vector<double> data(static_cast<size_t>(numel));
  for (double& v : data) v = get_f64(in);
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace

void save_params(std::ostream& sink,
                 const std::vector<std::pair<std::string, const Tensor*>>& params) {
  sink.write("SKPB", 4);
  put_u32(sink, static_cast<uint32_t>(params.size()));
  for (const auto& [name, tensor] : params) {
    put_u16(sink, static_cast<uint16_t>(name.size()));
    sink.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_tensor_body(sink, *tensor);
  }
  if (!sink) throw IoError("parameter blob write failed");
}

std::map<std::string, Tensor> load_params(std::istream& source) {
  char magic[4];
  source.read(magic, 4);
  if (source.gcount() != 4 || std::memcmp(magic, "SKPB", 4) != 0) {
    throw FormatError("parameter blob: bad magic");
  }
  const uint32_t count = get_u32(source);
  std::map<std::string, Tensor> out;
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t len = get_u16(source);
    std::string name(len, '\0');
    source.read(name.data(), len);
    if (source.gcount() != len) throw CorruptionError("parameter blob: truncated name");
    out.emplace(std::move(name), read_tensor_body(source));
  }
  return out;
}

void save_params_file(const std::string& path,
                      const std::vector<std::pair<std::string, const Tensor*>>& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  save_params(out, params);
}

std::map<std::string, Tensor> load_params_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return load_params(in);
}

void write_tensor_file(const std::string& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write("SKT1", 4);
  write_tensor_body(out, t);
  if (!out) throw IoError("tensor write to " + path + " failed");
}

Tensor read_tensor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "SKT1", 4) != 0) {
    throw FormatError(path + ": not a tensor blob");
  }
  return read_tensor_body(in);
}

}  // namespace spikekit
