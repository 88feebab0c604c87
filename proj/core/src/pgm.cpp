#include "spikekit/pgm.hpp"

#include <cmath>
#include <fstream>

namespace spikekit {

namespace {

// Next whitespace-separated token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

int64_t next_int(std::istream& in, const std::string& path) {
  const std::string tok = next_token(in);
  if (tok.empty()) throw CorruptionError(path + ": truncated PGM header");
  try {
    return std::stoll(tok);
  } catch (...) {
    throw FormatError(path + ": bad PGM header token '" + tok + "'");
  }
}

}  // namespace

void write_pgm(const std::string& path, const Tensor& values,
               const std::vector<std::string>& comments) {
  const Tensor* img = &values;
  Tensor squeezed;
  if (values.ndim() == 3 && values.dim(0) == 1) {
    squeezed = values.reshaped({values.dim(1), values.dim(2)});
    img = &squeezed;
  }
  if (img->ndim() != 2) {
    throw ShapeError("write_pgm: expected H x W or 1 x H x W, got " +
                     values.shape_str());
  }
  const int64_t h = img->dim(0), w = img->dim(1);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "P5\n";
  for (const auto& c : comments) out << "# " << c << "\n";
  out << w << " " << h << "\n255\n";
  std::vector<uint8_t> row(static_cast<size_t>(w));
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      double v = (*img)[y * w + x];
      v = std::clamp(v, 0.0, 1.0);
      row[static_cast<size_t>(x)] = static_cast<uint8_t>(std::lround(255.0 * v));
    }
    out.write(reinterpret_cast<const char*>(row.data()), w);
  }
  if (!out) throw IoError("write to " + path + " failed");
}

Tensor read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::string magic = next_token(in);
  if (magic != "P5" && magic != "P2") {
    throw FormatError(path + ": not a PGM file (magic '" + magic + "')");
  }
  const int64_t w = next_int(in, path);
  const int64_t h = next_int(in, path);
  const int64_t maxval = next_int(in, path);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
    throw FormatError(path + ": bad PGM dimensions");
  }
  Tensor img({h, w});
  const double inv = 1.0 / static_cast<double>(maxval);
  if (magic == "P2") {
    for (int64_t i = 0; i < h * w; ++i) {
      img[i] = static_cast<double>(next_int(in, path)) * inv;
    }
    return img;
  }
  if (maxval > 255) throw FormatError(path + ": 16-bit binary PGM not supported");
  std::vector<uint8_t> buf(static_cast<size_t>(h * w));
  in.read(reinterpret_cast<char*>(buf.data()), h * w);
  if (in.gcount() != h * w) {
    throw CorruptionError(path + ": truncated PGM payload, expected " +
                          std::to_string(h * w) + " bytes, got " +
                          std::to_string(in.gcount()));
  }
  for (int64_t i = 0; i < h * w; ++i) img[i] = buf[static_cast<size_t>(i)] * inv;
  return img;
}

}  // namespace spikekit
