#include "spikekit/annotations.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace spikekit {

namespace {

std::string fmt_real(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error("failed to format real value");
  return std::string(buf, end);
}

double parse_real(const std::string& tok, int64_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw FormatError("annotation line " + std::to_string(line_no) +
                      ": bad real value '" + tok + "'");
  }
  return v;
}

int64_t parse_int(const std::string& tok, int64_t line_no) {
  int64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw FormatError("annotation line " + std::to_string(line_no) +
                      ": bad integer '" + tok + "'");
  }
  return v;
}

}  // namespace

void write_annotations(const std::vector<BBoxAnnotation>& boxes, std::ostream& sink) {
  for (const auto& b : boxes) {
    sink << b.t_step << ' ' << b.class_id << ' ' << fmt_real(b.x) << ' '
         << fmt_real(b.y) << ' ' << fmt_real(b.w) << ' ' << fmt_real(b.h) << '\n';
  }
  if (!sink) throw IoError("annotation write failed");
}

std::vector<BBoxAnnotation> read_annotations(std::istream& source) {
  std::vector<BBoxAnnotation> boxes;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<std::string> tok;
    std::string t;
    while (ss >> t) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 6) {
      throw FormatError("annotation line " + std::to_string(line_no) +
                        ": expected 6 fields, got " + std::to_string(tok.size()));
    }
    BBoxAnnotation b;
    b.t_step = parse_int(tok[0], line_no);
    b.class_id = parse_int(tok[1], line_no);
    b.x = parse_real(tok[2], line_no);
    b.y = parse_real(tok[3], line_no);
    b.w = parse_real(tok[4], line_no);
    b.h = parse_real(tok[5], line_no);
    boxes.push_back(b);
  }
  return boxes;
}

void write_annotations_file(const std::vector<BBoxAnnotation>& boxes,
                            const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_annotations(boxes, out);
}

std::vector<BBoxAnnotation> read_annotations_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_annotations(in);
}

void validate_annotations(const std::vector<BBoxAnnotation>& boxes, int64_t t_len,
                          int64_t width, int64_t height) {
  for (size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    if (b.t_step < 0 || b.t_step >= t_len) {
      throw InputError("annotation " + std::to_string(i) + ": t_step " +
                       std::to_string(b.t_step) + " outside [0, " +
                       std::to_string(t_len) + ")");
    }
    const double x0 = b.x - b.w / 2, x1 = b.x + b.w / 2;
    const double y0 = b.y - b.h / 2, y1 = b.y + b.h / 2;
    if (b.w <= 0 || b.h <= 0 || x1 <= 0 || y1 <= 0 ||
        x0 >= static_cast<double>(width) || y0 >= static_cast<double>(height)) {
      throw InputError("annotation " + std::to_string(i) +
                       ": box does not intersect the image rectangle");
    }
  }
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const auto& e : manifest.entries) {
    out << e.spike_path << '\t' << e.annotation_path << '\t';
    for (size_t i = 0; i < e.class_names.size(); ++i) {
      out << (i ? "," : "") << e.class_names[i];
    }
    out << '\n';
  }
  if (!out) throw IoError("manifest write to " + path + " failed");
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  DatasetManifest m;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    ManifestEntry e;
    std::istringstream ss(line);
    std::string classes;
    if (!std::getline(ss, e.spike_path, '\t') ||
        !std::getline(ss, e.annotation_path, '\t')) {
      throw FormatError("manifest line " + std::to_string(line_no) +
                        ": expected tab-separated spike and annotation paths");
    }
    std::getline(ss, classes, '\t');
    std::istringstream cs(classes);
    std::string name;
    while (std::getline(cs, name, ',')) {
      if (!name.empty()) e.class_names.push_back(name);
    }
    for (const std::string& p : {e.spike_path, e.annotation_path}) {
      if (!std::filesystem::exists(p)) {
        throw InputError("manifest line " + std::to_string(line_no) +
                         ": referenced file does not exist: " + p);
      }
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

}  // namespace spikekit
