#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spikekit/errors.hpp"

namespace spikekit {

// One box aligned to a spike time step. (x, y) is the center, (w, h) the
// extents; all in pixels of the stream the annotation belongs to.
struct BBoxAnnotation {
  int64_t t_step = 0;
  int64_t class_id = 0;
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

// Line-delimited text records: "t_step class_id x y w h". Reals are written
// with shortest exact round-trip formatting, so save/load never drifts.
// '#' starts a comment, blank lines are skipped.
void write_annotations(const std::vector<BBoxAnnotation>& boxes, std::ostream& sink);
std::vector<BBoxAnnotation> read_annotations(std::istream& source);
void write_annotations_file(const std::vector<BBoxAnnotation>& boxes,
                            const std::string& path);
std::vector<BBoxAnnotation> read_annotations_file(const std::string& path);

// Checks 0 <= t_step < t_len and that every box intersects the image
// rectangle [0,width) x [0,height). Throws InputError naming the offender.
void validate_annotations(const std::vector<BBoxAnnotation>& boxes, int64_t t_len,
                          int64_t width, int64_t height);

struct ManifestEntry {
  std::string spike_path;
  std::string annotation_path;
  std::vector<std::string> class_names;
};

// Plain-text index of (spike file, annotation file, class table) triples,
// one per line:  spike_path <TAB> annotation_path <TAB> comma,separated,names
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
};

void write_manifest(const DatasetManifest& manifest, const std::string& path);

// Loads the index and verifies every referenced file exists.
DatasetManifest read_manifest(const std::string& path);

}  // namespace spikekit
