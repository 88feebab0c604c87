#pragma once

#include <string>
#include <vector>

#include "spikekit/tensor.hpp"

namespace spikekit {

// 8-bit binary PGM (P5). Values expects an H x W or 1 x H x W tensor in
// [0,1]; pixels are written as round(255*v). Comment lines go after the
// magic, one '#' prefix per entry.
void write_pgm(const std::string& path, const Tensor& values,
               const std::vector<std::string>& comments = {});

// Reads P5 or P2, returns H x W values normalized to [0,1].
Tensor read_pgm(const std::string& path);

}  // namespace spikekit
