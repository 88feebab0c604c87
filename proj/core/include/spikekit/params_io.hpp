#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "spikekit/tensor.hpp"

namespace spikekit {

// Flat binary blob of named tensors, little-endian throughout:
//   magic "SKPB", u32 count, then per tensor
//   u16 name_len, name bytes, u32 ndim, u32 dims[ndim], f64 data[].
// Used to freeze seeded parameter sets as reproducible fixtures.
void save_params(std::ostream& sink,
                 const std::vector<std::pair<std::string, const Tensor*>>& params);
std::map<std::string, Tensor> load_params(std::istream& source);

void save_params_file(const std::string& path,
                      const std::vector<std::pair<std::string, const Tensor*>>& params);
std::map<std::string, Tensor> load_params_file(const std::string& path);

// Single-tensor container ("SKT1", u32 ndim, u32 dims[], f64 data[]), the
// CLI's feature-blob format.
void write_tensor_file(const std::string& path, const Tensor& t);
Tensor read_tensor_file(const std::string& path);

}  // namespace spikekit
