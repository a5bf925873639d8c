#pragma once

#include <string>

#include "satkgc/encoder.hpp"

namespace satkgc {

// Binary checkpoint: magic "SATK", u32 version, u32 dim, u32 entities,
// u32 total relations, then float32 little-endian arrays for the head-entity,
// relation, and tail-entity tables (row-major), then float32 beta and
// log_inv_temperature.
void save_checkpoint(const EncoderParams<double>& params, const std::string& path);
EncoderParams<double> load_checkpoint(const std::string& path);

}  // namespace satkgc
