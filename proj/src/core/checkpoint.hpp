#pragma once

#include <string>

#include "core/model.hpp"

namespace adast {

// Checkpoint file: magic "ADSTCKPT", u32 version, then per-parameter records
// (u32 name length, UTF-8 name, u32 rank, u32 dims[], f64 payload), all
// little-endian. Every named tensor is stored, batch-norm running statistics
// included.
void save_checkpoint(AdastModel& model, const std::string& path);

// Loads into an existing model; every record must match a named tensor of
// the same shape and every model tensor must be present.
void load_checkpoint(AdastModel& model, const std::string& path);

}  // namespace adast
