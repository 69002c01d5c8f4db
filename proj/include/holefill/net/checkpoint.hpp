#pragma once

#include <string>

#include "holefill/net/model.hpp"

namespace holefill::net {

// Versioned JSON checkpoint: config echo, seed, per-tensor shape
// manifest, and full-precision values.
void save_checkpoint(Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace holefill::net
