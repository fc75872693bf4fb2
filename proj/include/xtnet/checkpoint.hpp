#pragma once

#include <string>
#include <vector>

#include "xtnet/autodiff.hpp"

namespace xtnet {

// JSON checkpoint: {"format_version": 1, "config": <caller-supplied>,
// "tensors": {name: {"rows": r, "cols": c, "data": [...]}}}.
// Doubles round-trip exactly through the serializer.
void save_checkpoint(const std::string& path, const std::string& config_json,
                     const std::vector<ad::Parameter*>& params);

// Fills each parameter's value by name; throws on missing names, shape
// mismatches, or unknown format versions. Returns the stored config.
std::string load_checkpoint(const std::string& path,
                            const std::vector<ad::Parameter*>& params);

}  // namespace xtnet
