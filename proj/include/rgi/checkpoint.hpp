#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rgi/common.hpp"

namespace rgi {

// Named parameter values for serialization. The checkpoint is a text format:
//
//   rgi-params 1
//   <count>
//   <name> <rows> <cols>
//   <row of %.17g values>...
//
// 17 significant digits round-trip doubles exactly, so save/load is
// bit-exact.
using NamedMatrices = std::vector<std::pair<std::string, Matrix>>;

void save_parameters(const std::string& path, const NamedMatrices& params);
NamedMatrices load_parameters(const std::string& path);

}  // namespace rgi
