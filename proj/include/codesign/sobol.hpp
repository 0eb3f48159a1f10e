#pragma once

#include <cstdint>
#include <vector>

namespace codesign::opt {

/// First n points of a digitally shifted Sobol sequence in [0,1)^dims. The
/// shift (one random XOR mask per dimension) is derived from seed.
std::vector<std::vector<double>> sobol_init(int n, int dims, std::uint64_t seed);

}  // namespace codesign::opt
