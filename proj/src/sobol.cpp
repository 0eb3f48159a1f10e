#include "codesign/sobol.hpp"

#include <random>
#include <stdexcept>

#include <boost/random/sobol.hpp>

namespace codesign::opt {

std::vector<std::vector<double>> sobol_init(int n, int dims, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sobol_init: n must be at least 1");
  if (dims < 1) throw std::invalid_argument("sobol_init: dims must be at least 1");
  boost::random::sobol engine(static_cast<std::size_t>(dims));
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> shift(static_cast<std::size_t>(dims));
  for (auto& s : shift) s = rng();

  std::vector<std::vector<double>> points(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(dims)));
  for (auto& p : points) {
    for (int d = 0; d < dims; ++d) {
      const std::uint64_t bits = static_cast<std::uint64_t>(engine()) ^ shift[d];
      p[d] = static_cast<double>(bits >> 11) * 0x1.0p-53;
    }
  }
  return points;
}

}  // namespace codesign::opt
