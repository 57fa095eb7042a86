#include "spiro/random.hpp"

#include <limits>
#include <sstream>

#include "spiro/errors.hpp"

namespace spiro {

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw ConfigError("uniform_index on an empty range");
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t draw = rng();
  while (draw >= limit) draw = rng();
  return draw % n;
}

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

std::string serialize_rng(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng deserialize_rng(const std::string& state) {
  std::istringstream is(state);
  Rng rng;
  is >> rng;
  if (is.fail()) throw MalformedError("unreadable random engine state");
  return rng;
}

}  // namespace spiro
