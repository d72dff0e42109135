#include "ntile/tiling.hpp"

#include <numeric>

namespace ntile {

const char* to_string(Membership m) {
  switch (m) {
    case Membership::outside:
      return "outside";
    case Membership::inside:
      return "inside";
    case Membership::strict:
      return "strict";
  }
  return "?";
}

std::vector<std::size_t> Tiling::candidates(const Vector&) const {
  std::vector<std::size_t> all(size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

}  // namespace ntile
