#include "cicc/common.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace cicc {

std::string format_double(double x) {
  if (std::isinf(x)) {
    return x > 0 ? "inf" : "-inf";
  }
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  (void)ec;
  return std::string(buf.data(), ptr);
}

}  // namespace cicc
