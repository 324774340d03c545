#pragma once

#include <charconv>
#include <string>

namespace trap {

/// Shortest decimal text that parses back to exactly the same double.
inline std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace trap
