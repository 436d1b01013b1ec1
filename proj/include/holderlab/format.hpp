#pragma once

#include <cstdio>
#include <string>

namespace holderlab {

// Shortest-ish decimal form that still round-trips a double exactly
// (17 significant digits).  Used by the unparser and all report writers so
// identical runs produce identical bytes.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace holderlab
