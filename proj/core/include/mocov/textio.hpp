#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace mocov {

// %.17g round-trips IEEE doubles exactly; all numeric text output goes
// through here so stores and reports are byte-stable.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

}  // namespace mocov
