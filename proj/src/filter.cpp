#include "stgnn/filter.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace stgnn {

void save_taps(const FilterTapsd& taps, const std::string& path) {
  if (taps.h.empty()) throw std::invalid_argument("save_taps: empty taps");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("save_taps: cannot open " + path);
  out << taps.order() << "\n";
  char buf[64];
  for (double v : taps.h) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << "\n";
  }
  if (!out) throw std::runtime_error("save_taps: write failed for " + path);
}

FilterTapsd load_taps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_taps: cannot open " + path);
  long long order = -1;
  if (!(in >> order) || order < 0)
    throw std::runtime_error("load_taps: bad order line in " + path);
  FilterTapsd taps;
  taps.h.resize(static_cast<std::size_t>(order) + 1);
  for (double& v : taps.h)
    if (!(in >> v)) throw std::runtime_error("load_taps: truncated coefficients in " + path);
  return taps;
}

}  // namespace stgnn
