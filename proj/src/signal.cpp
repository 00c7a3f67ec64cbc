#include "stgnn/signal.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>

namespace stgnn {

static_assert(std::endian::native == std::endian::little,
              "signal binary format assumes a little-endian host");
static_assert(sizeof(double) == 8 && sizeof(std::int64_t) == 8);

void save_signal(const SpaceTimeSignald& x, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_signal: cannot open " + path);
  const std::int64_t header[3] = {x.nodes(), x.horizon(), x.features()};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  // Row-major (n, t, f), f fastest; the in-memory slices are per-feature
  // column-major, so the entries are streamed one by one.
  std::vector<double> row(static_cast<std::size_t>(x.horizon() * x.features()));
  for (Index n = 0; n < x.nodes(); ++n) {
    std::size_t k = 0;
    for (Index t = 0; t < x.horizon(); ++t)
      for (Index f = 0; f < x.features(); ++f) row[k++] = x(n, t, f);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("save_signal: write failed for " + path);
}

SpaceTimeSignald load_signal(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_signal: cannot open " + path);
  std::int64_t header[3];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw std::runtime_error("load_signal: truncated header in " + path);
  const std::int64_t n = header[0], t = header[1], f = header[2];
  if (n < 1 || t < 1 || f < 1)
    throw std::runtime_error("load_signal: invalid dimensions in " + path);
  SpaceTimeSignald x(n, t, f);
  std::vector<double> row(static_cast<std::size_t>(t * f));
  for (Index i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!in) throw std::runtime_error("load_signal: truncated data in " + path);
    std::size_t k = 0;
    for (Index c = 0; c < t; ++c)
      for (Index g = 0; g < f; ++g) x(i, c, g) = row[k++];
  }
  // Trailing bytes indicate a corrupt or mismatched file.
  char extra;
  if (in.read(&extra, 1)) throw std::runtime_error("load_signal: trailing bytes in " + path);
  return x;
}

}  // namespace stgnn
