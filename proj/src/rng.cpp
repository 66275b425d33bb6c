#include "basinctl/rng.hpp"

namespace basinctl {

namespace {
constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
}

double halton(std::uint64_t index, unsigned base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

Vec halton_point(std::uint64_t index, int dim) {
  Vec u(dim);
  for (int d = 0; d < dim; ++d) {
    u[d] = halton(index, kPrimes[d % 20]);
  }
  return u;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SampleStream::SampleStream(std::uint64_t seed, std::uint64_t sample_index) {
  // Mix seed and index so neighbouring samples get unrelated streams.
  state_ = seed;
  std::uint64_t a = splitmix64(state_);
  state_ = sample_index ^ 0x6A09E667F3BCC909ULL;
  std::uint64_t b = splitmix64(state_);
  state_ = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
}

double SampleStream::next_unit() {
  // 53 random bits -> [0,1)
  return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
}

Vec SampleStream::next_in_box(const Box& box) {
  Vec u(box.dim());
  for (int d = 0; d < box.dim(); ++d) u[d] = next_unit();
  return box.map_unit(u);
}

}  // namespace basinctl
