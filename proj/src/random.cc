#include "assist/random.h"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <numeric>

namespace assist {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                          std::uint64_t index) {
  // FNV-1a over the stream name, folded with the seed and index.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(mix64(seed ^ h) + index);
}

Engine make_engine(std::uint64_t seed) { return Engine(seed); }

double uniform01(Engine& engine) {
  return boost::random::uniform_real_distribution<double>(0.0, 1.0)(engine);
}

double uniform(Engine& engine, double lo, double hi) {
  return boost::random::uniform_real_distribution<double>(lo, hi)(engine);
}

double standard_normal(Engine& engine) {
  return boost::random::normal_distribution<double>(0.0, 1.0)(engine);
}

std::vector<std::size_t> permutation(std::size_t n, Engine& engine) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(engine)]);
  }
  return order;
}

}  // namespace assist
