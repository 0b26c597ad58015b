#ifndef ASSIST_RANDOM_H_
#define ASSIST_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace assist {

// All randomness flows from 64-bit seeds through mt19937_64, whose output
// sequence is fixed by the standard. Distributions come from Boost.Random,
// which (unlike <random>) pins its algorithms across standard libraries.
using Engine = std::mt19937_64;

// SplitMix64 finalizer. Used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

// Seed for a named sub-stream, e.g. derive_seed(task_seed, "bob-input").
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                          std::uint64_t index = 0);

Engine make_engine(std::uint64_t seed);

double uniform01(Engine& engine);
double uniform(Engine& engine, double lo, double hi);
double standard_normal(Engine& engine);

// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> permutation(std::size_t n, Engine& engine);

}  // namespace assist

#endif  // ASSIST_RANDOM_H_
