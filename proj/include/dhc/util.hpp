#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dhc {

inline constexpr int kMaxDim = 3;
inline constexpr int kMaxDepth = 60;

// Content-value comparisons share one relative tolerance so that ties
// (e.g. a children sum exactly matching a self cover) resolve the same
// way everywhere.
inline constexpr double kContentRelTol = 1e-9;

struct domain_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct internal_error : std::logic_error {
  using std::logic_error::logic_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw domain_error(what);
}

inline void expect(bool cond, const char* what) {
  if (!cond) throw internal_error(what);
}

// 2^e, exact for |e| <= 1023.
inline double pow2(int e) { return std::ldexp(1.0, e); }

// (2^-k)^d, the d-cost of a dyadic side.
inline double side_pow(int k, double d) { return std::exp2(-double(k) * d); }

inline bool geq_rel(double a, double b) {
  return a >= b - kContentRelTol * std::max({std::fabs(a), std::fabs(b)});
}

inline bool eq_rel(double a, double b) {
  return std::fabs(a - b) <= kContentRelTol * std::max({std::fabs(a), std::fabs(b), 1.0e-300});
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b, r = a % b;
  return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return -floor_div(-a, b);
}

// SplitMix64. Used as a counter-based stream: value = mix(seed, counter),
// so draws are position-addressable and reproducible across platforms.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_key(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2)));
}

inline double uniform01(std::uint64_t bits) {
  return double(bits >> 11) * 0x1.0p-53;
}

}  // namespace dhc
