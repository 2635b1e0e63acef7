#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>

namespace compatkit {

// Group orders overflow 64 bits well inside the supported range (60^13 and
// friends), so orders are arbitrary precision throughout.
using BigInt = boost::multiprecision::cpp_int;

inline BigInt big_pow(BigInt base, std::uint64_t exp)
{
  BigInt r = 1;
  while (exp) {
    if (exp & 1u)
      r *= base;
    base *= base;
    exp >>= 1;
  }
  return r;
}

inline bool fits_u64(BigInt const &v)
{
  return v >= 0 && v <= BigInt(UINT64_MAX);
}

inline std::uint64_t to_u64(BigInt const &v)
{
  return static_cast<std::uint64_t>(v);
}

inline std::string big_str(BigInt const &v) { return v.str(); }

} // namespace compatkit
