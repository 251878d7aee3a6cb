#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

namespace hvoc {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// C(n, j) = n(n-1)...(n-j+1) / j! for any integer n and j >= 0.
inline Integer binomial(long long n, long long j) {
  if (j < 0) return Integer(0);
  Integer num(1);
  Integer den(1);
  for (long long t = 0; t < j; ++t) {
    num *= Integer(n - t);
    den *= Integer(t + 1);
  }
  return num / den;  // exact: j consecutive integers are divisible by j!
}

inline Integer factorial(long long n) {
  Integer r(1);
  for (long long t = 2; t <= n; ++t) r *= Integer(t);
  return r;
}

inline Integer int_pow(long long base, long long exp) {
  Integer r(1);
  for (long long t = 0; t < exp; ++t) r *= Integer(base);
  return r;
}

// Internal consistency condition that should hold for every reachable state.
inline void internal_check(bool ok, const char* what) {
  if (!ok) throw std::logic_error(std::string("internal check failed: ") + what);
}

}  // namespace hvoc
