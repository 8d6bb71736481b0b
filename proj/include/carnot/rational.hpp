#pragma once

#include <boost/multiprecision/cpp_int.hpp>

// Exact scalars. All symbolic work (structure constants, BCH coefficients,
// vector-field coefficients, Veronese derivatives) is done over Rational;
// numeric pipelines convert once and run in double.

namespace carnot {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double d) { return d; }

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static Rational from_rational(const Rational& r) { return r; }
  static Rational from_int(long v) { return Rational(v); }
};

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static double from_rational(const Rational& r) { return r.convert_to<double>(); }
  static double from_int(long v) { return static_cast<double>(v); }
};

template <class S>
S scalar_from_rational(const Rational& r) {
  return ScalarTraits<S>::from_rational(r);
}

}  // namespace carnot
