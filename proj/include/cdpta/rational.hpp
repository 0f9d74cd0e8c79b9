#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cdpta {

/// Exact rational arithmetic used throughout the model layer. Probabilities,
/// clock values and piecewise-linear coefficients never touch floating point
/// before the numeric solver.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

enum class ErrorKind {
  GuardUnsatisfied,
  InvariantViolated,
  OutOfRange,
  NotInRegion,
  OutsideClosure,
  IllegalDelay,
  EdgeNotEnabled,
  MalformedProgram,
  SchemaError,
  ValidationRequired,
  NonConvergence,
  Explosion,
  Io,
  Usage,
};

struct Error : std::runtime_error {
  ErrorKind kind;
  Error(ErrorKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

inline Rational make_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorKind::SchemaError, "rational with zero denominator");
  return Rational(BigInt(num), BigInt(den));
}

/// Largest integer n with n <= q.
inline BigInt floor_rational(const Rational& q) {
  BigInt n = numerator(q), d = denominator(q);  // d > 0 by cpp_rational invariant
  BigInt quot = n / d;
  if (n < 0 && quot * d != n) --quot;
  return quot;
}

inline bool is_integer(const Rational& q) { return denominator(q) == 1; }

/// Canonical text form: "7" for integers, "num/den" otherwise.
inline std::string rational_to_string(const Rational& q) {
  std::string s = numerator(q).str();
  if (!is_integer(q)) {
    s += '/';
    s += denominator(q).str();
  }
  return s;
}

/// Slash form with an explicit denominator, e.g. "1/1", "3/4".
inline std::string rational_to_fraction_string(const Rational& q) {
  return numerator(q).str() + "/" + denominator(q).str();
}

/// Parses "num/den" or a plain integer string.
inline Rational parse_rational(const std::string& text) {
  try {
    auto slash = text.find('/');
    if (slash == std::string::npos) return Rational(BigInt(text));
    BigInt num(text.substr(0, slash));
    BigInt den(text.substr(slash + 1));
    if (den == 0) throw Error(ErrorKind::SchemaError, "zero denominator in \"" + text + "\"");
    return Rational(num, den);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(ErrorKind::SchemaError, "not a rational: \"" + text + "\"");
  }
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace cdpta
