#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>

namespace lms {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational ratio(std::int64_t num, std::int64_t den) { return Rational(BigInt(num), BigInt(den)); }

inline BigInt numer(const Rational& r) { return boost::multiprecision::numerator(r); }
inline BigInt denom(const Rational& r) { return boost::multiprecision::denominator(r); }

inline BigInt floor_of(const Rational& r) {
    BigInt n = numer(r), d = denom(r);
    BigInt q = n / d;
    if (n < 0 && q * d != n) q -= 1;
    return q;
}

inline BigInt ceil_of(const Rational& r) { return -floor_of(-r); }

inline BigInt ipow(const BigInt& b, unsigned e) { return boost::multiprecision::pow(b, e); }

inline Rational rpow(const Rational& b, unsigned e) {
    return Rational(ipow(numer(b), e), ipow(denom(b), e));
}

// a >= sqrt(K) for a >= 0, decided exactly.
inline bool ge_sqrt(const Rational& a, const Rational& K) { return a >= 0 && a * a >= K; }
inline bool le_sqrt(const Rational& a, const Rational& K) { return a <= 0 || a * a <= K; }
inline bool lt_sqrt(const Rational& a, const Rational& K) { return !ge_sqrt(a, K); }

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string to_string(const Rational& r) {
    if (denom(r) == 1) return numer(r).str();
    return numer(r).str() + "/" + denom(r).str();
}

// Accepts "p", "p/q" or a finite decimal such as "0.25".
Rational parse_rational(const std::string& text);

}  // namespace lms
