#pragma once

#include <algorithm>
#include <cstdint>
#include <string>

#include "errors.hpp"

namespace divforms {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

inline std::string to_string(i128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    u128 u = neg ? u128(0) - u128(v) : u128(v);
    std::string s;
    while (u) {
        s.push_back(char('0' + int(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    std::reverse(s.begin(), s.end());
    return s;
}

inline i128 abs128(i128 v) { return v < 0 ? -v : v; }

inline i128 gcd128(i128 a, i128 b) {
    a = abs128(a);
    b = abs128(b);
    while (b) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

inline i128 floor_div(i128 a, i128 b) {
    i128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline i128 ceil_div(i128 a, i128 b) { return -floor_div(-a, b); }

inline i128 mod_floor(i128 a, i128 m) {
    i128 r = a % m;
    return r < 0 ? r + m : r;
}

constexpr i128 kI128Max = i128(~u128(0) >> 1);

inline i128 checked_mul(i128 a, i128 b, const char* what = "product") {
    i128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw SizeError(std::string("128-bit overflow in ") + what);
    return r;
}

inline i128 checked_add(i128 a, i128 b, const char* what = "sum") {
    i128 r;
    if (__builtin_add_overflow(a, b, &r)) throw SizeError(std::string("128-bit overflow in ") + what);
    return r;
}

inline i64 narrow64(i128 v, const char* what = "value") {
    if (v > INT64_MAX || v < INT64_MIN) throw SizeError(std::string(what) + " does not fit in 64 bits");
    return i64(v);
}

// floor(sqrt(n)) for n >= 0
inline u64 isqrt(u128 n) {
    if (n == 0) return 0;
    u64 r = u64(__builtin_sqrtl((long double)n));
    while (u128(r) * r > n) --r;
    while (u128(r + 1) * (r + 1) <= n) ++r;
    return r;
}

inline i128 ipow(i128 base, unsigned e) {
    i128 r = 1;
    while (e--) r = checked_mul(r, base, "power");
    return r;
}

// extended gcd: returns g and x with a*x = g (mod b)
inline i128 ext_gcd(i128 a, i128 b, i128& x, i128& y) {
    if (b == 0) {
        x = a >= 0 ? 1 : -1;
        y = 0;
        return abs128(a);
    }
    i128 x1, y1;
    i128 g = ext_gcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

// inverse of a modulo m, gcd(a,m) = 1, m >= 1
inline i128 inv_mod(i128 a, i128 m) {
    if (m == 1) return 0;
    i128 x, y;
    i128 g = ext_gcd(mod_floor(a, m), m, x, y);
    if (g != 1) throw DomainError("inv_mod: not invertible");
    return mod_floor(x, m);
}

}  // namespace divforms
