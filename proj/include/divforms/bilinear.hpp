#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "arith.hpp"
#include "errors.hpp"
#include "int128.hpp"
#include "parallel.hpp"

namespace divforms {

struct BilinearCount {
    i64 X = 0;
    i128 n0 = 0;
    i128 boundary_terms = 0;  // contributions with |v1| = v0 or |v2| = v0
    i128 n1 = 0;
};

struct HeightCount {
    long double B = 0;
    i128 n_of_b = 0;
    i128 raw_pairs = 0;  // 4 n_of_b: pairs before identifying signs
};

namespace detail {

// #{(u0, u1) : u0, u1 != 0, |u0|, |u1| <= U, u0 v0 + u1 v1 = t}, v0 != 0
inline i64 count_pairs(i64 v0, i64 v1, i64 t, i64 U) {
    if (v0 < 0) {
        v0 = -v0;
        v1 = -v1;
        t = -t;
    }
    i64 g = std::gcd(v0, v1 < 0 ? -v1 : v1);
    if (t % g) return 0;
    i64 a = v0 / g, b = v1 / g, tt = t / g;
    // u1 = r (mod a) solves u1 b = tt (mod a)
    i64 r = a == 1 ? 0 : i64(mod_floor(i128(mod_floor(tt, a)) * inv_mod(b, a), a));
    // u1 = r + a k, u0 = c0 - b k
    i64 c0 = (tt - b * r) / a;
    i64 klo = i64(ceil_div(-U - r, a)), khi = i64(floor_div(U - r, a));
    if (b > 0) {
        klo = std::max(klo, i64(ceil_div(c0 - U, b)));
        khi = std::min(khi, i64(floor_div(c0 + U, b)));
    } else if (b < 0) {
        klo = std::max(klo, i64(ceil_div(-U - c0, -b)));
        khi = std::min(khi, i64(floor_div(U - c0, -b)));
    } else if (c0 > U || c0 < -U || c0 == 0) {
        return 0;
    }
    if (khi < klo) return 0;
    i64 cnt = khi - klo + 1;
    if (r % a == 0) {
        i64 k = -r / a;
        if (k >= klo && k <= khi) --cnt;
    }
    if (b != 0 && c0 % b == 0) {
        i64 k = c0 / b;
        if (k >= klo && k <= khi && r + a * k != 0) --cnt;
    }
    return cnt;
}

}  // namespace detail

// (u, v) in (Z \ 0)^6 with |v| <= v0 <= sqrt(X), |u| <= X / v0, u . v = 0.
// For each v and u2 the pairs (u0, u1) lie on a line and are counted in O(1).
inline BilinearCount count_N0(i64 X, unsigned threads = 1, i64 budget = 1'000'000) {
    if (X < 1) throw DomainError("count_N0: X must be >= 1");
    if (X > budget) throw SizeError("count_N0: X = " + std::to_string(X) + " exceeds the budget " + std::to_string(budget));
    i64 s = i64(isqrt(u64(X)));
    BilinearCount out;
    out.X = X;
    // one chunk per (v0, v1)
    std::vector<std::pair<i64, i64>> jobs;
    for (i64 v0 = 1; v0 <= s; ++v0)
        for (i64 v1 = -v0; v1 <= v0; ++v1)
            if (v1) jobs.push_back({v0, v1});
    std::vector<i128> all(jobs.size(), 0), boundary(jobs.size(), 0), inner(jobs.size(), 0);
    parallel_chunks(jobs.size(), threads, [&](std::size_t c) {
        auto [v0, v1] = jobs[c];
        i64 U = X / v0;
        for (i64 v2 = -v0; v2 <= v0; ++v2) {
            if (!v2) continue;
            i128 n = 0;
            for (i64 u2 = -U; u2 <= U; ++u2)
                if (u2) n += detail::count_pairs(v0, v1, -u2 * v2, U);
            all[c] += n;
            if (v1 == v0 || v1 == -v0 || v2 == v0 || v2 == -v0) boundary[c] += n;
            // interior representative: 0 < v1, v2 < v0, u2 > 0, u0 v0 + u1 v1 = u2 v2
            if (v1 > 0 && v1 < v0 && v2 > 0 && v2 < v0)
                for (i64 u2 = 1; u2 <= U; ++u2) inner[c] += detail::count_pairs(v0, v1, u2 * v2, U);
        }
    });
    for (std::size_t c = 0; c < jobs.size(); ++c) {
        out.n0 += all[c];
        out.boundary_terms += boundary[c];
        out.n1 += inner[c];
    }
    return out;
}

struct ReductionReport {
    i64 X = 0;
    i128 n0 = 0, n1 = 0, boundary_terms = 0;
    bool holds = false;
};

inline ReductionReport reduction_check(i64 X, unsigned threads = 1) {
    BilinearCount c = count_N0(X, threads);
    ReductionReport r{X, c.n0, c.n1, c.boundary_terms, c.n0 == 8 * c.n1 + c.boundary_terms};
    if (!r.holds)
        throw InvariantViolation("reduction_check: n0 = " + to_string(c.n0) + " but 8 n1 + boundary = " +
                                 to_string(8 * c.n1 + c.boundary_terms));
    return r;
}

namespace detail {

// y in (Z \ 0)^3 with |y| <= R and x . y = 0
inline i64 count_orthogonal(const std::array<i64, 3>& x, i64 R) {
    if (R <= 0) return 0;
    i64 s = 0;
    for (i64 y2 = -R; y2 <= R; ++y2)
        if (y2) s += count_pairs(x[0], x[1], -x[2] * y2, R);
    return s;
}

// as above, y primitive with lo <= |y| <= hi, by Moebius inversion over
// the common divisor of y
inline i64 count_orthogonal_primitive(const std::array<i64, 3>& x, i64 lo, i64 hi, const ArithTables& t) {
    i64 s = 0;
    for (i64 d = 1; d <= hi; ++d) {
        if (!t.mobius[d]) continue;
        s += t.mobius[d] * (count_orthogonal(x, hi / d) - count_orthogonal(x, (lo + d - 1) / d - 1));
    }
    return s;
}

}  // namespace detail

// N(B) = (1/4) #{(x, y) primitive with nonzero entries : max |x_i y_j|^2 <= B, x . y = 0}.
// The height is |x| |y| in the sup norm and the condition is symmetric in
// x and y, so pairs with |x| <= |y| are counted from short x and doubled,
// minus the ties |x| = |y|.
inline HeightCount count_N(long double B, unsigned threads = 1, bool primitive = true) {
    HeightCount out;
    out.B = B;
    if (!(B >= 1)) return out;
    i64 T = i64(isqrt(u128(std::floor(B))));
    i64 m = i64(isqrt(u64(T)));
    ArithTables t = build_tables(u64(std::max<i64>(T, 2)));
    std::vector<i64> x0s;
    for (i64 x0 = -m; x0 <= m; ++x0)
        if (x0) x0s.push_back(x0);
    std::vector<i128> A(x0s.size(), 0), E(x0s.size(), 0);
    parallel_chunks(x0s.size(), threads, [&](std::size_t c) {
        i64 x0 = x0s[c];
        for (i64 x1 = -m; x1 <= m; ++x1)
            for (i64 x2 = -m; x2 <= m; ++x2) {
                if (!x1 || !x2) continue;
                if (primitive && std::gcd(std::gcd(x0 < 0 ? -x0 : x0, x1 < 0 ? -x1 : x1), x2 < 0 ? -x2 : x2) != 1) continue;
                i64 n = std::max({x0 < 0 ? -x0 : x0, x1 < 0 ? -x1 : x1, x2 < 0 ? -x2 : x2});
                i64 hi = T / n;
                if (hi < n) continue;
                std::array<i64, 3> x{x0, x1, x2};
                if (primitive) {
                    A[c] += detail::count_orthogonal_primitive(x, n, hi, t);
                    E[c] += detail::count_orthogonal_primitive(x, n, n, t);
                } else {
                    A[c] += detail::count_orthogonal(x, hi) - detail::count_orthogonal(x, n - 1);
                    E[c] += detail::count_orthogonal(x, n) - detail::count_orthogonal(x, n - 1);
                }
            }
    });
    i128 a = 0, e = 0;
    for (std::size_t c = 0; c < x0s.size(); ++c) {
        a += A[c];
        e += E[c];
    }
    out.raw_pairs = 2 * a - e;
    if (out.raw_pairs % 4 != 0) throw InvariantViolation("count_N: pair count " + to_string(out.raw_pairs) + " is not divisible by 4");
    out.n_of_b = out.raw_pairs / 4;
    return out;
}

}  // namespace divforms
