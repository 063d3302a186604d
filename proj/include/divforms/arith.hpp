#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "int128.hpp"
#include "rational.hpp"

namespace divforms {

using Triple = std::array<i64, 3>;

// limit above which build_tables refuses to sieve directly
inline constexpr u64 kDefaultSieveCap = 100'000'000;

struct ArithTables {
    u64 limit = 0;
    std::vector<std::uint16_t> tau;
    std::vector<std::int8_t> mobius;
    std::vector<std::uint8_t> omega;
    std::vector<std::uint32_t> smallest_prime_factor;
    std::vector<std::uint32_t> primes;
};

inline ArithTables build_tables(u64 limit, u64 cap = kDefaultSieveCap) {
    if (limit < 1) throw DomainError("build_tables: limit must be >= 1");
    if (limit > cap)
        throw SizeError("build_tables: limit " + std::to_string(limit) + " exceeds sieve cap " +
                        std::to_string(cap));
    ArithTables t;
    t.limit = limit;
    try {
        t.tau.assign(limit + 1, 0);
        t.mobius.assign(limit + 1, 0);
        t.omega.assign(limit + 1, 0);
        t.smallest_prime_factor.assign(limit + 1, 0);
    } catch (const std::bad_alloc&) {
        throw SizeError("build_tables: cannot allocate tables for limit " + std::to_string(limit));
    }

    for (u64 d = 1; d <= limit; ++d)
        for (u64 m = d; m <= limit; m += d) ++t.tau[m];

    auto& spf = t.smallest_prime_factor;
    t.mobius[1] = 1;
    for (u64 i = 2; i <= limit; ++i) {
        if (spf[i] == 0) {
            spf[i] = std::uint32_t(i);
            t.primes.push_back(std::uint32_t(i));
            t.mobius[i] = -1;
            t.omega[i] = 1;
        }
        for (std::uint32_t p : t.primes) {
            u64 m = i * p;
            if (p > spf[i] || m > limit) break;
            spf[m] = p;
            if (p == spf[i]) {
                t.mobius[m] = 0;
                t.omega[m] = t.omega[i];
            } else {
                t.mobius[m] = std::int8_t(-t.mobius[i]);
                t.omega[m] = std::uint8_t(t.omega[i] + 1);
            }
        }
    }
    return t;
}

inline std::vector<std::uint32_t> primes_up_to(u64 n) {
    std::vector<std::uint32_t> out;
    if (n < 2) return out;
    std::vector<bool> composite(n + 1, false);
    for (u64 i = 2; i <= n; ++i) {
        if (composite[i]) continue;
        out.push_back(std::uint32_t(i));
        for (u64 j = i * i; j <= n; j += i) composite[j] = true;
    }
    return out;
}

struct Factorization {
    u64 value = 1;
    std::vector<std::pair<u64, unsigned>> factors;

    u64 tau() const {
        u64 r = 1;
        for (auto& [p, e] : factors) r *= e + 1;
        return r;
    }
    unsigned omega() const { return unsigned(factors.size()); }
    int mobius() const {
        for (auto& [p, e] : factors)
            if (e > 1) return 0;
        return factors.size() % 2 ? -1 : 1;
    }
    unsigned valuation(u64 p) const {
        for (auto& [q, e] : factors)
            if (q == p) return e;
        return 0;
    }
};

// trial division, independent of any table
inline Factorization factorize_trial(u64 n) {
    if (n == 0) throw DomainError("factorize: n = 0");
    Factorization f;
    f.value = n;
    for (u64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p) continue;
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        f.factors.push_back({p, e});
    }
    if (n > 1) f.factors.push_back({n, 1});
    return f;
}

// table lookup up to tables.limit; beyond it, trial division by the
// tabulated primes, which needs limit^2 >= n
inline Factorization factorize(u64 n, const ArithTables& t) {
    if (n == 0) throw DomainError("factorize: n = 0");
    Factorization f;
    f.value = n;
    if (n <= t.limit) {
        while (n > 1) {
            u64 p = t.smallest_prime_factor[n];
            unsigned e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            f.factors.push_back({p, e});
        }
        return f;
    }
    if (u128(t.limit) * t.limit < n)
        throw SizeError("factorize: " + std::to_string(n) + " is beyond the trial-division range of tables with limit " +
                        std::to_string(t.limit));
    for (u64 p : t.primes) {
        if (p * p > n) break;
        if (n % p) continue;
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        f.factors.push_back({p, e});
        if (n <= t.limit) {
            Factorization rest = factorize(n, t);
            f.factors.insert(f.factors.end(), rest.factors.begin(), rest.factors.end());
            return f;
        }
    }
    if (n > 1) f.factors.push_back({n, 1});
    return f;
}

inline u64 tau_of(u64 n, const ArithTables& t) {
    if (n >= 1 && n <= t.limit) return t.tau[n];
    return factorize(n, t).tau();
}

inline std::vector<u64> divisors(const Factorization& f) {
    std::vector<u64> out{1};
    for (auto& [p, e] : f.factors) {
        std::size_t k = out.size();
        u64 pk = 1;
        for (unsigned j = 1; j <= e; ++j) {
            pk *= p;
            for (std::size_t i = 0; i < k; ++i) out.push_back(out[i] * pk);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<u64> divisors_of(u64 n) { return divisors(factorize_trial(n)); }

inline Factorization merge(const Factorization& a, const Factorization& b) {
    Factorization r;
    r.value = a.value * b.value;
    std::size_t i = 0, j = 0;
    while (i < a.factors.size() || j < b.factors.size()) {
        if (j == b.factors.size() || (i < a.factors.size() && a.factors[i].first < b.factors[j].first))
            r.factors.push_back(a.factors[i++]);
        else if (i == a.factors.size() || b.factors[j].first < a.factors[i].first)
            r.factors.push_back(b.factors[j++]);
        else {
            r.factors.push_back({a.factors[i].first, a.factors[i].second + b.factors[j].second});
            ++i;
            ++j;
        }
    }
    return r;
}

// ---- arithmetic functions on triples of positive integers ----

struct TripleArithFunction {
    std::function<Rational(const Triple&)> evaluator;
    bool multiplicative = false;

    Rational operator()(const Triple& d) const { return evaluator(d); }
};

inline TripleArithFunction unit_triple() {
    return {[](const Triple& d) { return Rational(d[0] == 1 && d[1] == 1 && d[2] == 1 ? 1 : 0); }, true};
}

inline TripleArithFunction one_triple() {
    return {[](const Triple&) { return Rational(1); }, true};
}

inline TripleArithFunction mobius_triple() {
    return {[](const Triple& d) {
                return Rational(factorize_trial(u64(d[0])).mobius() * factorize_trial(u64(d[1])).mobius() *
                                factorize_trial(u64(d[2])).mobius());
            },
            true};
}

inline void check_positive(const Triple& d, const char* who) {
    if (d[0] < 1 || d[1] < 1 || d[2] < 1) throw DomainError(std::string(who) + ": components must be >= 1");
}

// sum over componentwise divisors e | d of F(e) G(d/e)
inline Rational dirichlet_convolve_triple(const TripleArithFunction& F, const TripleArithFunction& G,
                                          const Triple& d) {
    check_positive(d, "dirichlet_convolve_triple");
    std::array<std::vector<u64>, 3> divs;
    for (int i = 0; i < 3; ++i) divs[i] = divisors_of(u64(d[i]));
    Rational sum(0);
    for (u64 a : divs[0])
        for (u64 b : divs[1])
            for (u64 c : divs[2]) {
                Triple e{i64(a), i64(b), i64(c)};
                Triple r{d[0] / e[0], d[1] / e[1], d[2] / e[2]};
                Rational fe = F(e);
                if (fe == Rational(0)) continue;
                sum += fe * G(r);
            }
    return sum;
}

// h with f = 1 * h
inline TripleArithFunction moebius_invert_triple(TripleArithFunction f) {
    auto mu = mobius_triple();
    bool mult = f.multiplicative;
    return {[f = std::move(f), mu](const Triple& d) { return dirichlet_convolve_triple(mu, f, d); }, mult};
}

}  // namespace divforms
