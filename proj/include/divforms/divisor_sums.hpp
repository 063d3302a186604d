#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arith.hpp"
#include "errors.hpp"
#include "forms.hpp"
#include "lattice.hpp"
#include "parallel.hpp"
#include "region.hpp"
#include "singular_series.hpp"

namespace divforms {

struct SumResult {
    i128 value = 0;
    u64 points_visited = 0;
    double elapsed = 0;  // seconds
};

struct SumOptions {
    unsigned threads = 1;
    const ArithTables* tables = nullptr;  // reused when large enough
};

namespace detail {

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

// returns opt.tables if it covers `need`, else builds into `own`
inline const ArithTables& tables_for(u64 need, const SumOptions& opt, std::optional<ArithTables>& own) {
    if (opt.tables && opt.tables->limit >= need) return *opt.tables;
    own = build_tables(std::max<u64>(need, 2));
    return *own;
}

inline unsigned vp(u64 n, u64 p) {
    if (p == 2) return unsigned(__builtin_ctzll(n));
    unsigned v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

inline void accumulate(i128& a, const i128& b) { a += b; }
template <std::size_t N>
inline void accumulate(std::array<i128, N>& a, const std::array<i128, N>& b) {
    for (std::size_t i = 0; i < N; ++i) a[i] += b[i];
}

// Enumerates Lambda cap X*region cap extra row by row in reduced-basis
// coordinates. fn(x1, x2, acc) is called per point. Rows are split into
// fixed chunks whose partial results are reduced in order.
template <class Acc, class PointFn>
Acc reduce_points(const CongruenceLattice& L, const Region& region, i64 X, const std::vector<AbsHalfPlane>& extra,
                  unsigned threads, PointFn&& fn, u64* visited = nullptr) {
    auto sides = dilated_sides(region, X);
    LatticeWindow w = row_window(L, region, X);
    i64 rows = w.v2_hi - w.v2_lo + 1;
    std::size_t n_chunks = std::size_t(std::clamp<i64>(rows / 8, 1, 4096));
    std::vector<Acc> part(n_chunks, Acc{});
    std::vector<u64> seen(n_chunks, 0);
    const IVec &e1 = L.basis[0], &e2 = L.basis[1];
    parallel_chunks(n_chunks, threads, [&](std::size_t c) {
        i64 r0 = w.v2_lo + i64(c) * rows / i64(n_chunks);
        i64 r1 = w.v2_lo + i64(c + 1) * rows / i64(n_chunks);
        std::array<RowInterval, 4> iv;
        for (i64 v2 = r0; v2 < r1; ++v2) {
            int n = row_intervals(L, sides, extra, v2, iv);
            for (int k = 0; k < n; ++k)
                for (i128 v1 = iv[k].lo; v1 <= iv[k].hi; ++v1) {
                    i64 x1 = narrow64(v1 * e1.x + i128(v2) * e2.x, "lattice point");
                    i64 x2 = narrow64(v1 * e1.y + i128(v2) * e2.y, "lattice point");
                    fn(x1, x2, part[c]);
                    ++seen[c];
                }
        }
    });
    Acc total{};
    u64 pts = 0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        accumulate(total, part[c]);
        pts += seen[c];
    }
    if (visited) *visited = pts;
    return total;
}

}  // namespace detail

// ---- T(X; C) ----

// sum over 1 <= x1, x2 <= X of tau(L1(x) L2(x) L3(x)).
//
// tau of the product equals tau(n1) tau(n2) tau(n3) except at primes
// dividing two of the values; such a prime divides the discriminant or
// gcd(x1, x2). The sieve handles the product of the three tau values and
// those primes are corrected afterwards. If `factorwise` is given it
// receives sum tau(n1) tau(n2) tau(n3) over the same box.
inline SumResult T_of_X(i64 X, const FormTriple& forms, SumOptions opt = {}, i128* factorwise = nullptr) {
    if (X < 1) throw DomainError("T_of_X: X must be >= 1");
    if (!forms.all_nonnegative())
        throw DomainError("T_of_X: forms must be positive on (0,X]^2; use S_of with a sign policy otherwise");
    detail::Stopwatch clock;
    i64 maxc = 0;
    for (auto& f : forms.forms()) maxc = std::max(maxc, f.a + f.b);
    std::optional<ArithTables> own;
    const ArithTables& t = detail::tables_for(u64(maxc) * u64(X), opt, own);
    const auto* tau = t.tau.data();
    const auto& spf = t.smallest_prime_factor;

    std::vector<u64> bad;
    for (auto& [p, e] : factorize_trial(forms.delta()).factors) bad.push_back(p);
    const bool sym = forms.swap_symmetric();
    const std::array<i64, 3> A{forms[0].a, forms[1].a, forms[2].a}, B{forms[0].b, forms[1].b, forms[2].b};

    // factor tau(n1 n2 n3) / prod tau(n_i) as num/den over the given primes
    auto correction = [&](const std::array<u64, 3>& n, const u64* primes, std::size_t count, u64& num, u64& den) {
        num = den = 1;
        for (std::size_t j = 0; j < count; ++j) {
            u64 q = primes[j];
            unsigned v0 = n[0] % q ? 0 : detail::vp(n[0], q);
            unsigned v1 = n[1] % q ? 0 : detail::vp(n[1], q);
            unsigned v2 = n[2] % q ? 0 : detail::vp(n[2], q);
            num *= v0 + v1 + v2 + 1;
            den *= u64(v0 + 1) * (v1 + 1) * (v2 + 1);
        }
    };

    const i64 chunk = 32;
    std::size_t n_chunks = std::size_t((X + chunk - 1) / chunk);
    std::vector<i128> total(n_chunks, 0), base_total(n_chunks, 0);
    parallel_chunks(n_chunks, opt.threads, [&](std::size_t c) {
        std::vector<u64> ps, cand;
        for (i64 x1 = i64(c) * chunk + 1; x1 <= std::min<i64>(X, i64(c + 1) * chunk); ++x1) {
            i64 lo = sym ? x1 : 1;
            ps.clear();
            for (u64 m = u64(x1); m > 1;) {
                u64 p = spf[m];
                ps.push_back(p);
                while (m % p == 0) m /= p;
            }
            // base: product of the three tau values
            u64 diag = 0, off = 0;
            {
                const auto* p0 = tau + (A[0] * x1 + B[0] * lo);
                const auto* p1 = tau + (A[1] * x1 + B[1] * lo);
                const auto* p2 = tau + (A[2] * x1 + B[2] * lo);
                i64 len = X - lo + 1;
                if (sym) {
                    diag = u64(p0[0]) * p1[0] * p2[0];
                    for (i64 k = 1; k < len; ++k) off += u64(p0[k * B[0]]) * p1[k * B[1]] * p2[k * B[2]];
                } else {
                    for (i64 k = 0; k < len; ++k) off += u64(p0[k * B[0]]) * p1[k * B[1]] * p2[k * B[2]];
                }
            }
            i128 base = sym ? i128(diag) + 2 * i128(off) : i128(off);
            i128 delta = 0;
            auto visit = [&](i64 x2, const u64* primes, std::size_t count) {
                std::array<u64, 3> n{u64(A[0] * x1 + B[0] * x2), u64(A[1] * x1 + B[1] * x2), u64(A[2] * x1 + B[2] * x2)};
                u64 num, den;
                correction(n, primes, count, num, den);
                if (num == den) return;
                u64 b = u64(tau[n[0]]) * tau[n[1]] * tau[n[2]];
                i128 d = i128(b / den * num) - i128(b);
                delta += (sym && x2 != x1) ? 2 * d : d;
            };
            if (bad.empty()) {
                for (std::size_t idx = 0; idx < ps.size(); ++idx) {
                    u64 p = ps[idx];
                    i64 start = ((lo + i64(p) - 1) / i64(p)) * i64(p);
                    for (i64 x2 = start; x2 <= X; x2 += i64(p)) {
                        bool earlier = false;
                        for (std::size_t j = 0; j < idx && !earlier; ++j) earlier = u64(x2) % ps[j] == 0;
                        if (earlier) continue;
                        cand.clear();
                        for (std::size_t j = idx; j < ps.size(); ++j)
                            if (u64(x2) % ps[j] == 0) cand.push_back(ps[j]);
                        visit(x2, cand.data(), cand.size());
                    }
                }
            } else {
                for (i64 x2 = lo; x2 <= X; ++x2) {
                    cand = bad;
                    for (u64 p : ps)
                        if (u64(x2) % p == 0 && std::find(bad.begin(), bad.end(), p) == bad.end()) cand.push_back(p);
                    visit(x2, cand.data(), cand.size());
                }
            }
            total[c] += base + delta;
            base_total[c] += base;
        }
    });
    SumResult r;
    i128 fw = 0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        r.value += total[c];
        fw += base_total[c];
    }
    if (factorwise) *factorwise = fw;
    r.points_visited = u64(X) * u64(X);
    r.elapsed = clock.seconds();
    return r;
}

// ---- S(X; d, D) ----

struct ValuePolicy {
    bool skip_zeros = false;       // drop points where some L_i vanishes
    bool absolute_values = false;  // tau(-n) = tau(n)
};

struct SumSpec {
    FormTriple forms;
    Region region;
    i64 X = 1;
    Triple d{1, 1, 1};
    Triple D{1, 1, 1};
    ValuePolicy policy;
};

namespace detail {

inline void validate(const SumSpec& s) {
    if (s.X < 1) throw DomainError("sum: X must be >= 1");
    check_positive(s.d, "sum");
    check_positive(s.D, "sum");
    for (int i = 0; i < 3; ++i)
        if (s.D[i] % s.d[i] != 0) throw DomainError("sum: d_i must divide D_i");
    if (!s.policy.absolute_values && min_form_value(s.forms, s.region) < Rational(0))
        throw DomainError("sum: a form takes negative values on the region (vertex check)");
}

inline u64 max_form_value(const FormTriple& forms, const Region& region, i64 X) {
    long double m = 0;
    for (auto& piece : region.pieces)
        for (auto& v : piece.vertices)
            for (int i = 0; i < 3; ++i)
                m = std::max(m, std::fabs((Rational(forms[i].a) * v.x + Rational(forms[i].b) * v.y).to_ld()));
    return u64(std::ceil(m * X)) + 1;
}

}  // namespace detail

inline SumResult S_of(const SumSpec& spec, SumOptions opt = {}) {
    detail::validate(spec);
    detail::Stopwatch clock;
    std::optional<ArithTables> own;
    const ArithTables& t = detail::tables_for(detail::max_form_value(spec.forms, spec.region, spec.X), opt, own);
    CongruenceLattice L = lattice_of(spec.D, spec.forms);
    SumResult r;
    r.value = detail::reduce_points<i128>(
        L, spec.region, spec.X, {}, opt.threads,
        [&](i64 x1, i64 x2, i128& acc) {
            u64 prod = 1;
            for (int i = 0; i < 3; ++i) {
                i128 n = spec.forms[i](x1, x2);
                if (n == 0) {
                    if (spec.policy.skip_zeros) return;
                    throw DomainError("S_of: L" + std::to_string(i + 1) + " vanishes at (" + std::to_string(x1) + ", " +
                                      std::to_string(x2) + "); pass skip_zeros to drop such points");
                }
                if (n < 0) {
                    if (!spec.policy.absolute_values) throw DomainError("S_of: negative form value");
                    n = -n;
                }
                if (n % spec.d[i] != 0) throw InvariantViolation("S_of: d_i does not divide L_i on the lattice");
                prod *= tau_of(u64(n / spec.d[i]), t);
            }
            acc += prod;
        },
        &r.points_visited);
    r.elapsed = clock.seconds();
    return r;
}

// ---- small and large divisors ----

// tau_plus = #{d | n : d^2 <= t2}, tau_minus = #{e | n : e^2 t2 < n^2}
// where t2 = threshold^2
inline std::pair<u64, u64> tau_pm_split(u64 n, const Rational& threshold_sq) {
    if (n < 1) throw DomainError("tau_pm_split: n must be >= 1");
    u64 plus = 0, minus = 0;
    for (u64 d : divisors(factorize_trial(n))) {
        if (i128(d) * d * threshold_sq.den() <= i128(threshold_sq.num())) ++plus;
        if (i128(d) * d * threshold_sq.num() < i128(n) * n * threshold_sq.den()) ++minus;
    }
    return {plus, minus};
}

inline std::pair<u64, u64> tau_pm_split(u64 n, long double threshold) {
    if (n < 1) throw DomainError("tau_pm_split: n must be >= 1");
    u64 plus = 0, minus = 0;
    for (u64 d : divisors(factorize_trial(n))) {
        if ((long double)d <= threshold) ++plus;
        if ((long double)d * threshold < (long double)n) ++minus;
    }
    return {plus, minus};
}

struct EightWaySum {
    std::array<SumResult, 8> parts;  // bit i of the index set: minus sign for form i
    Rational x_prime;                // r' X, the squared threshold
    i128 total = 0;

    static std::string label(std::size_t k) {
        std::string s;
        for (int i = 0; i < 3; ++i) {
            if (i) s += ',';
            s += (k >> i) & 1 ? '-' : '+';
        }
        return s;
    }
};

inline EightWaySum eight_way_sum(i64 X, const FormTriple& forms, const Region& region, SumOptions opt = {},
                                 ValuePolicy policy = {}) {
    SumSpec spec{forms, region, X, {1, 1, 1}, {1, 1, 1}, policy};
    detail::validate(spec);
    detail::Stopwatch clock;
    EightWaySum out;
    out.x_prime = r_prime(forms, region) * Rational(X);
    CongruenceLattice L = lattice_of({1, 1, 1}, forms);
    u64 visited = 0;
    auto acc = detail::reduce_points<std::array<i128, 8>>(
        L, region, X, {}, opt.threads,
        [&](i64 x1, i64 x2, std::array<i128, 8>& a) {
            std::array<std::pair<u64, u64>, 3> pm;
            for (int i = 0; i < 3; ++i) {
                i128 n = forms[i](x1, x2);
                if (n == 0) {
                    if (policy.skip_zeros) return;
                    throw DomainError("eight_way_sum: a form vanishes on the region; pass skip_zeros");
                }
                if (n < 0) {
                    if (!policy.absolute_values) throw DomainError("eight_way_sum: negative form value");
                    n = -n;
                }
                pm[i] = tau_pm_split(u64(n), out.x_prime);
            }
            for (std::size_t k = 0; k < 8; ++k) {
                u64 v = 1;
                for (int i = 0; i < 3; ++i) v *= (k >> i) & 1 ? pm[i].second : pm[i].first;
                a[k] += v;
            }
        },
        &visited);
    for (std::size_t k = 0; k < 8; ++k) {
        out.parts[k].value = acc[k];
        out.parts[k].points_visited = visited;
        out.total += acc[k];
    }
    double el = clock.seconds();
    for (auto& p : out.parts) p.elapsed = el;
    return out;
}

// ---- tau(n1 n2 n3) as a sum over e ----

// direct value from the merged factorisations
inline u64 tau_of_product(const Triple& n) {
    check_positive(n, "tau_of_product");
    Factorization f = merge(merge(factorize_trial(u64(n[0])), factorize_trial(u64(n[1]))), factorize_trial(u64(n[2])));
    return f.tau();
}

// sum over e with e_i e_j | n_k of
//   mu(e1 e2) mu(e3) / 2^(omega(gcd(e1,n1)) + omega(gcd(e2,n2)))
//     * tau(n1/(e2 e3)) tau(n2/(e1 e3)) tau(n3/(e1 e2))
inline i128 tau_product_identity(const Triple& n) {
    check_positive(n, "tau_product_identity");
    auto tau = [](i64 m) { return i64(factorize_trial(u64(m)).tau()); };
    auto mu = [](i64 m) { return factorize_trial(u64(m)).mobius(); };
    auto om = [](i64 m) { return factorize_trial(u64(m)).omega(); };
    Rational sum(0);
    for (u64 e1 : divisors_of(u64(std::gcd(n[1], n[2]))))
        for (u64 e2 : divisors_of(u64(std::gcd(n[0], n[2])))) {
            i64 e12 = i64(e1 * e2);
            if (n[2] % e12 != 0) continue;
            int m12 = mu(e12);
            if (m12 == 0) continue;
            for (u64 e3 : divisors_of(u64(std::gcd(n[0], n[1])))) {
                if (n[0] % i64(e2 * e3) != 0 || n[1] % i64(e1 * e3) != 0) continue;
                int m3 = mu(i64(e3));
                if (m3 == 0) continue;
                unsigned w = om(std::gcd(i64(e1), n[0])) + om(std::gcd(i64(e2), n[1]));
                i64 val = tau(n[0] / i64(e2 * e3)) * tau(n[1] / i64(e1 * e3)) * tau(n[2] / e12);
                sum += Rational(m12 * m3 * val, i64(1) << w);
            }
        }
    if (!sum.is_integer()) throw InvariantViolation("tau_product_identity: non-integer total " + sum.str());
    return sum.num();
}

// ---- triple correlations ----

// sum_{1 <= n <= X, n != h} tau(|n-h|) tau(n) tau(n+h)
inline SumResult T_h_direct(i64 X, i64 h, const ArithTables& t) {
    if (h < 1) throw DomainError("T_h_direct: h must be >= 1");
    if (X < 1) throw DomainError("T_h_direct: X must be >= 1");
    if (u64(X + h) > t.limit) throw SizeError("T_h_direct: X + h exceeds the table limit " + std::to_string(t.limit));
    detail::Stopwatch clock;
    SumResult r;
    const auto* tau = t.tau.data();
    for (i64 n = 1; n <= X; ++n) {
        if (n == h) continue;
        r.value += u64(tau[n > h ? n - h : h - n]) * tau[n] * tau[n + h];
        ++r.points_visited;
    }
    r.elapsed = clock.seconds();
    return r;
}

// sum_{h <= H} T_h(X)
inline SumResult sigma1(i64 X, i64 H, const ArithTables& t, unsigned threads = 1) {
    if (X < 1 || H < 1) throw DomainError("sigma1: X and H must be >= 1");
    if (u64(X + H) > t.limit) throw SizeError("sigma1: X + H exceeds the table limit " + std::to_string(t.limit));
    detail::Stopwatch clock;
    const i64 chunk = 16;
    std::size_t n_chunks = std::size_t((H + chunk - 1) / chunk);
    std::vector<i128> part(n_chunks, 0);
    const auto* tau = t.tau.data();
    parallel_chunks(n_chunks, threads, [&](std::size_t c) {
        for (i64 h = i64(c) * chunk + 1; h <= std::min<i64>(H, i64(c + 1) * chunk); ++h) {
            u64 s = 0;
            for (i64 n = 1; n < std::min(h, X + 1); ++n) s += u64(tau[h - n]) * tau[n] * tau[n + h];
            for (i64 n = h + 1; n <= X; ++n) s += u64(tau[n - h]) * tau[n] * tau[n + h];
            part[c] += s;
        }
    });
    SumResult r;
    for (auto& p : part) r.value += p;
    r.points_visited = u64(X) * u64(H);
    r.elapsed = clock.seconds();
    return r;
}

struct AveragedCorrelation {
    i64 X = 0, H = 0;
    i128 sigma1 = 0;
    long double weight_sum = 0;           // S(H) = sum_{h <= H} f(h)
    long double sigma2_predicted = 0;     // c_1 X (log X)^3 S(H)
    long double average_prediction = 0;  // c X H (log X)^3
    long double ratio = 0;               // sigma1 / average_prediction
};

inline long double correlation_weight_sum(u64 H) {
    auto t = build_tables(std::max<u64>(H, 2));
    std::vector<long double> f(H + 1, 1.0L);
    CompensatedSum s;
    for (u64 n = 1; n <= H; ++n) {
        if (n > 1) {
            u64 p = t.smallest_prime_factor[n], m = n;
            unsigned v = 0;
            while (m % p == 0) {
                m /= p;
                ++v;
            }
            f[n] = f[m] * f_prime_power_ld(p, v);
        }
        s.add(f[n]);
    }
    return s.value();
}

inline AveragedCorrelation sigma1_sigma2(i64 X, i64 H, const ArithTables& t, u64 prime_cut = 100'000,
                                         unsigned threads = 1) {
    AveragedCorrelation a;
    a.X = X;
    a.H = H;
    a.sigma1 = sigma1(X, H, t, threads).value;
    a.weight_sum = correlation_weight_sum(u64(H));
    long double L = std::log((long double)X);
    a.sigma2_predicted = c_h(1, prime_cut).value * X * L * L * L * a.weight_sum;
    a.average_prediction = averaged_correlation_constant(prime_cut).value * X * (long double)H * L * L * L;
    a.ratio = (long double)a.sigma1 / a.average_prediction;
    return a;
}

// ---- M(T) ----

inline constexpr u64 kBoxBudget = 200'000'000;

struct DensityMass {
    long double value = 0;
    std::optional<Rational> exact;
};

// sum over d_i <= T_i of rho(d) / (d1 d2 d3)^2
inline DensityMass M_of_T(const std::array<long double, 3>& T, const FormTriple& forms, const ArithTables& t,
                          unsigned threads = 1, u64 budget = kBoxBudget) {
    std::array<i64, 3> M;
    for (int i = 0; i < 3; ++i) {
        if (!(T[i] >= 1)) throw DomainError("M_of_T: T_i must be >= 1");
        M[i] = i64(std::floor(T[i]));
    }
    if (u128(M[0]) * M[1] * M[2] > budget) throw SizeError("M_of_T: box exceeds the enumeration budget");
    if (u64(std::max({M[0], M[1], M[2]})) > t.limit) throw SizeError("M_of_T: T exceeds the table limit");
    std::vector<long double> part(M[0], 0);
    std::vector<std::optional<Rational>> exact(M[0]);
    parallel_chunks(std::size_t(M[0]), threads, [&](std::size_t c) {
        i64 d1 = i64(c) + 1;
        CompensatedSum s;
        std::optional<Rational> q = Rational(0);
        for (i64 d2 = 1; d2 <= M[1]; ++d2)
            for (i64 d3 = 1; d3 <= M[2]; ++d3) {
                i128 r = rho({d1, d2, d3}, forms, t);
                i128 h = i128(d1) * d2 * d3;
                s.add((long double)r / ((long double)h * (long double)h));
                if (q) {
                    try {
                        i128 g = gcd128(r, h * h);
                        *q += Rational::from_i128(r / g, h * h / g);
                    } catch (const SizeError&) {
                        q.reset();
                    }
                }
            }
        part[c] = s.value();
        exact[c] = q;
    });
    DensityMass out;
    CompensatedSum s;
    std::optional<Rational> q = Rational(0);
    for (std::size_t c = 0; c < part.size(); ++c) {
        s.add(part[c]);
        if (q && exact[c]) {
            try {
                *q += *exact[c];
            } catch (const SizeError&) {
                q.reset();
            }
        } else {
            q.reset();
        }
    }
    out.value = s.value();
    out.exact = q;
    return out;
}

// ---- level of distribution ----

enum class RegionFamily {
    constant,     // R_d = R
    large_third,  // R_d = {x in R : d3 sqrt(X') < L3(x)}
};

struct DiscrepancyReport {
    i64 X = 0;
    std::array<long double, 3> Q{};
    long double total_discrepancy = 0;
    long double main_scale = 0;  // X^(7/4)
    u64 terms = 0;
};

inline DiscrepancyReport lod_discrepancy(i64 X, const std::array<long double, 3>& Q, const FormTriple& forms,
                                         const Region& region, RegionFamily family = RegionFamily::large_third,
                                         unsigned threads = 1) {
    if (X < 1) throw DomainError("lod_discrepancy: X must be >= 1");
    std::array<i64, 3> M;
    for (int i = 0; i < 3; ++i) {
        if (!(Q[i] >= 1)) throw DomainError("lod_discrepancy: Q_i must be >= 1");
        M[i] = i64(std::floor(Q[i]));
    }
    if (u128(M[0]) * M[1] * M[2] > kBoxBudget) throw SizeError("lod_discrepancy: moduli box exceeds the budget");
    Rational xp = r_prime(forms, region) * Rational(X);
    const LinearForm& L3 = forms[2];
    std::vector<long double> part(M[0], 0);
    parallel_chunks(std::size_t(M[0]), threads, [&](std::size_t c) {
        i64 d1 = i64(c) + 1;
        CompensatedSum s;
        for (i64 d2 = 1; d2 <= M[1]; ++d2)
            for (i64 d3 = 1; d3 <= M[2]; ++d3) {
                CongruenceLattice L = lattice_of({d1, d2, d3}, forms);
                std::vector<AbsHalfPlane> extra;
                std::vector<RealHalfPlane> cuts;
                if (family == RegionFamily::large_third) {
                    // integer L3 > d3 sqrt(X')  <=>  L3 >= floor(sqrt(d3^2 X')) + 1
                    u128 sq = u128(i128(d3) * d3 * xp.num() / xp.den());
                    i128 floor_root = isqrt(sq);
                    extra.push_back({-L3.a, -L3.b, -(floor_root + 1)});
                    long double thr = (long double)d3 * std::sqrt(xp.to_ld());
                    cuts.push_back({-(long double)L3.a, -(long double)L3.b, -thr});
                }
                i128 count = count_points(L, region, X, extra);
                long double vol = dilated_volume(region, X, cuts);
                s.add(std::fabs((long double)count - vol / (long double)L.determinant));
            }
        part[c] = s.value();
    });
    DiscrepancyReport r;
    r.X = X;
    r.Q = Q;
    CompensatedSum s;
    for (auto v : part) s.add(v);
    r.total_discrepancy = s.value();
    r.main_scale = std::pow((long double)X, 1.75L);
    r.terms = u64(M[0]) * M[1] * M[2];
    return r;
}

// ---- T(X) through the e-summation ----

// sum over |e| <= X, k | e1 e2 of mu(e1 e2) mu(e3) mu(k) / 2^omega(k) S(X; d, D)
// with d = (e2 e3, e1 e3, e1 e2), D = ([e2 e3, k], [e1 e3, k], e1 e2) over
// (0, 1]^2; equals T(X) exactly
inline i128 T_via_reduction(i64 X, const FormTriple& forms, SumOptions opt = {}) {
    if (!forms.all_nonnegative()) throw DomainError("T_via_reduction: forms must have nonnegative coefficients");
    Region box = Region::positive_unit_square();
    i64 maxc = 0;
    for (auto& f : forms.forms()) maxc = std::max(maxc, f.a + f.b);
    std::optional<ArithTables> own;
    const ArithTables& t = detail::tables_for(u64(maxc * X) + 1, opt, own);
    SumOptions inner{1, &t};
    Rational sum(0);
    for (i64 e1 = 1; e1 <= X; ++e1)
        for (i64 e2 = 1; e2 <= X; ++e2) {
            int m12 = factorize(u64(e1 * e2), t).mobius();
            if (m12 == 0) continue;
            if (e1 * e2 > maxc * X) continue;
            for (i64 e3 = 1; e3 <= X; ++e3) {
                // a positive form value below maxc X has no divisor above it
                if (e2 * e3 > maxc * X || e1 * e3 > maxc * X) break;
                int m3 = factorize(u64(e3), t).mobius();
                if (m3 == 0) continue;
                for (u64 k : divisors(factorize(u64(e1 * e2), t))) {
                    Factorization fk = factorize(k, t);
                    Triple d{e2 * e3, e1 * e3, e1 * e2};
                    Triple D{std::lcm(e2 * e3, i64(k)), std::lcm(e1 * e3, i64(k)), e1 * e2};
                    i128 s = S_of({forms, box, X, d, D, {}}, inner).value;
                    if (s == 0) continue;
                    sum += Rational(i64(m12 * m3 * fk.mobius()) * narrow64(s), i64(1) << fk.omega());
                }
            }
        }
    if (!sum.is_integer()) throw InvariantViolation("T_via_reduction: non-integer total " + sum.str());
    return sum.num();
}

// Leading constant of T(X) / (X^2 (log X)^3) predicted by the e-summation:
// each S(X; d, D) has leading constant prod_p sigma_p(d, D), and the
// weights are multiplicative, so the constant is the Euler product of the
// local sums over the p-parts of (e, k).
inline LocalFactor reduction_local_factor(u64 p, const FormTriple& forms) {
    long double total = 0, err = 0;
    i64 P = i64(p);
    for (int a1 = 0; a1 <= 1; ++a1)
        for (int a2 = 0; a2 <= 1 - a1; ++a2)
            for (int a3 = 0; a3 <= 1; ++a3)
                for (int kk = 0; kk <= a1 + a2; ++kk) {
                    i64 e1 = a1 ? P : 1, e2 = a2 ? P : 1, e3 = a3 ? P : 1, k = kk ? P : 1;
                    Triple d{e2 * e3, e1 * e3, e1 * e2};
                    Triple D{std::lcm(e2 * e3, k), std::lcm(e1 * e3, k), e1 * e2};
                    long double w = ((a1 + a2 + a3) % 2 ? -1.0L : 1.0L) * (kk ? -0.5L : 1.0L);
                    LocalFactor f = sigma_p_general(p, d, D, forms);
                    total += w * f.value;
                    err += std::fabs(w) * f.truncation_error;
                }
    return {p, total, std::nullopt, FactorMethod::truncated_sum, err, 0};
}

inline EulerProduct reduction_constant(const FormTriple& forms, u64 prime_cut) {
    return euler_product([&](u64 p) { return reduction_local_factor(p, forms); }, prime_cut, TailModel{-3.0L, 3.0L});
}

}  // namespace divforms
