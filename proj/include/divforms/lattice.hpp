#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "arith.hpp"
#include "errors.hpp"
#include "forms.hpp"
#include "region.hpp"

namespace divforms {

struct IVec {
    i64 x = 0, y = 0;
    friend bool operator==(const IVec&, const IVec&) = default;
};

inline i128 dot(const IVec& u, const IVec& v) { return i128(u.x) * v.x + i128(u.y) * v.y; }
inline i64 sup_norm(const IVec& v) { return std::max(v.x < 0 ? -v.x : v.x, v.y < 0 ? -v.y : v.y); }

struct CongruenceLattice {
    Triple moduli{1, 1, 1};
    std::array<IVec, 2> basis{};  // reduced, |e1| <= |e2| in the sup norm
    i64 hnf_alpha = 1, hnf_beta = 0, hnf_gamma = 1;  // basis {(alpha, beta), (0, gamma)}
    i128 determinant = 1;
    i128 rho = 1;
    i64 delta_div = 1;

    bool contains(const FormTriple& forms, i128 x1, i128 x2) const {
        for (int i = 0; i < 3; ++i)
            if (forms[i](x1, x2) % moduli[i] != 0) return false;
        return true;
    }
};

// moduli are kept below this so that products of residues fit in 128 bits
inline constexpr i64 kModulusLimit = i64(1) << 61;

struct Hnf {
    i64 alpha, beta, gamma;
};

namespace detail {

// merge y = r (mod m) with y = r2 (mod m2); false when incompatible
inline bool crt_merge(i128& r, i128& m, i128 r2, i128 m2) {
    i128 g = gcd128(m, m2);
    if ((r2 - r) % g != 0) return false;
    i128 m2g = m2 / g;
    i128 t = mod_floor((r2 - r) / g, m2g) * inv_mod((m / g) % m2g, m2g) % m2g;
    i128 l = m * m2g;
    r = mod_floor(r + m * t, l);
    m = l;
    return true;
}

inline std::map<u64, unsigned> lcm_factorization(const Triple& D) {
    std::map<u64, unsigned> f;
    for (i64 d : D)
        for (auto& [p, e] : factorize_trial(u64(d)).factors) f[p] = std::max(f[p], e);
    return f;
}

}  // namespace detail

// Hermite form of Lambda(D) = {x : D_i | L_i(x)}. gamma is the least
// positive y with (0, y) in the lattice; alpha the least positive x1 that
// extends to a lattice vector (it divides lcm D_i since (lcm, 0) is in it);
// beta the matching x2 modulo gamma.
inline Hnf hnf_of(const Triple& D, const FormTriple& forms) {
    check_positive(D, "lattice_of");
    for (i64 d : D)
        if (d >= kModulusLimit) throw SizeError("lattice modulus " + std::to_string(d) + " exceeds 2^61");
    std::array<i128, 3> g{}, step{}, inv{};
    i128 gamma = 1;
    for (int i = 0; i < 3; ++i) {
        g[i] = gcd128(forms[i].b, D[i]);
        step[i] = D[i] / g[i];
        inv[i] = inv_mod((forms[i].b / g[i]) % step[i], step[i]);
        gamma = gamma / gcd128(gamma, step[i]) * step[i];
        if (gamma >= kModulusLimit) throw SizeError("lattice index exceeds 2^61");
    }
    auto solve = [&](i128 x, i128& y) {
        i128 r = 0, m = 1;
        for (int i = 0; i < 3; ++i) {
            i128 ax = mod_floor(i128(forms[i].a) % D[i] * (x % D[i]), D[i]);
            if (ax % g[i] != 0) return false;
            i128 ri = mod_floor(-(ax / g[i]), step[i]) * inv[i] % step[i];
            if (!detail::crt_merge(r, m, ri, step[i])) return false;
        }
        y = r;
        return true;
    };
    auto f = detail::lcm_factorization(D);
    std::vector<u64> divs{1};
    for (auto& [p, e] : f) {
        std::size_t k = divs.size();
        u64 pk = 1;
        for (unsigned j = 1; j <= e; ++j) {
            pk *= p;
            for (std::size_t i = 0; i < k; ++i) divs.push_back(divs[i] * pk);
        }
    }
    std::sort(divs.begin(), divs.end());
    for (u64 x : divs) {
        i128 y;
        if (solve(x, y)) return {i64(x), i64(mod_floor(y, gamma)), i64(gamma)};
    }
    throw InvariantViolation("lattice_of: lcm of the moduli is not a lattice abscissa");
}

inline IVec canonical_sign(IVec v) {
    if (v.x < 0 || (v.x == 0 && v.y < 0)) return {-v.x, -v.y};
    return v;
}

inline bool lex_less(const IVec& a, const IVec& b) { return a.x != b.x ? a.x < b.x : a.y < b.y; }

// two-dimensional Gauss reduction, then canonical signs and ordering
inline std::array<IVec, 2> gauss_reduce(IVec u, IVec v) {
    auto sub = [](IVec a, IVec b, i128 m) {
        return IVec{narrow64(a.x - m * b.x, "basis"), narrow64(a.y - m * b.y, "basis")};
    };
    if (dot(u, u) > dot(v, v)) std::swap(u, v);
    while (true) {
        i128 uu = dot(u, u);
        i128 m = floor_div(2 * dot(u, v) + uu, 2 * uu);
        v = sub(v, u, m);
        if (dot(v, v) >= dot(u, u)) break;
        std::swap(u, v);
    }
    u = canonical_sign(u);
    v = canonical_sign(v);
    // equal-norm alternatives for the second vector: pick lexicographically least
    for (i128 s : {i128(-1), i128(1)}) {
        IVec w = canonical_sign(sub(v, u, s));
        if (dot(w, w) == dot(v, v) && lex_less(w, v)) v = w;
    }
    // equal norms: lexicographically larger first, so Z^2 gives (1,0), (0,1)
    if (dot(u, u) == dot(v, v) && lex_less(u, v)) std::swap(u, v);
    if (sup_norm(v) < sup_norm(u)) std::swap(u, v);
    return {u, v};
}

inline CongruenceLattice lattice_of(const Triple& D, const FormTriple& forms) {
    Hnf h = hnf_of(D, forms);
    CongruenceLattice L;
    L.moduli = D;
    L.hnf_alpha = h.alpha;
    L.hnf_beta = h.beta;
    L.hnf_gamma = h.gamma;
    L.determinant = i128(h.alpha) * h.gamma;
    i128 prod = checked_mul(checked_mul(D[0], D[1], "modulus product"), D[2], "modulus product");
    i128 sq = checked_mul(prod, prod, "squared modulus product");
    if (sq % L.determinant != 0) throw InvariantViolation("determinant does not divide (D1 D2 D3)^2");
    L.rho = sq / L.determinant;
    L.basis = gauss_reduce({h.alpha, h.beta}, {0, h.gamma});
    L.delta_div = i64(gcd128(gcd128(h.alpha, h.beta), h.gamma));
    return L;
}

// index of Lambda(D) in Z^2 without forming (D1 D2 D3)^2
inline i128 lattice_index(const Triple& D, const FormTriple& forms) {
    Hnf h = hnf_of(D, forms);
    return i128(h.alpha) * h.gamma;
}

// ---- densities ----

inline constexpr i64 kRhoBruteForceCap = 10'000;

// direct count over [0, h1 h2 h3)^2
inline i128 rho_bruteforce(const Triple& h, const FormTriple& forms, i64 cap = kRhoBruteForceCap) {
    check_positive(h, "rho_bruteforce");
    i128 H = i128(h[0]) * h[1] * h[2];
    if (H > cap) throw SizeError("rho_bruteforce: h1 h2 h3 = " + to_string(H) + " exceeds the cap " + std::to_string(cap));
    i128 count = 0;
    for (i64 x1 = 0; x1 < H; ++x1) {
        std::array<i64, 3> r, step;
        for (int i = 0; i < 3; ++i) {
            r[i] = i64(mod_floor(i128(forms[i].a) * x1, h[i]));
            step[i] = i64(mod_floor(forms[i].b, h[i]));
        }
        for (i64 x2 = 0; x2 < H; ++x2) {
            if (r[0] == 0 && r[1] == 0 && r[2] == 0) ++count;
            for (int i = 0; i < 3; ++i) {
                r[i] += step[i];
                if (r[i] >= h[i]) r[i] -= h[i];
            }
        }
    }
    return count;
}

// exponent r with rho(p^e) = p^r where rho is given in closed form at
// primes not dividing the discriminant: r = 2 e_min + e_mid + e_max
inline unsigned rho_good_exponent(const std::array<unsigned, 3>& e) {
    std::array<unsigned, 3> s = e;
    std::sort(s.begin(), s.end());
    return 2 * s[0] + s[1] + s[2];
}

// exponent for the progression triple at p = 2:
//   nu1+nu2+nu3+min nu         if min(nu1, nu3) <= nu2
//   nu1+2 nu2+nu3+1            otherwise
inline unsigned rho_progression_two_exponent(const std::array<unsigned, 3>& e) {
    if (std::min(e[0], e[2]) <= e[1]) return e[0] + e[1] + e[2] + std::min({e[0], e[1], e[2]});
    return e[0] + 2 * e[1] + e[2] + 1;
}

// smallest exponent of the upper bound p^(2e_i+e_j+e_k+min(e_j, v_p Delta)+min(e_k, v_p l_k))
// over the orderings e_i <= e_j <= e_k
inline unsigned rho_bad_bound_exponent(u64 p, const std::array<unsigned, 3>& e, const FormTriple& forms) {
    unsigned vd = valuation(forms.delta(), p);
    unsigned best = std::numeric_limits<unsigned>::max();
    std::array<int, 3> perm{0, 1, 2};
    do {
        unsigned ei = e[perm[0]], ej = e[perm[1]], ek = e[perm[2]];
        if (!(ei <= ej && ej <= ek)) continue;
        unsigned vl = valuation(u64(forms.content(perm[2])), p);
        best = std::min(best, 2 * ei + ej + ek + std::min(ej, vd) + std::min(ek, vl));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

enum class RhoMethod { closed_form, progression_two, residue_count, lattice_index };

struct RhoPower {
    unsigned exponent = 0;  // rho(p^e) = p^exponent
    RhoMethod method = RhoMethod::closed_form;
};

// rho(p^e) is always a power of p: the lattice has index a power of p
inline RhoPower rho_prime_power_exponent(u64 p, const std::array<unsigned, 3>& e, const FormTriple& forms,
                                         i64 residue_cap = kRhoBruteForceCap) {
    if (p < 2) throw DomainError("rho_prime_power: p must be prime");
    unsigned total = e[0] + e[1] + e[2];
    if (total == 0) return {0, RhoMethod::closed_form};
    if (p == 2 && forms == FormTriple::progression()) return {rho_progression_two_exponent(e), RhoMethod::progression_two};
    if (forms.delta() % p != 0) return {rho_good_exponent(e), RhoMethod::closed_form};

    unsigned emax = std::max({e[0], e[1], e[2]});
    i128 m = 1;
    bool small = true;
    for (unsigned k = 0; k < emax && small; ++k) {
        m *= p;
        if (m > residue_cap) small = false;
    }
    RhoPower out;
    i128 index;
    if (small) {
        // Lambda(p^e) is periodic modulo p^emax, so count one period
        Triple h{i64(ipow(p, e[0])), i64(ipow(p, e[1])), i64(ipow(p, e[2]))};
        i128 count = 0;
        for (i64 x1 = 0; x1 < m; ++x1)
            for (i64 x2 = 0; x2 < m; ++x2) {
                bool ok = true;
                for (int i = 0; i < 3 && ok; ++i) ok = forms[i](x1, x2) % h[i] == 0;
                count += ok;
            }
        index = m * m / count;
        out.method = RhoMethod::residue_count;
    } else {
        Triple h{};
        for (int i = 0; i < 3; ++i) {
            i128 q = 1;
            for (unsigned k = 0; k < e[i]; ++k) {
                q *= p;
                if (q >= kModulusLimit) throw SizeError("rho_prime_power: p^e exceeds 2^61");
            }
            h[i] = i64(q);
        }
        index = lattice_index(h, forms);
        out.method = RhoMethod::lattice_index;
    }
    unsigned vi = 0;
    while (index % p == 0) {
        index /= p;
        ++vi;
    }
    if (index != 1) throw InvariantViolation("lattice index at a prime power is not a power of p");
    out.exponent = 2 * total - vi;
    unsigned bound = rho_bad_bound_exponent(p, e, forms);
    if (out.exponent > bound)
        throw InvariantViolation("rho(" + std::to_string(p) + "^e) exceeds the prime-power upper bound");
    return out;
}

inline i128 rho_prime_power(u64 p, const std::array<unsigned, 3>& e, const FormTriple& forms,
                            i64 residue_cap = kRhoBruteForceCap) {
    return ipow(p, rho_prime_power_exponent(p, e, forms, residue_cap).exponent);
}

// multiplicative assembly over the primes of h1 h2 h3
inline i128 rho(const Triple& h, const FormTriple& forms, const ArithTables& tables) {
    check_positive(h, "rho");
    std::map<u64, std::array<unsigned, 3>> exps;
    for (int i = 0; i < 3; ++i)
        for (auto& [p, k] : factorize(u64(h[i]), tables).factors) exps[p][i] = k;
    i128 r = 1;
    for (auto& [p, e] : exps) r = checked_mul(r, rho_prime_power(p, e, forms), "rho");
    return r;
}

// ---- lattice points in dilated regions ----

struct RowInterval {
    i128 lo, hi;
};

struct LatticeWindow {
    i64 v2_lo = 0, v2_hi = -1;
};

// range of the second lattice coordinate covering X * region
inline LatticeWindow row_window(const CongruenceLattice& L, const Region& region, i64 X) {
    const IVec &e1 = L.basis[0], &e2 = L.basis[1];
    long double det = (long double)e1.x * e2.y - (long double)e2.x * e1.y;
    long double lo = std::numeric_limits<long double>::infinity(), hi = -lo;
    for (auto& piece : region.pieces)
        for (auto& v : piece.vertices) {
            long double x1 = v.x.to_ld() * X, x2 = v.y.to_ld() * X;
            long double v2 = (-(long double)e1.y * x1 + (long double)e1.x * x2) / det;
            lo = std::min(lo, v2);
            hi = std::max(hi, v2);
        }
    return {i64(std::floor(lo)) - 1, i64(std::ceil(hi)) + 1};
}

// merged v1-intervals of row v2 inside X * region, further cut by extra
inline int row_intervals(const CongruenceLattice& L, const std::vector<std::vector<AbsHalfPlane>>& piece_sides,
                         const std::vector<AbsHalfPlane>& extra, i64 v2, std::array<RowInterval, 4>& out) {
    const IVec &e1 = L.basis[0], &e2 = L.basis[1];
    int n = 0;
    for (auto& sides : piece_sides) {
        i128 lo = std::numeric_limits<i64>::min(), hi = std::numeric_limits<i64>::max();
        bool empty = false;
        auto apply = [&](const AbsHalfPlane& s) {
            i128 A = i128(s.a) * e1.x + i128(s.b) * e1.y;
            i128 B = i128(s.a) * e2.x + i128(s.b) * e2.y;
            i128 rhs = s.c - B * v2;
            if (A > 0) hi = std::min(hi, floor_div(rhs, A));
            else if (A < 0) lo = std::max(lo, ceil_div(rhs, A));
            else if (rhs < 0) empty = true;
        };
        for (auto& s : sides) apply(s);
        for (auto& s : extra) apply(s);
        if (empty || lo > hi) continue;
        out[n++] = {lo, hi};
    }
    if (n > 1) {
        std::sort(out.begin(), out.begin() + n, [](auto& a, auto& b) { return a.lo < b.lo; });
        int m = 0;
        for (int i = 1; i < n; ++i) {
            if (out[i].lo <= out[m].hi + 1) out[m].hi = std::max(out[m].hi, out[i].hi);
            else out[++m] = out[i];
        }
        n = m + 1;
    }
    return n;
}

inline std::vector<std::vector<AbsHalfPlane>> dilated_sides(const Region& region, i64 X) {
    std::vector<std::vector<AbsHalfPlane>> out;
    for (std::size_t i = 0; i < region.pieces.size(); ++i) out.push_back(region.absolute_sides(i, X));
    return out;
}

// # Lambda cap X*region cap {extra}
inline i128 count_points(const CongruenceLattice& L, const Region& region, i64 X,
                         const std::vector<AbsHalfPlane>& extra = {}) {
    auto sides = dilated_sides(region, X);
    LatticeWindow w = row_window(L, region, X);
    std::array<RowInterval, 4> iv;
    i128 total = 0;
    for (i64 v2 = w.v2_lo; v2 <= w.v2_hi; ++v2) {
        int n = row_intervals(L, sides, extra, v2, iv);
        for (int k = 0; k < n; ++k) total += iv[k].hi - iv[k].lo + 1;
    }
    return total;
}

// area of X*region cut by extra constraints given in absolute coordinates
// as real half-planes a x1 + b x2 <= c
struct RealHalfPlane {
    long double a, b, c;
};

inline long double dilated_volume(const Region& region, i64 X, const std::vector<RealHalfPlane>& cuts = {}) {
    long double total = 0;
    for (auto& piece : region.ld_pieces()) {
        std::vector<LPoint> poly;
        for (auto& v : piece) poly.push_back({v.x * X, v.y * X});
        for (auto& c : cuts) poly = clip(poly, c.a, c.b, c.c);
        if (poly.size() >= 3) total += area_of(poly);
    }
    return total;
}

}  // namespace divforms
