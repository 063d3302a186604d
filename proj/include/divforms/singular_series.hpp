#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "arith.hpp"
#include "errors.hpp"
#include "forms.hpp"
#include "lattice.hpp"
#include "rational.hpp"

namespace divforms {

enum class FactorMethod { closed_form, truncated_sum };

struct LocalFactor {
    u64 prime = 0;
    long double value = 1;
    std::optional<Rational> exact;
    FactorMethod method = FactorMethod::closed_form;
    long double truncation_error = 0;
    int nu_cap = 0;
};

inline LocalFactor exact_factor(u64 p, Rational v) {
    return {p, v.to_ld(), v, FactorMethod::closed_form, 0, 0};
}

// (1 + z + z^2) / ((1 - z)^2 (1 - z^2))
inline Rational S_of_z(const Rational& z) {
    if (!(z < Rational(1)) || !(z > Rational(-1))) throw DomainError("S_of_z: need |z| < 1, got " + z.str());
    Rational one(1);
    return (one + z + z * z) / ((one - z) * (one - z) * (one - z * z));
}

inline long double S_of_z(long double z) {
    if (!(std::fabs(z) < 1)) throw DomainError("S_of_z: need |z| < 1");
    return (1 + z + z * z) / ((1 - z) * (1 - z) * (1 - z * z));
}

// The local factor of the progression triple at 2, summed in closed form.
// Split nu-space by the two cases of the 2-adic density: where
// min(nu1, nu3) <= nu2 the weight is 2^(min nu - sum nu), as at a good
// prime; elsewhere it is 2^(1 - nu1 - nu3). The full good-prime sum is
// S(1/2); over nu2 < min(nu1, nu3) the good weight sums to sum_k 4^-k and
// the actual weight to 2 sum_k 4^-k.
inline Rational progression_factor_at_two() {
    Rational geometric = Rational(1) / (Rational(1) - Rational(1, 4));
    Rational series = S_of_z(Rational(1, 2)) - geometric + Rational(2) * geometric;
    return series * pow(Rational(1, 2), 3);
}

struct SigmaOptions {
    int nu_cap = 25;
    bool force_sum = false;             // skip the closed forms and sum the series
    bool adaptive = true;               // smallest cap whose tail bound meets target_error; nu_cap is ignored
    long double target_error = 1e-13L;  // below the 1e-12 contract
};

namespace detail {

// sum over s >= s0 of 6 (s+1)^2 z^s: bounds the number-weighted tail of
// z^(nu_mid + nu_max) over nu outside [0, s0 - 1]^3
inline long double sigma_tail(long double z, int s0) {
    long double total = 0, term;
    for (int s = s0;; ++s) {
        term = 6.0L * (s + 1) * (s + 1) * std::pow(z, s);
        total += term;
        if (term < 1e-40L || term < total * 1e-20L) break;
    }
    return total;
}

}  // namespace detail

// sigma_p(d, D) = (1 - 1/p)^3 sum_nu rho(p^N) / p^(2 N1 + 2 N2 + 2 N3),
// N_i = max(v_p(D_i), nu_i + v_p(d_i))
inline LocalFactor sigma_p_general(u64 p, const Triple& d, const Triple& D, const FormTriple& forms,
                                   SigmaOptions opt = {}) {
    check_positive(d, "sigma_p_general");
    check_positive(D, "sigma_p_general");
    for (int i = 0; i < 3; ++i)
        if (D[i] % d[i] != 0) throw DomainError("sigma_p_general: d_i must divide D_i");
    if (opt.nu_cap < 1) throw DomainError("sigma_p_general: nu_cap must be >= 1");

    // only the p-parts of d and D enter the local factor
    bool trivial = true;
    for (int i = 0; i < 3; ++i) trivial = trivial && u64(D[i]) % p != 0;
    bool good = forms.delta() % p != 0;
    if (trivial && !opt.force_sum) {
        if (good && p < (u64(1) << 31)) {
            Rational z(1, i64(p));
            return exact_factor(p, (Rational(1) + z + z * z) / (Rational(1) + z));
        }
        if (p == 2 && forms == FormTriple::progression()) return exact_factor(p, progression_factor_at_two());
    }

    std::array<unsigned, 3> vd, vD;
    for (int i = 0; i < 3; ++i) {
        vd[i] = valuation(u64(d[i]), p);
        vD[i] = valuation(u64(D[i]), p);
    }
    long double z = 1.0L / (long double)p;
    unsigned c = valuation(forms.delta(), p);
    unsigned vl = 0;
    for (int i = 0; i < 3; ++i) vl = std::max(vl, valuation(u64(forms.content(i)), p));
    long double scale = std::pow((long double)p, (long double)(c + vl));
    long double cube = std::pow(1 - z, 3);

    // lattice moduli must stay below 2^61 at bad primes
    int cap = opt.nu_cap;
    int hard_cap = 400;
    if (!good) {
        unsigned extra = std::max({vd[0], vd[1], vd[2], vD[0], vD[1], vD[2]});
        hard_cap = int(std::floor(60.0 / std::log2((double)p))) - int(extra);
        if (hard_cap < 1) throw SizeError("sigma_p_general: p^N does not fit the lattice routine");
    }
    if (opt.adaptive) {
        cap = 1;
        while (cap < hard_cap && cube * scale * detail::sigma_tail(z, cap + 1) > opt.target_error) cap += 1;
    }
    cap = std::min(cap, std::max(hard_cap, 1));

    long double sum = 0, comp = 0;
    std::array<unsigned, 3> nu, N;
    for (nu[0] = 0; nu[0] <= unsigned(cap); ++nu[0])
        for (nu[1] = 0; nu[1] <= unsigned(cap); ++nu[1])
            for (nu[2] = 0; nu[2] <= unsigned(cap); ++nu[2]) {
                int total = 0;
                for (int i = 0; i < 3; ++i) {
                    N[i] = std::max(vD[i], nu[i] + vd[i]);
                    total += int(N[i]);
                }
                unsigned r = good ? rho_good_exponent(N) : rho_prime_power_exponent(p, N, forms, 64).exponent;
                long double term = std::pow(z, (long double)(2 * total - int(r)));
                long double y = term - comp;
                long double t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
    LocalFactor out;
    out.prime = p;
    out.value = cube * sum;
    out.method = FactorMethod::truncated_sum;
    out.nu_cap = cap;
    out.truncation_error = cube * scale * detail::sigma_tail(z, cap + 1);
    return out;
}

// ---- Euler products ----

// P(2) = sum over primes of p^-2
inline constexpr long double kPrimeZeta2 = 0.45224742004106549850654336483224793417L;

// sum_{p > P0} p^-2, from P(2) minus the partial sum
inline long double prime_square_tail(u64 prime_cut) {
    long double s = 0;
    auto ps = primes_up_to(prime_cut);
    for (auto it = ps.rbegin(); it != ps.rend(); ++it) s += 1.0L / ((long double)*it * *it);
    return kPrimeZeta2 - s;
}

// |log sigma_p - p2_coeff p^-2| <= p3_bound p^-3 beyond the prime cut;
// checked on the last primes before the cut
struct TailModel {
    long double p2_coeff = 0;
    long double p3_bound = 0;
};

struct EulerProduct {
    std::vector<LocalFactor> factors;
    u64 prime_cut = 0;
    long double partial = 1;
    long double tail_lo = 1, tail_hi = 1;
    long double value = 1, lo = 1, hi = 1;

    long double error_bound() const { return std::max(value - lo, hi - value); }
    bool contains(long double v) const { return lo <= v && v <= hi; }
};

inline EulerProduct euler_product(const std::function<LocalFactor(u64)>& local, u64 prime_cut,
                                  std::optional<TailModel> model = std::nullopt) {
    if (prime_cut < 2) throw DomainError("euler_product: prime cut must be >= 2");
    EulerProduct E;
    E.prime_cut = prime_cut;
    auto ps = primes_up_to(prime_cut);
    long double err = 0, logerr = 0;
    for (u64 p : ps) {
        LocalFactor f = local(p);
        if (!(f.value > 0)) throw ConvergenceError("euler_product: non-positive local factor at p = " + std::to_string(p));
        E.partial *= f.value;
        logerr += f.truncation_error / f.value;
        E.factors.push_back(f);
    }
    // sample of large primes for the tail check
    std::vector<const LocalFactor*> sample;
    for (std::size_t i = E.factors.size() > 64 ? E.factors.size() - 64 : 0; i < E.factors.size(); ++i)
        if (E.factors[i].prime > 100) sample.push_back(&E.factors[i]);

    long double T2 = prime_square_tail(prime_cut);
    long double T3 = 1.0L / (2.0L * (long double)prime_cut * prime_cut);
    long double log_lo, log_hi;
    if (model) {
        for (auto* f : sample) {
            long double z = 1.0L / (long double)f->prime;
            if (std::fabs(std::log(f->value) - model->p2_coeff * z * z) > model->p3_bound * z * z * z)
                throw ConvergenceError("euler_product: local factor at p = " + std::to_string(f->prime) +
                                       " violates the declared tail model");
        }
        log_lo = model->p2_coeff * T2 - model->p3_bound * T3;
        log_hi = model->p2_coeff * T2 + model->p3_bound * T3;
    } else {
        // p^2 |sigma_p - 1| must stay bounded: compare the sample near the cut
        // with one near sqrt(cut)
        auto scaled = [](const LocalFactor& f) {
            long double p = (long double)f.prime;
            return p * p * std::fabs(f.value - 1);
        };
        long double K = 0;
        for (auto* f : sample) K = std::max(K, scaled(*f));
        std::size_t start = 0;
        long double mid_p = std::max(101.0L, std::sqrt((long double)prime_cut));
        while (start < E.factors.size() && (long double)E.factors[start].prime < mid_p) ++start;
        long double K_mid = 0;
        std::size_t stop = std::min(E.factors.size(), start + 64);
        bool separate = !sample.empty() && stop > start && E.factors[stop - 1].prime < sample.front()->prime;
        for (std::size_t i = start; i < stop; ++i) K_mid = std::max(K_mid, scaled(E.factors[i]));
        if (separate && K > 4 * K_mid + 1e-9L)
            throw ConvergenceError("euler_product: factors are not of the form 1 + O(p^-2)");
        K *= 2;
        log_lo = -K * T2;
        log_hi = K * T2;
    }
    E.tail_lo = std::exp(log_lo);
    E.tail_hi = std::exp(log_hi);
    long double mid = std::exp((log_lo + log_hi) / 2);
    E.value = E.partial * mid;
    // long double rounding over the product, plus truncation of local sums
    err = (4 * (long double)ps.size() + 16) * std::numeric_limits<long double>::epsilon() + logerr;
    E.lo = E.partial * E.tail_lo * (1 - err);
    E.hi = E.partial * E.tail_hi * (1 + err);
    return E;
}

// prod over all p of (1 + 1/p)^-1 (1 + 1/p + 1/p^2): the singular series of
// any triple with discriminant 1
inline LocalFactor good_prime_factor(u64 p) {
    if (p < (u64(1) << 31)) {
        Rational z(1, i64(p));
        return exact_factor(p, (Rational(1) + z + z * z) / (Rational(1) + z));
    }
    long double z = 1.0L / (long double)p;
    return {p, (1 + z + z * z) / (1 + z), std::nullopt, FactorMethod::closed_form, 0, 0};
}

inline constexpr TailModel kGoodPrimeTail{1.0L, 1.5L};

inline EulerProduct singular_series(const FormTriple& forms, u64 prime_cut, SigmaOptions opt = {}) {
    return euler_product([&](u64 p) { return sigma_p_general(p, {1, 1, 1}, {1, 1, 1}, forms, opt); }, prime_cut,
                         kGoodPrimeTail);
}

// prod_p sigma_p(d, D); beyond the primes of Delta d D every factor is the
// good-prime factor, so the same tail model applies
inline EulerProduct singular_series(const FormTriple& forms, const Triple& d, const Triple& D, u64 prime_cut,
                                    SigmaOptions opt = {}) {
    return euler_product([&](u64 p) { return sigma_p_general(p, d, D, forms, opt); }, prime_cut, kGoodPrimeTail);
}

// prod_p (1 + 1/p)^-1 (1 + 1/p + 1/p^2): the constant of the bilinear count
inline EulerProduct bilinear_constant(u64 prime_cut) {
    return euler_product(good_prime_factor, prime_cut, kGoodPrimeTail);
}

// (4/3) prod_{p>2} (1 + 1/p)^-1 (1 + 1/p + 1/p^2): the constant of the
// averaged triple correlation
inline EulerProduct averaged_correlation_constant(u64 prime_cut) {
    return euler_product([](u64 p) { return p == 2 ? exact_factor(2, Rational(4, 3)) : good_prime_factor(p); },
                         prime_cut, kGoodPrimeTail);
}

struct Interval {
    long double value = 0, lo = 0, hi = 0;
    long double error_bound() const { return std::max(value - lo, hi - value); }
};

inline Interval scale(const EulerProduct& E, long double s) {
    return {E.value * s, E.lo * s, E.hi * s};
}

// (12 / zeta(2)^2) prod_p (1 + 1/p)^-1 (1 + 1/p + 1/p^2), with
// zeta(2)^2 = pi^4 / 36
inline Interval height_count_constant(u64 prime_cut) {
    long double pi = std::numbers::pi_v<long double>;
    long double pref = 432.0L / (pi * pi * pi * pi);
    auto E = euler_product(good_prime_factor, prime_cut, kGoodPrimeTail);
    Interval r = scale(E, pref);
    long double eps = 8 * std::numeric_limits<long double>::epsilon() * r.value;
    r.lo -= eps;
    r.hi += eps;
    return r;
}

// ---- the correlation weight f and c_h ----

// f(p^nu), nu >= 1
inline Rational f_prime_power(u64 p, unsigned nu) {
    if (nu == 0) return Rational(1);
    if (p == 2) return Rational(52, 11) - Rational(41 + 15 * i64(nu), 11 * i64(ipow(2, nu)));
    Rational z(1, i64(p));
    Rational inner = Rational(1) + Rational(4) * z + z * z - Rational(3 * i64(nu) + 4) * pow(z, nu + 1) -
                     Rational(4) * pow(z, nu + 2) + Rational(3 * i64(nu) + 2) * pow(z, nu + 3);
    return inner / ((Rational(1) + Rational(2) * z) * (Rational(1) - z) * (Rational(1) - z));
}

inline long double f_prime_power_ld(u64 p, unsigned nu) {
    if (nu == 0) return 1;
    if (p == 2) return 52.0L / 11 - (41.0L + 15.0L * nu) / (11.0L * std::pow(2.0L, (long double)nu));
    long double z = 1.0L / (long double)p;
    long double inner = 1 + 4 * z + z * z - (3.0L * nu + 4) * std::pow(z, (long double)nu + 1) -
                        4 * std::pow(z, (long double)nu + 2) + (3.0L * nu + 2) * std::pow(z, (long double)nu + 3);
    return inner / ((1 + 2 * z) * (1 - z) * (1 - z));
}

inline Rational f_of(u64 h) {
    if (h == 0) throw DomainError("f_of: h must be >= 1");
    Rational r(1);
    for (auto& [p, e] : factorize_trial(h).factors) r *= f_prime_power(p, e);
    return r;
}

// closed forms of (f * mu)(p^k)
inline Rational f_mu_closed_form(u64 p, unsigned k) {
    if (k == 0) return Rational(1);
    Rational z(1, i64(p));
    if (p == 2) {
        if (k == 1) return Rational(13, 11);
        return pow(Rational(1, 2), k) * (Rational(1) + Rational(15 * i64(k), 11));
    }
    if (k == 1) return z * (Rational(4) + Rational(5) * z) / (Rational(1) + Rational(2) * z);
    Rational K{i64(k)};
    Rational num = Rational(1) + Rational(3) * K - Rational(3) * K * z - (Rational(3) + Rational(3) * K) * z * z +
                   (Rational(3) * K + Rational(2)) * z * z * z;
    return pow(z, k) * num / ((Rational(1) + Rational(2) * z) * (Rational(1) - z) * (Rational(1) - z));
}

inline long double f_mu_closed_form_ld(u64 p, unsigned k) {
    if (k == 0) return 1;
    long double z = 1.0L / (long double)p;
    if (p == 2) {
        if (k == 1) return 13.0L / 11;
        return std::pow(0.5L, (long double)k) * (1 + 15.0L * k / 11);
    }
    if (k == 1) return z * (4 + 5 * z) / (1 + 2 * z);
    long double num = 1 + 3.0L * k - 3.0L * k * z - (3 + 3.0L * k) * z * z + (3.0L * k + 2) * z * z * z;
    return std::pow(z, (long double)k) * num / ((1 + 2 * z) * (1 - z) * (1 - z));
}

// f(p^k) - f(p^(k-1)), checked against the closed forms
inline Rational f_mu_convolution(u64 p, unsigned k) {
    if (k < 1) throw DomainError("f_mu_convolution: k must be >= 1");
    Rational direct = f_prime_power(p, k) - f_prime_power(p, k - 1);
    Rational closed = f_mu_closed_form(p, k);
    if (direct != closed)
        throw InvariantViolation("(f*mu)(" + std::to_string(p) + "^" + std::to_string(k) + "): difference " +
                                 direct.str() + " vs closed form " + closed.str());
    return direct;
}

inline EulerProduct correlation_product(u64 prime_cut) {
    return euler_product(
        [](u64 p) {
            long double z = 1.0L / (long double)p;
            return LocalFactor{p, (1 - z) * (1 - z) * (1 + 2 * z), std::nullopt, FactorMethod::closed_form, 0, 0};
        },
        prime_cut, TailModel{-3.0L, 3.0L});
}

struct CorrelationConstant {
    u64 h = 1;
    Rational f_of_h{1};
    long double value = 0, lo = 0, hi = 0;
    long double error_bound() const { return std::max(value - lo, hi - value); }
};

inline CorrelationConstant c_h(u64 h, u64 prime_cut) {
    if (h == 0) throw DomainError("c_h: h must be >= 1");
    auto E = correlation_product(prime_cut);
    CorrelationConstant c;
    c.h = h;
    c.f_of_h = f_of(h);
    long double s = 11.0L / 8.0L * c.f_of_h.to_ld();
    c.value = E.value * s;
    c.lo = E.lo * s;
    c.hi = E.hi * s;
    return c;
}

// c1' = prod_p sum_k (f*mu)(p^k) / p^k
inline EulerProduct c1_prime(u64 prime_cut) {
    return euler_product(
        [](u64 p) {
            long double s = 1, z = 1.0L / (long double)p;
            for (unsigned k = 1; k < 400; ++k) {
                long double t = f_mu_closed_form_ld(p, k) * std::pow(z, (long double)k);
                s += t;
                if (std::fabs(t) < 1e-30L) break;
            }
            return LocalFactor{p, s, std::nullopt, FactorMethod::truncated_sum, 1e-28L, 0};
        },
        prime_cut, TailModel{4.0L, 4.0L});
}

struct CorrelationSum {
    u64 H = 0;
    long double value = 0;          // sum_{h <= H} f(h)
    std::optional<Rational> exact;  // while the exact sum fits in 64-bit fractions
    long double c1_prime = 0, c1_prime_lo = 0, c1_prime_hi = 0;
    long double predicted = 0;   // c1' H
    long double normalized = 0;  // (S(H) - c1' H) / sqrt(H)
};

inline CorrelationSum S_H(u64 H, u64 prime_cut = 100'000) {
    if (H < 1) throw DomainError("S_H: H must be >= 1");
    CorrelationSum out;
    out.H = H;
    auto t = build_tables(std::max<u64>(H, 2));
    std::vector<long double> f(H + 1, 1.0L);
    long double sum = 0, comp = 0;
    std::optional<Rational> exact = Rational(0);
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
        long double y = f[n] - comp, s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        if (exact) {
            try {
                *exact += f_of(n);
            } catch (const SizeError&) {
                exact.reset();
            }
        }
    }
    out.value = sum;
    out.exact = exact;
    auto C = c1_prime(prime_cut);
    out.c1_prime = C.value;
    out.c1_prime_lo = C.lo;
    out.c1_prime_hi = C.hi;
    out.predicted = C.value * (long double)H;
    out.normalized = (sum - out.predicted) / std::sqrt((long double)H);
    return out;
}

}  // namespace divforms
