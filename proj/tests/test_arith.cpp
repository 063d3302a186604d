#include <gtest/gtest.h>

#include <random>

#include "divforms/arith.hpp"
#include "divforms/lattice.hpp"
#include "divforms/rational.hpp"

using namespace divforms;

namespace {

u64 tau_naive(u64 n) {
    u64 c = 0;
    for (u64 d = 1; d * d <= n; ++d)
        if (n % d == 0) c += d * d == n ? 1 : 2;
    return c;
}

}  // namespace

TEST(Tables, SmallValues) {
    auto t12 = build_tables(12);
    EXPECT_EQ(t12.tau[12], 6);
    auto t10 = build_tables(10);
    EXPECT_EQ(t10.mobius[10], 1);
    EXPECT_EQ(t10.omega[10], 2);
    auto t16 = build_tables(16);
    EXPECT_EQ(t16.tau[16], 5);
    EXPECT_EQ(t16.tau[1], 1);
    EXPECT_EQ(t16.mobius[1], 1);
    EXPECT_EQ(t16.omega[1], 0);
}

TEST(Tables, PrimesAndMultiplicativity) {
    auto t = build_tables(100000);
    for (u64 p : t.primes) {
        EXPECT_EQ(t.tau[p], 2);
        EXPECT_EQ(t.mobius[p], -1);
        EXPECT_EQ(t.omega[p], 1);
    }
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<u64> pick(1, 300);
    for (int i = 0; i < 2000; ++i) {
        u64 m = pick(rng), n = pick(rng);
        if (std::gcd(m, n) == 1) {
            EXPECT_EQ(t.tau[m * n], u64(t.tau[m]) * t.tau[n]);
        }
    }
}

TEST(Tables, TauMatchesTrialDivision) {
    auto t = build_tables(100000);
    for (u64 n = 1; n <= 100000; ++n) ASSERT_EQ(t.tau[n], tau_naive(n)) << n;
}

TEST(Tables, MertensIdentity) {
    for (i64 N : {10, 100, 1000}) {
        auto t = build_tables(u64(N));
        i64 s = 0;
        for (i64 n = 1; n <= N; ++n) s += t.mobius[n] * (N / n);
        EXPECT_EQ(s, 1) << N;
    }
}

TEST(Tables, RejectsBadLimits) {
    EXPECT_THROW(build_tables(0), DomainError);
    EXPECT_THROW(build_tables(1000, 100), SizeError);
}

TEST(Factorize, Examples) {
    auto t = build_tables(2000);
    EXPECT_TRUE(factorize(1, t).factors.empty());
    auto f = factorize(360, t);
    std::vector<std::pair<u64, unsigned>> want{{2, 3}, {3, 2}, {5, 1}};
    EXPECT_EQ(f.factors, want);
    EXPECT_EQ(factorize(1024, t).factors, (std::vector<std::pair<u64, unsigned>>{{2, 10}}));
    EXPECT_THROW(factorize(0, t), DomainError);
    EXPECT_THROW(factorize_trial(0), DomainError);
}

TEST(Factorize, BeyondTablesAndProperties) {
    auto t = build_tables(1000);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<u64> pick(1, 999'999);
    for (int i = 0; i < 500; ++i) {
        u64 n = pick(rng);
        auto f = factorize(n, t);
        EXPECT_EQ(f.factors, factorize_trial(n).factors);
        u64 prod = 1, prev = 1;
        for (auto& [p, e] : f.factors) {
            EXPECT_GE(e, 1u);
            EXPECT_GT(p, prev);
            prev = p;
            for (unsigned k = 0; k < e; ++k) prod *= p;
        }
        EXPECT_EQ(prod, n);
        EXPECT_EQ(f.tau(), tau_naive(n));
    }
}

TEST(Convolution, Examples) {
    EXPECT_EQ(dirichlet_convolve_triple(unit_triple(), unit_triple(), {1, 1, 1}), Rational(1));
    EXPECT_EQ(dirichlet_convolve_triple(one_triple(), mobius_triple(), {2, 1, 1}), Rational(0));
    auto eps = moebius_invert_triple(one_triple());
    EXPECT_EQ(eps({1, 1, 1}), Rational(1));
    EXPECT_EQ(eps({2, 1, 1}), Rational(0));
    EXPECT_EQ(eps({6, 4, 3}), Rational(0));
}

namespace {

// rho(d) / (d1 d2 d3) for the progression triple
TripleArithFunction density_ratio() {
    auto t = std::make_shared<ArithTables>(build_tables(1000));
    auto forms = FormTriple::progression();
    return {[t, forms](const Triple& d) {
                return Rational::from_i128(rho(d, forms, *t), i128(d[0]) * d[1] * d[2]);
            },
            true};
}

}  // namespace

TEST(Convolution, DensityRoundTrip) {
    auto f = density_ratio();
    auto h = moebius_invert_triple(f);
    EXPECT_EQ(f({2, 2, 2}), Rational(2));
    // h(p^nu, 1, 1) = 0 at a good prime
    EXPECT_EQ(h({3, 1, 1}), Rational(0));
    EXPECT_EQ(h({1, 9, 1}), Rational(0));
    // h(2,2,2) by direct convolution over the divisors of (2,2,2)
    Rational direct(0);
    for (i64 a : {1, 2})
        for (i64 b : {1, 2})
            for (i64 c : {1, 2}) {
                int sign = ((a == 2) + (b == 2) + (c == 2)) % 2 ? -1 : 1;
                direct += Rational(sign) * f({2 / a, 2 / b, 2 / c});
            }
    EXPECT_EQ(h({2, 2, 2}), direct);
    auto one = one_triple();
    for (i64 a = 1; a <= 50; ++a)
        for (i64 b = 1; a * b <= 50; ++b)
            for (i64 c = 1; a * b * c <= 50; ++c)
                ASSERT_EQ(dirichlet_convolve_triple(one, h, {a, b, c}), f({a, b, c})) << a << "," << b << "," << c;
}

TEST(Convolution, RoundTripOnMultiplicativeFunction) {
    // F(d) = prod_i sigma(d_i) / d_i^2, multiplicative
    TripleArithFunction F{[](const Triple& d) {
                              Rational r(1);
                              for (i64 x : d) {
                                  i64 s = 0;
                                  for (u64 e : divisors_of(u64(x))) s += i64(e);
                                  r *= Rational(s, x * x);
                              }
                              return r;
                          },
                          true};
    auto h = moebius_invert_triple(F);
    auto one = one_triple();
    for (i64 a = 1; a <= 100; ++a)
        for (i64 b = 1; a * b <= 100; ++b)
            for (i64 c = 1; a * b * c <= 100; ++c)
                ASSERT_EQ(dirichlet_convolve_triple(one, h, {a, b, c}), F({a, b, c}));
    // multiplicativity on coprime supports
    EXPECT_EQ(h({6, 1, 5}), h({2, 1, 1}) * h({3, 1, 5}));
}

TEST(RationalArith, Basics) {
    Rational a(1, 3), b(1, 6);
    EXPECT_EQ(a + b, Rational(1, 2));
    EXPECT_EQ(a * b, Rational(1, 18));
    EXPECT_EQ(a / b, Rational(2));
    EXPECT_EQ(Rational(-4, -6), Rational(2, 3));
    EXPECT_EQ(Rational::parse("-3/9"), Rational(-1, 3));
    EXPECT_THROW(Rational(1, 0), DomainError);
    EXPECT_THROW(Rational::parse("x"), DomainError);
    Rational big(std::numeric_limits<i64>::max() / 2);
    EXPECT_THROW(big * Rational(4), SizeError);
}
