#include <gtest/gtest.h>

#include <random>

#include "divforms/lattice.hpp"

using namespace divforms;

namespace {

FormTriple second_triple() { return FormTriple({LinearForm{2, 1}, LinearForm{1, -1}, LinearForm{1, 3}}); }

// exponent of rho(p^e) from a direct count over one period p^emax
unsigned rho_exponent_oracle(u64 p, std::array<unsigned, 3> e, const FormTriple& f) {
    unsigned emax = std::max({e[0], e[1], e[2]});
    i64 m = i64(ipow(p, emax));
    i64 h[3] = {i64(ipow(p, e[0])), i64(ipow(p, e[1])), i64(ipow(p, e[2]))};
    i64 count = 0;
    for (i64 x = 0; x < m; ++x)
        for (i64 y = 0; y < m; ++y) {
            bool ok = true;
            for (int i = 0; i < 3 && ok; ++i) ok = (f[i].a * x + f[i].b * y) % h[i] == 0;
            count += ok;
        }
    i64 index = m * m / count;
    unsigned v = 0;
    while (index % i64(p) == 0) {
        index /= i64(p);
        ++v;
    }
    EXPECT_EQ(index, 1);
    return 2 * (e[0] + e[1] + e[2]) - v;
}

bool in_hnf(const CongruenceLattice& L, i64 x, i64 y) {
    if (x % L.hnf_alpha != 0) return false;
    i128 k = x / L.hnf_alpha;
    return mod_floor(i128(y) - k * L.hnf_beta, L.hnf_gamma) == 0;
}

std::vector<Triple> triples_up_to(i64 bound) {
    std::vector<Triple> out;
    for (i64 a = 1; a <= bound; ++a)
        for (i64 b = 1; a * b <= bound; ++b)
            for (i64 c = 1; a * b * c <= bound; ++c) out.push_back({a, b, c});
    return out;
}

}  // namespace

TEST(FormTripleTest, Invariants) {
    auto f = second_triple();
    EXPECT_EQ(f.resultant(0, 1), -3);
    EXPECT_EQ(f.resultant(0, 2), 5);
    EXPECT_EQ(f.resultant(1, 2), 4);
    EXPECT_EQ(f.delta(), 60u);
    EXPECT_EQ(f.l_inf(), 3);
    auto g = FormTriple({LinearForm{2, 4}, LinearForm{3, 0}, LinearForm{1, 1}});
    EXPECT_EQ(g.content(0), 2);
    EXPECT_EQ(g.primitive(0), (LinearForm{1, 2}));
    EXPECT_EQ(g.content(1), 3);
    EXPECT_EQ(g.l_star(), 6);
    EXPECT_EQ(FormTriple::progression().delta(), 2u);
    EXPECT_EQ(FormTriple::sum_triple().delta(), 1u);
    EXPECT_THROW(FormTriple({LinearForm{1, 1}, LinearForm{2, 2}, LinearForm{1, 0}}), DomainError);
    EXPECT_THROW(FormTriple({LinearForm{0, 0}, LinearForm{2, 1}, LinearForm{1, 0}}), DomainError);
}

TEST(RegionTest, BasicShapes) {
    Region sq = Region::rect(0, 1, 0, 1);
    EXPECT_NEAR(double(sq.volume), 1.0, 1e-15);
    EXPECT_NEAR(double(sq.r_inf), 1.0, 1e-15);
    EXPECT_NEAR(double(sq.boundary_length), 4.0, 1e-15);
    Region tri = Region::triangle({0, 0}, {1, 0}, {0, 1});
    EXPECT_NEAR(double(tri.volume), 0.5, 1e-15);
    // two halves of the square: the shared diagonal is interior
    Region u = Region::union_of({tri, Region::triangle({1, 0}, {1, 1}, {0, 1})});
    EXPECT_NEAR(double(u.volume), 1.0, 1e-15);
    EXPECT_NEAR(double(u.boundary_length), 4.0, 1e-12);
    EXPECT_THROW(Region::rect(1, 0, 0, 1), DomainError);
    EXPECT_THROW(Region::union_of({sq, Region::rect(Rational(1, 2), 2, 0, 1)}), DomainError);
    EXPECT_THROW(Region::polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), DomainError);
}

TEST(RegionTest, BoundaryLengthCheck) {
    // four disjoint strips: total boundary 9 > 8 r_inf
    std::vector<Region> strips;
    for (int k = 0; k < 4; ++k) strips.push_back(Region::rect(0, 1, Rational(k, 4), Rational(2 * k + 1, 8)));
    EXPECT_THROW(Region::union_of(strips), DomainError);
}

TEST(RegionTest, RPrime) {
    auto sum = FormTriple::sum_triple();
    EXPECT_EQ(r_prime(sum, Region::rect(0, 1, 0, 1)), Rational(2));
    EXPECT_EQ(r_prime(FormTriple::progression(), Region::rect(0, 1, 0, Rational(1, 10))), Rational(11, 10));
    auto tripled = FormTriple({LinearForm{3, 0}, LinearForm{0, 3}, LinearForm{3, 3}});
    EXPECT_EQ(r_prime(tripled, Region::rect(0, 1, 0, 1)), Rational(6));
}

TEST(RegionTest, PreliminaryInequalities) {
    std::vector<Region> regions{Region::rect(0, 1, 0, 1), Region::rect(Rational(1, 3), 2, Rational(1, 5), 1),
                                Region::triangle({0, 0}, {2, 1}, {1, 2})};
    for (auto& f : {FormTriple::sum_triple(), second_triple()})
        for (auto& R : regions) {
            long double rp = r_prime(f, R).to_ld(), li = (long double)f.l_inf();
            EXPECT_LE(rp / (2 * li), R.r_inf * (1 + 1e-15L));
            EXPECT_LE(R.r_inf, 2 * rp * li * (1 + 1e-15L));
            EXPECT_LE(R.volume, 4 * R.r_inf * R.r_inf);
        }
}

TEST(Rho, BruteForceExamples) {
    auto pr = FormTriple::progression();
    EXPECT_EQ(rho_bruteforce({1, 1, 1}, pr), 1);
    EXPECT_EQ(rho_bruteforce({1, 1, 1}, second_triple()), 1);
    EXPECT_EQ(rho_bruteforce({2, 1, 1}, pr), 2);
    EXPECT_EQ(rho_bruteforce({2, 2, 2}, pr), 16);
    EXPECT_EQ(rho_bruteforce({6, 2, 2}, pr), 48);
    EXPECT_THROW(rho_bruteforce({101, 10, 10}, pr), SizeError);
}

TEST(Rho, PrimePowerExamples) {
    auto pr = FormTriple::progression();
    EXPECT_EQ(rho_prime_power(3, {1, 0, 0}, pr), 3);
    EXPECT_EQ(rho_prime_power(5, {1, 2, 3}, FormTriple::sum_triple()), ipow(5, 7));
    EXPECT_EQ(rho_prime_power(2, {1, 0, 1}, pr), 8);
    EXPECT_EQ(rho_bruteforce({2, 1, 2}, pr), 8);
}

TEST(Rho, MultiplicativeExamples) {
    auto t = build_tables(1000);
    auto pr = FormTriple::progression();
    EXPECT_EQ(rho({6, 2, 2}, pr, t), 48);
    EXPECT_EQ(rho({1, 1, 1}, pr, t), 1);
    for (i64 p : {3, 5, 7, 11}) EXPECT_EQ(rho({p, p, p}, pr, t), ipow(p, 4));
}

TEST(Rho, AgreesWithBruteForce) {
    auto t = build_tables(1000);
    for (auto& f : {FormTriple::progression(), second_triple()})
        for (auto& h : triples_up_to(200)) ASSERT_EQ(rho(h, f, t), rho_bruteforce(h, f)) << f.str();
}

TEST(Rho, PrimePowerClosedFormAndBound) {
    for (auto& f : {FormTriple::progression(), second_triple(), FormTriple::sum_triple()})
        for (u64 p : {2, 3, 5, 7, 11, 13})
            for (unsigned a = 0; a <= 3; ++a)
                for (unsigned b = 0; b <= 3; ++b)
                    for (unsigned c = 0; c <= 3; ++c) {
                        std::array<unsigned, 3> e{a, b, c};
                        if (p >= 11 && a + b + c > 6) continue;  // keep the oracle cheap
                        unsigned want = rho_exponent_oracle(p, e, f);
                        RhoPower got = rho_prime_power_exponent(p, e, f);
                        ASSERT_EQ(got.exponent, want) << f.str() << " p=" << p;
                        if (f.delta() % p != 0) EXPECT_EQ(want, rho_good_exponent(e));
                        else EXPECT_LE(want, rho_bad_bound_exponent(p, e, f));
                    }
}

TEST(Lattice, Examples) {
    auto pr = FormTriple::progression();
    auto L1 = lattice_of({1, 1, 1}, pr);
    EXPECT_EQ(L1.basis[0], (IVec{1, 0}));
    EXPECT_EQ(L1.basis[1], (IVec{0, 1}));
    EXPECT_EQ(L1.determinant, 1);
    EXPECT_EQ(L1.delta_div, 1);
    auto L2 = lattice_of({2, 2, 2}, pr);
    EXPECT_EQ(L2.determinant, 4);
    EXPECT_EQ(L2.rho, 16);
    EXPECT_EQ(L2.delta_div, 2);
    for (i64 x = 0; x < 8; ++x)
        for (i64 y = 0; y < 8; ++y) EXPECT_EQ(L2.contains(pr, x, y), x % 2 == 0 && y % 2 == 0);
    auto L3 = lattice_of({2, 1, 1}, pr);
    EXPECT_EQ(L3.determinant, 2);
    EXPECT_EQ(L3.delta_div, 1);
    EXPECT_TRUE(L3.contains(pr, 1, 1));
}

TEST(Lattice, Properties) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<i64> coef(-50, 50);
    for (auto& f : {FormTriple::progression(), second_triple()})
        for (auto& D : triples_up_to(200)) {
            auto L = lattice_of(D, f);
            i128 h = i128(D[0]) * D[1] * D[2];
            ASSERT_EQ(L.determinant * L.rho, h * h);
            // reduced basis
            i64 n1 = sup_norm(L.basis[0]), n2 = sup_norm(L.basis[1]);
            EXPECT_GE(n1, 1);
            EXPECT_LE(n1, n2);
            EXPECT_LE(i128(n1) * n2, 2 * L.determinant);
            i128 det = i128(L.basis[0].x) * L.basis[1].y - i128(L.basis[0].y) * L.basis[1].x;
            EXPECT_EQ(abs128(det), L.determinant);
            // membership of random combinations
            for (int k = 0; k < 100; ++k) {
                i64 s = coef(rng), t = coef(rng);
                i64 x = s * L.basis[0].x + t * L.basis[1].x, y = s * L.basis[0].y + t * L.basis[1].y;
                ASSERT_TRUE(L.contains(f, x, y));
            }
            // the basis spans exactly the congruence set on a box
            if (h <= 30) {
                for (i64 x = -i64(h); x <= i64(h); ++x)
                    for (i64 y = -i64(h); y <= i64(h); ++y) ASSERT_EQ(L.contains(f, x, y), in_hnf(L, x, y));
            }
            // delta: divides every coordinate; nothing in (delta, 2 delta] does
            i64 d = L.delta_div;
            for (auto& v : L.basis) {
                EXPECT_EQ(v.x % d, 0);
                EXPECT_EQ(v.y % d, 0);
            }
            for (i64 k = d + 1; k <= 2 * d; ++k) {
                bool all = true;
                for (auto& v : L.basis) all = all && v.x % k == 0 && v.y % k == 0;
                EXPECT_FALSE(all) << k;
            }
        }
}
