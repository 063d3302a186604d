// Acceptance suite: one PASS/FAIL line per criterion, diagnostics indented
// below it. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "divforms/divforms.hpp"

using namespace divforms;

namespace {

// ---- pinned tolerances and limits ----
constexpr i64 kRhoProductBound = 200;
constexpr long double kSigmaTolerance = 1e-10L;
constexpr int kSigmaNuCap = 25;
constexpr u64 kSigmaPrimeBound = 50;
constexpr long double kSigmaTwoAdaptiveTolerance = 1e-12L;
constexpr int kGeneratingBox = 30;
constexpr long double kGeneratingTolerance = 1e-9L;
constexpr u64 kClosedFormPrimeBound = 13;
constexpr unsigned kClosedFormMaxK = 6;
constexpr u64 kConstantsPrimeCut = 100'000;
constexpr int kIdentityTriples = 1000;
constexpr i64 kIdentityMax = 1000;
constexpr std::uint64_t kIdentitySeed = 20240601;
constexpr long double kTauSumTolerance = 0.25L;
constexpr long double kCorrelationLo = 0.6L, kCorrelationHi = 1.4L;
constexpr long double kShiftExponent = 0.8L;
constexpr i64 kReductionMaxX = 1000;
constexpr long double kBilinearLo = 0.5L, kBilinearHi = 1.5L;

constexpr double kLimit1 = 30, kLimit2 = 60, kLimit3 = 10, kLimit4 = 1, kLimit5 = 10, kLimit6 = 30;
constexpr double kLimit7 = 15 * 60, kLimit8 = 10 * 60, kLimit9 = 15 * 60, kLimit10 = 10 * 60;

std::string fmt(long double v) { return format_real(v); }

struct Outcome {
    bool pass = false;
    std::vector<std::string> notes;
    std::string output;  // serialized result, compared across worker counts
};

// ---- independent oracles ----

// rho by counting residues of (Z / h1 h2 h3)^2 directly
i128 rho_count(const Triple& h, const FormTriple& f) {
    i64 m = h[0] * h[1] * h[2];
    i128 c = 0;
    for (i64 x = 0; x < m; ++x)
        for (i64 y = 0; y < m; ++y) {
            bool ok = true;
            for (int i = 0; i < 3 && ok; ++i) ok = (f[i].a * x + f[i].b * y) % h[i] == 0;
            c += ok;
        }
    return c;
}

// exponent of rho(p^e) from one period p^emax
unsigned rho_exponent_count(u64 p, const std::array<unsigned, 3>& e, const FormTriple& f) {
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
    if (index != 1) throw InvariantViolation("period count: index is not a power of p");
    return 2 * (e[0] + e[1] + e[2]) - v;
}

u64 tau_trial(u64 n) {
    u64 t = 1;
    for (u64 p = 2; p * p <= n; ++p) {
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        t *= e + 1;
    }
    return n > 1 ? 2 * t : t;
}

FormTriple second_triple() { return FormTriple({LinearForm{2, 1}, LinearForm{1, -1}, LinearForm{1, 3}}); }

bool good_prime(u64 p, const FormTriple& f) {
    if (f.delta() % p == 0) return false;
    for (int i = 0; i < 3; ++i)
        if (f.content(i) % i64(p) == 0) return false;
    return true;
}

// ---- criteria ----

Outcome criterion1(unsigned) {
    Outcome o;
    auto t = build_tables(1000);
    std::ostringstream out;
    i64 checked = 0, mismatches = 0;
    for (const FormTriple& f : {FormTriple::progression(), second_triple()})
        for (i64 a = 1; a <= kRhoProductBound; ++a)
            for (i64 b = 1; a * b <= kRhoProductBound; ++b)
                for (i64 c = 1; a * b * c <= kRhoProductBound; ++c) {
                    i128 got = rho({a, b, c}, f, t), want = rho_count({a, b, c}, f);
                    ++checked;
                    if (got != want) {
                        if (++mismatches <= 5)
                            o.notes.push_back("mismatch " + f.str() + " h=(" + std::to_string(a) + "," + std::to_string(b) +
                                              "," + std::to_string(c) + "): " + to_string(got) + " vs " + to_string(want));
                    }
                    out << to_string(got) << ' ';
                }
    o.pass = mismatches == 0;
    o.notes.insert(o.notes.begin(), "moduli triples checked: " + std::to_string(checked) + ", mismatches: " + std::to_string(mismatches));
    o.output = out.str();
    return o;
}

Outcome criterion2(unsigned) {
    Outcome o;
    std::ostringstream out;
    i64 exact_checks = 0, bound_checks = 0, failures = 0;
    for (const FormTriple& f : {FormTriple::progression(), second_triple()})
        for (u64 p : {2, 3, 5, 7, 11, 13})
            for (unsigned a = 0; a <= 3; ++a)
                for (unsigned b = 0; b <= 3; ++b)
                    for (unsigned c = 0; c <= 3; ++c) {
                        std::array<unsigned, 3> e{a, b, c};
                        unsigned actual = rho_exponent_count(p, e, f);
                        unsigned lib = rho_prime_power_exponent(p, e, f).exponent;
                        bool ok = actual == lib;
                        if (good_prime(p, f)) {
                            ok = ok && actual == rho_good_exponent(e);
                            ++exact_checks;
                        } else {
                            ok = ok && actual <= rho_bad_bound_exponent(p, e, f);
                            ++bound_checks;
                        }
                        if (!ok && ++failures <= 5)
                            o.notes.push_back("failure " + f.str() + " p=" + std::to_string(p) + " e=(" + std::to_string(a) +
                                              "," + std::to_string(b) + "," + std::to_string(c) + ")");
                        out << actual << ' ';
                    }
    o.pass = failures == 0;
    o.notes.insert(o.notes.begin(), "closed-form equalities: " + std::to_string(exact_checks) + ", upper-bound checks: " +
                                        std::to_string(bound_checks) + ", failures: " + std::to_string(failures));
    o.output = out.str();
    return o;
}

Outcome criterion3(unsigned) {
    Outcome o;
    std::ostringstream out;
    auto pr = FormTriple::progression();
    LocalFactor two = sigma_p_general(2, {1, 1, 1}, {1, 1, 1}, pr);
    bool two_exact = two.exact && *two.exact == Rational(4, 3);
    SigmaOptions adaptive;
    adaptive.force_sum = true;
    LocalFactor two_sum = sigma_p_general(2, {1, 1, 1}, {1, 1, 1}, pr, adaptive);
    long double two_err = std::fabs(two_sum.value - 4.0L / 3);
    SigmaOptions fixed;
    fixed.force_sum = true;
    fixed.adaptive = false;
    fixed.nu_cap = kSigmaNuCap;
    long double two_cap_err = std::fabs(sigma_p_general(2, {1, 1, 1}, {1, 1, 1}, pr, fixed).value - 4.0L / 3);
    o.notes.push_back("sigma_2 exact value: " + (two.exact ? two.exact->str() : std::string("none")));
    o.notes.push_back("p = 2 adaptive series (cap " + std::to_string(two_sum.nu_cap) + ") minus 4/3: " + fmt(two_err));
    o.notes.push_back("p = 2 series at cap " + std::to_string(kSigmaNuCap) + " minus 4/3: " + fmt(two_cap_err) +
                      " (the 2-adic tail decays like 2^-cap, so the fixed-cap check runs over odd p)");
    long double worst = 0;
    u64 worst_p = 0;
    for (u64 p : primes_up_to(kSigmaPrimeBound)) {
        if (p == 2) continue;
        long double z = 1.0L / (long double)p;
        long double closed = (1 + z + z * z) / (1 + z);
        long double diff = std::fabs(sigma_p_general(p, {1, 1, 1}, {1, 1, 1}, pr, fixed).value - closed);
        if (diff > worst) {
            worst = diff;
            worst_p = p;
        }
        out << fmt(closed) << ' ';
    }
    o.notes.push_back("max |truncated - closed| over odd p <= " + std::to_string(kSigmaPrimeBound) + ": " + fmt(worst) +
                      " at p = " + std::to_string(worst_p));
    o.pass = two_exact && two_err <= kSigmaTwoAdaptiveTolerance && worst <= kSigmaTolerance;
    out << (two.exact ? two.exact->str() : "none") << ' ' << fmt(worst);
    o.output = out.str();
    return o;
}

Outcome criterion4(unsigned) {
    Outcome o;
    std::ostringstream out;
    o.pass = true;
    for (auto [num, den] : {std::pair{1, 2}, std::pair{1, 3}, std::pair{1, 5}}) {
        long double z = (long double)num / den;
        CompensatedSum s;
        for (int a = 0; a <= kGeneratingBox; ++a)
            for (int b = 0; b <= kGeneratingBox; ++b)
                for (int c = 0; c <= kGeneratingBox; ++c) {
                    int lo = std::min({a, b, c});
                    s.add(std::pow(z, (long double)(a + b + c - lo)));
                }
        long double closed = S_of_z(Rational(num, den)).to_ld();
        long double diff = std::fabs(closed - s.value());
        bool ok = diff <= kGeneratingTolerance;
        o.pass = o.pass && ok;
        o.notes.push_back("z = " + std::to_string(num) + "/" + std::to_string(den) + ": closed " + fmt(closed) +
                          ", box sum " + fmt(s.value()) + ", difference " + fmt(diff) + (ok ? "" : " (over tolerance)"));
        out << fmt(diff) << ' ';
    }
    if (!o.pass)
        o.notes.push_back("the omitted terms have max(nu) > " + std::to_string(kGeneratingBox) +
                          " and weight at least z^31 each; at z = 1/2 their sum is about 1.7e-8, so no correct "
                          "implementation meets 1e-9 on this box");
    o.output = out.str();
    return o;
}

Outcome criterion5(unsigned) {
    Outcome o;
    std::ostringstream out;
    i64 failures = 0, checked = 0;
    for (u64 p : primes_up_to(kClosedFormPrimeBound))
        for (unsigned k = 1; k <= kClosedFormMaxK; ++k) {
            // Dirichlet convolution with mu at a prime power: f(p^k) - f(p^(k-1))
            Rational direct(0);
            for (unsigned j = 0; j <= k; ++j) {
                int mu = j == 0 ? 1 : (j == 1 ? -1 : 0);
                if (mu) direct += Rational(mu) * f_prime_power(p, k - j);
            }
            ++checked;
            if (direct != f_mu_closed_form(p, k)) {
                ++failures;
                o.notes.push_back("mismatch at p = " + std::to_string(p) + ", k = " + std::to_string(k));
            }
            out << direct.str() << ' ';
        }
    auto c1 = c_h(1, kConstantsPrimeCut);
    auto c1p = c1_prime(kConstantsPrimeCut);
    auto c = averaged_correlation_constant(kConstantsPrimeCut);
    long double prod = c1.value * c1p.value, prod_lo = c1.lo * c1p.lo, prod_hi = c1.hi * c1p.hi;
    bool overlap = prod_lo <= c.hi && c.lo <= prod_hi;
    long double width = (prod_hi - prod_lo) + (c.hi - c.lo);
    bool within = std::fabs(prod - c.value) <= width;
    o.notes.push_back("closed-form checks: " + std::to_string(checked) + ", mismatches: " + std::to_string(failures));
    o.notes.push_back("c_1 c_1' = " + fmt(prod) + " in [" + fmt(prod_lo) + ", " + fmt(prod_hi) + "]; product constant " +
                      fmt(c.value) + " in [" + fmt(c.lo) + ", " + fmt(c.hi) + "]; |difference| " +
                      fmt(std::fabs(prod - c.value)) + " vs combined width " + fmt(width));
    o.pass = failures == 0 && overlap && within;
    out << fmt(prod) << ' ' << fmt(c.value);
    o.output = out.str();
    return o;
}

Outcome criterion6(unsigned) {
    Outcome o;
    std::ostringstream out;
    std::mt19937_64 rng(kIdentitySeed);
    std::uniform_int_distribution<i64> pick(1, kIdentityMax);
    i64 failures = 0;
    for (int i = 0; i < kIdentityTriples; ++i) {
        Triple n{pick(rng), pick(rng), pick(rng)};
        i128 lhs = i128(tau_trial(u64(n[0]) * u64(n[1]) * u64(n[2])));
        i128 rhs = tau_product_identity(n);
        if (lhs != rhs && ++failures <= 5)
            o.notes.push_back("mismatch at (" + std::to_string(n[0]) + "," + std::to_string(n[1]) + "," +
                              std::to_string(n[2]) + ")");
        out << to_string(rhs) << ' ';
    }
    o.pass = failures == 0;
    o.notes.insert(o.notes.begin(), "triples: " + std::to_string(kIdentityTriples) + ", seed " +
                                        std::to_string(kIdentitySeed) + ", mismatches: " + std::to_string(failures));
    o.output = out.str();
    return o;
}

void trend_notes(Outcome& o, const ComparisonReport& r, const char* what) {
    for (auto& t : r.trend)
        o.notes.push_back(std::string(what) + " = " + fmt(t.x) + ": value " +
                          (t.exact ? to_string(*t.exact) : fmt(t.value)) + ", normalised ratio " + fmt(t.ratio));
}

Outcome criterion7(unsigned threads) {
    Outcome o;
    ExperimentConfig c;
    c.name = "theorem1";
    c.forms = FormTriple::sum_triple();
    c.grid = GridSpec::parse("1024:131072:2");
    c.prime_cut = kConstantsPrimeCut;
    ComparisonReport r = run_experiment(c, {threads, false, nullptr});
    o.output = render_report(r, "json");
    if (!r.completed || !r.ratio) {
        o.notes.push_back("experiment did not complete: " + r.error);
        return o;
    }
    long double dev = std::fabs(*r.ratio - 1);
    bool mono = r.monotone_tail.value_or(false);
    o.pass = dev <= kTauSumTolerance && mono;
    o.notes.push_back("fitted leading " + fmt(*r.fitted_leading) + ", singular series " + fmt(*r.predicted_leading) +
                      " +- " + fmt(*r.predicted_error) + ", ratio " + fmt(*r.ratio) + " (tolerance " +
                      fmt(kTauSumTolerance) + ")");
    o.notes.push_back(std::string("|ratio - 1| nonincreasing over the last three points: ") + (mono ? "yes" : "no"));
    for (auto& [k, v] : r.diagnostics) o.notes.push_back(k + " = " + fmt(v));
    trend_notes(o, r, "X");
    return o;
}

Outcome criterion8(unsigned threads) {
    Outcome o;
    ExperimentConfig c;
    c.name = "theorem2";
    c.grid = GridSpec{{10'000, 100'000}};
    c.alpha = kShiftExponent;
    c.prime_cut = kConstantsPrimeCut;
    ComparisonReport r = run_experiment(c, {threads, false, nullptr});
    o.output = render_report(r, "json");
    if (!r.completed || r.trend.size() != 2) {
        o.notes.push_back("experiment did not complete: " + r.error);
        return o;
    }
    long double r4 = r.trend[0].ratio, r5 = r.trend[1].ratio;
    bool in_range = r5 >= kCorrelationLo && r5 <= kCorrelationHi;
    bool closer = std::fabs(r5 - 1) < std::fabs(r4 - 1);
    o.pass = in_range && closer;
    o.notes.push_back("c = " + fmt(*r.predicted_leading) + " +- " + fmt(*r.predicted_error));
    o.notes.push_back("ratio at X = 1e4 (H = " + std::to_string(ceil_power(10'000, kShiftExponent)) + "): " + fmt(r4));
    o.notes.push_back("ratio at X = 1e5 (H = " + std::to_string(ceil_power(100'000, kShiftExponent)) + "): " + fmt(r5) +
                      (in_range ? " in range" : " out of range") + (closer ? ", closer to 1" : ", not closer to 1"));
    for (auto& [k, v] : r.diagnostics) o.notes.push_back(k + " = " + fmt(v));
    return o;
}

Outcome criterion9(unsigned threads) {
    Outcome o;
    std::ostringstream out;
    i64 failures = 0;
    for (i64 X = 1; X <= kReductionMaxX; ++X) {
        try {
            ReductionReport rr = reduction_check(X, threads);
            out << to_string(rr.n0) << ' ';
        } catch (const InvariantViolation& e) {
            if (++failures <= 5) o.notes.push_back(e.what());
        }
    }
    o.notes.push_back("reduction identity checked for every X <= " + std::to_string(kReductionMaxX) + ", failures: " +
                      std::to_string(failures));

    ExperimentConfig n0;
    n0.name = "bilinear-n0";
    n0.grid = GridSpec{{100, 1000, 10'000}};
    n0.prime_cut = kConstantsPrimeCut;
    ComparisonReport a = run_experiment(n0, {threads, false, nullptr});
    ExperimentConfig nb;
    nb.name = "theorem4";
    nb.grid = GridSpec{{10'000, 100'000, 1'000'000}};
    nb.prime_cut = kConstantsPrimeCut;
    ComparisonReport b = run_experiment(nb, {threads, false, nullptr});
    out << render_report(a, "json") << render_report(b, "json");
    o.output = out.str();
    if (!a.completed || !b.completed) {
        o.notes.push_back("experiment did not complete: " + a.error + b.error);
        return o;
    }
    auto check = [&](const ComparisonReport& r, const char* label) {
        long double last = r.trend.back().ratio;
        bool in_range = last >= kBilinearLo && last <= kBilinearHi;
        bool mono = r.monotone_tail.value_or(false);
        o.notes.push_back(std::string(label) + ": prediction " + fmt(*r.predicted_leading) + ", last ratio " + fmt(last) +
                          (in_range ? " in range" : " out of range") + (mono ? ", trending toward 1" : ", not trending toward 1"));
        trend_notes(o, r, label[0] == 'N' && label[1] == '0' ? "X" : "B");
        return in_range && mono;
    };
    bool ok_a = check(a, "N0(X) / (8 c0 X^2 log X)");
    bool ok_b = check(b, "N(B) / (c B log B)");
    for (auto& [k, v] : a.diagnostics) o.notes.push_back(k + " = " + fmt(v));
    o.pass = failures == 0 && ok_a && ok_b;
    return o;
}

Outcome criterion10(unsigned threads) {
    Outcome o;
    ExperimentConfig c;
    c.name = "lod";
    c.forms = FormTriple::progression();
    c.region = Region::positive_unit_square();
    c.family = RegionFamily::large_third;
    c.q_factor = 2;
    c.grid = GridSpec{{256, 1024, 4096}};
    ComparisonReport r = run_experiment(c, {threads, false, nullptr});
    o.output = render_report(r, "json");
    if (!r.completed || r.trend.size() != 3) {
        o.notes.push_back("experiment did not complete: " + r.error);
        return o;
    }
    bool decreasing = r.trend[1].ratio < r.trend[0].ratio && r.trend[2].ratio < r.trend[1].ratio;
    o.pass = decreasing;
    for (auto& t : r.trend)
        o.notes.push_back("X = " + fmt(t.x) + ", Q_i = " + fmt(std::sqrt(2 * t.x)) + ": discrepancy " + fmt(t.value) +
                          ", / (X^2 log^3 X) = " + fmt(t.ratio) + ", / X^(7/4) = " +
                          fmt(t.value / std::pow(t.x, 1.75L)));
    o.notes.push_back(std::string("strictly decreasing: ") + (decreasing ? "yes" : "no"));
    return o;
}

struct Criterion {
    int id;
    const char* title;
    double limit_seconds;
    std::function<Outcome(unsigned)> run;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "rho oracle equivalence", kLimit1, criterion1},
        {2, "prime-power density closed form and bound", kLimit2, criterion2},
        {3, "local factors of the progression triple", kLimit3, criterion3},
        {4, "generating identity on the box [0,30]^3", kLimit4, criterion4},
        {5, "(f*mu) closed forms and c_1 c_1' product", kLimit5, criterion5},
        {6, "tau(n1 n2 n3) identity", kLimit6, criterion6},
        {7, "T(X) leading coefficient", kLimit7, criterion7},
        {8, "averaged triple correlation", kLimit8, criterion8},
        {9, "bilinear reduction and counts", kLimit9, criterion9},
        {10, "level of distribution discrepancy", kLimit10, criterion10},
    };
    std::vector<std::string> outputs;
    int failed = 0;
    for (auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run(1);
        } catch (const std::exception& e) {
            o.pass = false;
            o.notes.push_back(std::string("error: ") + e.what());
        }
        double el = seconds_since(t0);
        bool in_time = el <= c.limit_seconds;
        bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("criterion %2d: %s  %s (%.1f s, limit %.0f s%s)\n", c.id, pass ? "PASS" : "FAIL", c.title, el,
                    c.limit_seconds, in_time ? "" : ", over time");
        for (auto& n : o.notes) std::printf("    %s\n", n.c_str());
        std::fflush(stdout);
        outputs.push_back(o.output);
    }

    // criterion 11: rerun everything with 2 and 8 workers
    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> differing;
    for (unsigned workers : {2u, 8u})
        for (std::size_t i = 0; i < criteria.size(); ++i) {
            std::string out;
            try {
                out = criteria[i].run(workers).output;
            } catch (const std::exception& e) {
                out = std::string("error: ") + e.what();
            }
            if (out != outputs[i])
                differing.push_back(std::to_string(criteria[i].id) + " at " + std::to_string(workers) + " workers");
        }
    bool same = differing.empty();
    failed += !same;
    std::printf("criterion 11: %s  determinism across 1, 2 and 8 workers (%.1f s)\n", same ? "PASS" : "FAIL",
                seconds_since(t0));
    for (auto& d : differing) std::printf("    output differs: criterion %s\n", d.c_str());
    std::printf("%d of 11 criteria failed\n", failed);
    return failed ? 1 : 0;
}
