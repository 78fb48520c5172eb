#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "congruence_lab/sqrt_expsums.hpp"

using namespace congruence_lab;

namespace {

std::complex<double> e(i64 x, i64 q) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(((x % q) + q) % q) / static_cast<double>(q);
    return {std::cos(t), std::sin(t)};
}

int legendre(i64 a, i64 p) {
    a = ((a % p) + p) % p;
    if (a == 0) return 0;
    i64 r = 1;
    for (i64 i = 0; i < (p - 1) / 2; ++i) r = r * a % p;
    return r == 1 ? 1 : -1;
}

// Double loop over k and over every u mod p^s, testing u^2 = k Lambda directly.
std::complex<double> brute_sum(const SqrtSumParams& P) {
    const i64 p = static_cast<i64>(P.p);
    i64 q = 1;
    for (int i = 0; i < P.s; ++i) q *= p;
    std::complex<double> total = 0;
    for (i64 k = 1; k <= P.K; ++k) {
        if (k % p == 0 || (((k - P.b) % P.c) + P.c) % P.c != 0) continue;
        const i64 target = ((k * P.Lambda) % q + q) % q;
        for (i64 u = 0; u < q; ++u) {
            if (u * u % q != target) continue;
            if (P.a && ((u - *P.a) % p + p) % p != 0) continue;
            double tw = 1;
            if (P.mu == 1)
                for (int i = 0; i < P.s; ++i) tw *= legendre(u, p);
            total += tw * e(u, q);
        }
    }
    return total;
}

u64 brute_pairs(const SqrtSumParams& P) {
    const i64 p = static_cast<i64>(P.p);
    i64 q = 1;
    for (int i = 0; i < P.s; ++i) q *= p;
    u64 n = 0;
    for (i64 u = 1; u < q; ++u) {
        if (u % p == 0) continue;
        if (P.a && ((u - *P.a) % p + p) % p != 0) continue;
        for (i64 k = 1; k <= P.K; ++k)
            if ((((k - P.b) % P.c) + P.c) % P.c == 0 && (u * u - k * P.Lambda) % q == 0) ++n;
    }
    return n;
}

std::vector<SqrtSumParams> small_cases(u64 seed, int count) {
    Lcg64 rng(seed);
    std::vector<SqrtSumParams> out;
    const u64 primes[] = {3, 5, 7};
    while (static_cast<int>(out.size()) < count) {
        SqrtSumParams P;
        P.p = primes[rng.below(3)];
        P.s = static_cast<int>(2 + rng.below(4));
        i64 q = 1;
        for (int i = 0; i < P.s; ++i) q *= static_cast<i64>(P.p);
        if (q > 6561) continue;
        do P.Lambda = static_cast<i64>(rng.below(200)) - 100;
        while (P.Lambda % static_cast<i64>(P.p) == 0);
        if (rng.below(4) != 0) P.a = static_cast<i64>(1 + rng.below(P.p - 1));
        P.c = static_cast<i64>(1 + rng.below(static_cast<u64>(q / 3)));
        if (rng.below(2)) P.c = 1 + static_cast<i64>(rng.below(12));
        P.b = static_cast<i64>(rng.below(40)) - 20;
        P.K = static_cast<i64>(1 + rng.below(static_cast<u64>(q)));
        P.mu = static_cast<int>(rng.below(2));
        out.push_back(P);
    }
    return out;
}

void expect_close(std::complex<double> a, std::complex<double> b, double tol) {
    EXPECT_NEAR(a.real(), b.real(), tol);
    EXPECT_NEAR(a.imag(), b.imag(), tol);
}

}  // namespace

TEST(SqrtRootSum, NineExample) {
    SqrtSumParams P;
    P.p = 3;
    P.s = 2;
    P.Lambda = 1;
    P.a = 1;
    P.b = 1;
    P.c = 1;
    P.K = 9;
    expect_close(sqrt_root_sum(P), e(1, 9) + e(7, 9) + e(4, 9), 1e-12);
    EXPECT_EQ(sqrt_root_pair_count(P), 3u);
}

TEST(SqrtRootSum, EmptyRange) {
    SqrtSumParams P;
    P.p = 5;
    P.s = 2;
    P.b = 5;
    P.c = 7;
    P.K = 3;
    EXPECT_EQ(sqrt_root_sum(P), std::complex<double>(0.0));
    EXPECT_EQ(sqrt_root_sum_linearized(P), std::complex<double>(0.0));
    EXPECT_EQ(sqrt_root_pair_count(P), 0u);
}

TEST(SqrtRootSum, AllRoutesMatchBruteForce) {
    for (const auto& P : small_cases(11, 300)) {
        const auto want = brute_sum(P);
        SCOPED_TRACE(::testing::Message() << "p=" << P.p << " s=" << P.s << " L=" << P.Lambda << " b=" << P.b
                                          << " c=" << P.c << " K=" << P.K << " mu=" << P.mu);
        expect_close(sqrt_root_sum(P), want, 1e-9);
        expect_close(sqrt_root_sum_by_roots(P), want, 1e-9);
        expect_close(sqrt_root_sum_linearized(P), want, 1e-8);
        expect_close(sqrt_root_sum_auto(P), want, 1e-8);
    }
}

TEST(SqrtRootSum, ClassesAddUpToFullSum) {
    for (auto P : small_cases(23, 100)) {
        P.a.reset();
        P.mu = 0;
        const auto full = sqrt_root_sum(P);
        std::complex<double> parts = 0;
        for (i64 a = 1; a < static_cast<i64>(P.p); ++a) {
            auto Q = P;
            Q.a = a;
            parts += sqrt_root_sum(Q);
        }
        expect_close(parts, full, 1e-9);
    }
}

TEST(SqrtRootSum, TwistedAggregateDecomposes) {
    for (auto P : small_cases(31, 100)) {
        P.a.reset();
        P.mu = 1;
        const auto twisted = sqrt_root_sum_by_roots(P);
        std::complex<double> parts = 0;
        for (i64 a = 1; a < static_cast<i64>(P.p); ++a) {
            auto Q = P;
            Q.a = a;
            Q.mu = 0;
            double chi = 1;
            for (int i = 0; i < P.s; ++i) chi *= legendre(a, static_cast<i64>(P.p));
            parts += chi * sqrt_root_sum(Q);
        }
        expect_close(parts, twisted, 1e-9);
    }
}

TEST(SqrtRootSum, PairCountMatchesEnumeration) {
    for (const auto& P : small_cases(47, 60)) {
        if (P.K > 800) continue;
        EXPECT_EQ(sqrt_root_pair_count(P), brute_pairs(P));
    }
}

TEST(SqrtRootSum, DegenerateProgression) {
    for (auto P : small_cases(59, 100)) {
        P.c = P.K + 1 + static_cast<i64>(P.p);
        EXPECT_LE(std::abs(sqrt_root_sum(P)), 2.0 + 1e-12);
    }
}

TEST(SqrtRootSum, Validation) {
    SqrtSumParams P;
    P.p = 3;
    P.s = 2;
    P.Lambda = 3;
    EXPECT_THROW(sqrt_root_sum(P), error);
    P.Lambda = 1;
    P.K = 10;
    EXPECT_THROW(sqrt_root_sum(P), error);
    P.K = 9;
    P.s = 1;
    EXPECT_THROW(sqrt_root_sum(P), error);
    P.s = 2;
    P.a = 6;
    EXPECT_THROW(sqrt_root_sum(P), error);
}

TEST(Lcg, Sequence) {
    Lcg64 rng(0);
    EXPECT_EQ(rng.next(), 1442695040888963407ULL);
    EXPECT_EQ(rng.next(), 1442695040888963407ULL * 6364136223846793005ULL + 1442695040888963407ULL);
    Lcg64 r2(42);
    for (int i = 0; i < 1000; ++i) EXPECT_LT(r2.below(7), 7u);
}

TEST(BoundScan, DeterministicAndBounded) {
    auto rows = bound_scan(3, 2, 10, 50, 2024);
    ASSERT_EQ(rows.size(), 9u * 50u);
    EXPECT_LT(bound_scan_max(rows), 10.0);
    EXPECT_EQ(bound_scan_csv(rows), bound_scan_csv(bound_scan(3, 2, 10, 50, 2024)));
    set_threads(1);
    EXPECT_EQ(bound_scan_csv(rows), bound_scan_csv(bound_scan(3, 2, 10, 50, 2024)));
    set_threads(0);
    for (const auto& r : rows) EXPECT_GE(r.normalized, 0.0);
}

TEST(BoundScan, RowsAgreeWithDirectRoute) {
    for (const auto& row : bound_scan(5, 2, 6, 20, 7)) expect_close(row.sum_value, sqrt_root_sum(row.params), 1e-7);
}

TEST(BoundScan, CsvHeader) {
    auto csv = bound_scan_csv(bound_scan(3, 2, 2, 1, 1));
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "p,s,Lambda,a,b,c,K,mu,re,im,abs,normalized");
}
