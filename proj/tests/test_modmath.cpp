#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "congruence_lab/modmath.hpp"

using namespace congruence_lab;

namespace {

u128 power_by_multiplication(u128 base, u64 exp, u128 m) {
    u128 r = 1 % m;
    for (u64 i = 0; i < exp; ++i) r = r * base % m;
    return r;
}

int legendre_by_euler(i64 a, i64 p) {
    i64 x = ((a % p) + p) % p;
    if (x == 0) return 0;
    i64 r = 1;
    for (i64 i = 0; i < (p - 1) / 2; ++i) r = r * x % p;
    return r == 1 ? 1 : -1;
}

std::set<u128> squares_by_search(i64 r, i64 q) {
    std::set<u128> out;
    i64 rr = ((r % q) + q) % q;
    for (i64 u = 0; u < q; ++u)
        if (u * u % q == rr) out.insert(static_cast<u128>(u));
    return out;
}

}  // namespace

TEST(ModPow, Examples) {
    EXPECT_EQ(mod_pow(Residue{2, 7}, 10).value, power_by_multiplication(2, 10, 7));
    EXPECT_EQ(mod_pow(Residue{2, 7}, 10).value, 2u);
    EXPECT_EQ(mod_pow(Residue{5, 9}, 0).value, 1u);
    EXPECT_EQ(mod_pow(Residue{3, 49}, 2).value, 9u);
}

TEST(ModPow, MatchesRepeatedMultiplication) {
    for (u64 m : {7u, 9u, 25u, 343u, 1000003u})
        for (u64 b = 0; b < 30; ++b)
            for (u64 e = 0; e < 40; ++e) EXPECT_EQ(mod_pow(Residue{b % m, m}, e).value, power_by_multiplication(b % m, e, m));
}

TEST(ModPow, LargeModulusNoOverflow) {
    PrimePowerModulus mod(1000003, 6);
    u128 q = mod.q();
    Residue x = Residue::make(static_cast<i128>(q - 1), q);
    EXPECT_EQ(mod_pow(x, 2).value, 1u);
    EXPECT_EQ(mod_pow(x, 3).value, q - 1);
}

TEST(ModInverse, Examples) {
    EXPECT_EQ(mod_inverse(Residue{2, 9}).value, 5u);
    EXPECT_EQ(mod_inverse(Residue{1, 81}).value, 1u);
    try {
        mod_inverse(Residue{3, 9});
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::not_invertible);
    }
}

TEST(ModInverse, ExhaustiveSearch) {
    for (u64 m : {9u, 25u, 49u, 121u})
        for (u64 a = 1; a < m; ++a) {
            if (std::gcd(a, m) != 1) continue;
            u64 found = 0;
            for (u64 x = 1; x < m; ++x)
                if (a * x % m == 1) found = x;
            EXPECT_EQ(mod_inverse(Residue{a, m}).value, found);
        }
}

TEST(Jacobi, Examples) {
    EXPECT_EQ(jacobi_symbol(2, 15), legendre_by_euler(2, 3) * legendre_by_euler(2, 5));
    EXPECT_EQ(jacobi_symbol(2, 15), 1);
    EXPECT_EQ(jacobi_symbol(1, 21), 1);
    EXPECT_EQ(jacobi_symbol(3, 9), 0);
    try {
        jacobi_symbol(3, 10);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::even_modulus);
    }
}

TEST(Jacobi, MatchesEulerOnPrimes) {
    for (i64 p : {3, 5, 7, 11, 13, 101})
        for (i64 a = -50; a < 150; ++a) EXPECT_EQ(jacobi_symbol(a, p), legendre_by_euler(a, p)) << a << " " << p;
}

TEST(Jacobi, MultiplicativeInNumerator) {
    for (i64 c = 1; c <= 225; c += 2)
        for (i64 a = 0; a < c; ++a)
            for (i64 b = 0; b < c; ++b) ASSERT_EQ(jacobi_symbol(a * b, c), jacobi_symbol(a, c) * jacobi_symbol(b, c));
}

TEST(Epsilon, Examples) {
    EXPECT_EQ(epsilon_c(9), EpsilonFactor::one);
    EXPECT_EQ(epsilon_c(7), EpsilonFactor::i);
    EXPECT_EQ(epsilon_c(25), EpsilonFactor::one);
    EXPECT_THROW(epsilon_c(4), error);
}

TEST(AdditiveCharacter, Examples) {
    auto z = additive_character(1, 4);
    EXPECT_NEAR(z.real(), 0.0, 1e-12);
    EXPECT_NEAR(z.imag(), 1.0, 1e-12);
    EXPECT_EQ(additive_character(0, 17), std::complex<double>(1.0, 0.0));
    auto w = additive_character(1, 3);
    EXPECT_NEAR(w.real(), std::cos(2 * M_PI / 3), 1e-9);
    EXPECT_NEAR(w.imag(), std::sin(2 * M_PI / 3), 1e-9);
}

TEST(AdditiveCharacter, PeriodicExactly) {
    for (u128 q : {u128(3), u128(7), u128(729), u128(1) << 100})
        for (i128 a : {i128(0), i128(1), i128(-5), i128(123456789)}) {
            EXPECT_EQ(additive_character(a + static_cast<i128>(q), q), additive_character(a, q));
            EXPECT_EQ(additive_character(a - 3 * static_cast<i128>(q), q), additive_character(a, q));
        }
}

TEST(SqrtModPrime, Examples) {
    EXPECT_EQ(sqrt_mod_prime(Residue{2, 7})->value, 3u);
    EXPECT_EQ(sqrt_mod_prime(Residue{0, 11})->value, 0u);
    EXPECT_FALSE(sqrt_mod_prime(Residue{2, 5}).has_value());
}

TEST(SqrtModPrime, CanonicalRootBySearch) {
    for (u64 p : {3u, 5u, 7u, 11u, 13u, 17u, 97u, 1009u, 65537u}) {
        for (u64 a = 0; a < std::min<u64>(p, 400); ++a) {
            auto roots = squares_by_search(static_cast<i64>(a), static_cast<i64>(p));
            auto got = sqrt_mod_prime(Residue{a, p});
            if (roots.empty()) {
                EXPECT_FALSE(got.has_value());
            } else {
                ASSERT_TRUE(got.has_value());
                EXPECT_TRUE(roots.count(got->value));
                EXPECT_LE(got->value, p / 2);
            }
        }
    }
}

TEST(HenselLift, Examples) {
    EXPECT_EQ(hensel_lift_sqrt(Residue{3, 7}, 2, PrimePowerModulus(7, 2)).value, 10u);
    EXPECT_EQ(hensel_lift_sqrt(Residue{1, 5}, 1, PrimePowerModulus(5, 7)).value, 1u);
    EXPECT_EQ(hensel_lift_sqrt(Residue{1, 3}, 7, PrimePowerModulus(3, 3)).value, 13u);
}

TEST(HenselLift, Errors) {
    try {
        hensel_lift_sqrt(Residue{0, 7}, 0, PrimePowerModulus(7, 2));
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::not_coprime_root);
    }
    try {
        hensel_lift_sqrt(Residue{2, 7}, 2, PrimePowerModulus(7, 2));
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::lift_mismatch);
    }
}

TEST(HenselLift, TowerCoherenceBySearch) {
    for (u64 p : {3u, 5u, 7u, 11u}) {
        for (i64 r = 1; r < static_cast<i64>(p * p); ++r) {
            if (r % static_cast<i64>(p) == 0) continue;
            auto w = sqrt_mod_prime(Residue{static_cast<u128>(r) % p, p});
            if (!w) continue;
            u128 prev = w->value;
            for (int s = 2; s <= 12; ++s) {
                PrimePowerModulus target(p, s);
                if (target.q() > 100000) break;
                u128 u = hensel_lift_sqrt(*w, r, target).value;
                EXPECT_EQ(u % target.power(s - 1), prev);
                auto roots = squares_by_search(r, static_cast<i64>(target.q()));
                EXPECT_TRUE(roots.count(u));
                u128 agreeing = 0;
                for (u128 x : roots) agreeing += (x % p == w->value);
                EXPECT_EQ(agreeing, 1u);
                prev = u;
            }
        }
    }
}

TEST(HenselLift, HugeExponent) {
    PrimePowerModulus target(3, 60);
    Residue u = hensel_lift_sqrt(Residue{1, 3}, 7, target);
    EXPECT_EQ(mul_mod(u.value, u.value, target.q()), 7u);
}

TEST(RootClasses, Examples) {
    auto s = sqrt_classes_mod_prime_power(2, PrimePowerModulus(7, 2));
    ASSERT_EQ(s.progressions.size(), 2u);
    EXPECT_EQ(s.residues(), (std::vector<u128>{10, 39}));
    EXPECT_EQ(s.progressions[0].step, 49u);

    auto z = sqrt_classes_mod_prime_power(0, PrimePowerModulus(3, 2));
    ASSERT_EQ(z.progressions.size(), 1u);
    EXPECT_EQ(z.progressions[0].offset, 0u);
    EXPECT_EQ(z.progressions[0].step, 3u);
    EXPECT_EQ(z.residues(), (std::vector<u128>{0, 3, 6}));

    EXPECT_TRUE(sqrt_classes_mod_prime_power(3, PrimePowerModulus(3, 2)).empty());
}

TEST(RootClasses, ExhaustiveBySearch) {
    for (u64 p : {3u, 5u, 7u, 11u}) {
        for (int s = 1; s <= 6; ++s) {
            PrimePowerModulus mod(p, s);
            if (mod.q() > 20000) break;
            const i64 q = mod.q64();
            for (i64 r = 0; r < q; ++r) {
                auto set = sqrt_classes_mod_prime_power(r, mod);
                auto res = set.residues();
                std::set<u128> got(res.begin(), res.end());
                ASSERT_EQ(got.size(), res.size());
                ASSERT_EQ(got, squares_by_search(r, q)) << "p=" << p << " s=" << s << " r=" << r;
                if (r % static_cast<i64>(p) != 0) {
                    EXPECT_EQ(set.size(), legendre_by_euler(r, p) == 1 ? 2u : 0u);
                    for (const auto& pr : set.progressions) EXPECT_EQ(pr.step, mod.q());
                }
            }
        }
    }
}

TEST(RootClasses, RangeEnumeration) {
    auto set = sqrt_classes_mod_prime_power(0, PrimePowerModulus(3, 3));
    std::vector<i64> got;
    set.for_each_in_range(-10, 10, [&](i64 x) { got.push_back(x); });
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, (std::vector<i64>{-9, 0, 9}));
}

TEST(PrimePowerModulus, Validation) {
    EXPECT_THROW(PrimePowerModulus(9, 2), error);
    EXPECT_THROW(PrimePowerModulus(2, 2), error);
    EXPECT_THROW(PrimePowerModulus(3, 0), error);
    EXPECT_THROW(PrimePowerModulus(3, 61), error);
    EXPECT_THROW(PrimePowerModulus(1048583, 1), error);
    EXPECT_EQ(PrimePowerModulus(5, 3).q(), 125u);
}
