#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>

#include <nlohmann/json.hpp>

#include "congruence_lab/representations.hpp"
#include "congruence_lab/sqrt_expsums.hpp"

using namespace congruence_lab;

namespace {

// Box enumeration of unit-coordinate solutions of sum d_j l_j^2 = k.
template <class Fn>
void box_representations(i64 k, const std::vector<i64>& d, i64 p, Fn&& fn) {
    const std::size_t n = d.size();
    std::vector<i64> bound(n), l(n);
    for (std::size_t j = 0; j < n; ++j) bound[j] = static_cast<i64>(std::sqrt(static_cast<double>(k) / d[j])) + 1;
    for (std::size_t j = 0; j < n; ++j) l[j] = -bound[j];
    while (true) {
        i64 v = 0;
        bool units = true;
        for (std::size_t j = 0; j < n; ++j) {
            v += d[j] * l[j] * l[j];
            if (l[j] % p == 0) units = false;
        }
        if (units && v == k) fn(l);
        std::size_t j = 0;
        for (; j < n; ++j) {
            if (++l[j] <= bound[j]) break;
            l[j] = -bound[j];
        }
        if (j == n) break;
    }
}

double composite_simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
    const double h = (b - a) / intervals;
    double s = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Density at t of sum d_j x_j^2 under prod Omega(x_j) dx_j, by convolving the one-dimensional
// densities g_j(u) = Omega(sqrt(u/d_j)) / sqrt(u d_j) with substitutions that remove the
// inverse square-root endpoints.
double shell_density_by_convolution(double t, const std::vector<i64>& d, const std::function<double(double)>& omega) {
    auto g12 = [&](double s) {
        return composite_simpson(
            [&](double phi) {
                const double x1 = std::sqrt(s / d[0]) * std::sin(phi), x2 = std::sqrt(s / d[1]) * std::cos(phi);
                return 2.0 * omega(x1) * omega(x2) / std::sqrt(static_cast<double>(d[0] * d[1]));
            },
            0.0, std::numbers::pi / 2, 400);
    };
    if (d.size() == 2) return g12(t);
    // d.size() == 3: integrate g12(t - v^2) * 2 Omega(v / sqrt(d3)) / sqrt(d3) over v in [0, sqrt(t)]
    return composite_simpson(
        [&](double v) { return g12(t - v * v) * 2.0 * omega(v / std::sqrt(static_cast<double>(d[2]))) / std::sqrt(static_cast<double>(d[2])); },
        0.0, std::sqrt(t), 400);
}

}  // namespace

TEST(DualForm, FromDiagonalForm) {
    auto dual = DualForm::from_form(DiagonalForm({1, 2}, 3), PrimePowerModulus(5, 2));
    EXPECT_EQ(dual.deltas, (std::vector<i64>{6, 3}));
    EXPECT_EQ(dual.Lambda, 13);  // Delta_{n+1} = 2, 2 * 13 = 26 = 1 mod 25
    EXPECT_TRUE(dual.positive_definite());
    EXPECT_THROW(DualForm::from_form(DiagonalForm({1, 5}, 3), PrimePowerModulus(5, 2)), error);
    EXPECT_FALSE(DualForm::from_form(DiagonalForm({1, 2}, -3), PrimePowerModulus(5, 2)).positive_definite());
}

TEST(Tau, SmallExamples) {
    EXPECT_EQ(representation_count(2, DualForm({1, 1}), 3), 4u);
    EXPECT_EQ(representation_count(4, DualForm({1, 1, 1, 1}), 3), 16u);
    EXPECT_EQ(representation_count(1, DualForm({2, 3, 5}), 7), 0u);
    EXPECT_EQ(representation_count(9, DualForm({1, 1}), 3), 0u);  // (±3, 0) has non-unit coordinates
}

TEST(Tau, IndefiniteRejected) {
    try {
        representation_count(5, DualForm({1, -1}), 3);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::indefinite_form);
    }
}

TEST(Tau, ConeDescentMatchesBox) {
    const std::vector<std::vector<i64>> forms = {{1, 1}, {1, 2}, {3, 1, 2}, {1, 1, 1, 1}, {2, 5, 1, 3}, {7, 1, 1}};
    for (const auto& d : forms)
        for (i64 p : {3, 5, 7}) {
            DualForm dual(d);
            for (i64 k = 1; k <= 200; ++k) {
                u64 want = 0;
                box_representations(k, d, p, [&](const std::vector<i64>&) { ++want; });
                ASSERT_EQ(representation_count(k, dual, static_cast<u64>(p)), want) << "k=" << k << " p=" << p;
            }
        }
}

TEST(Tau, WeightedMatchesDefinition) {
    const PrimePowerModulus mod(3, 4);
    const std::vector<i64> d = {1, 2, 2, 1};
    DualForm dual(d);
    for (const auto& w : {WeightSpec::gaussian(1.0), WeightSpec::bump_pair(1.0)})
        for (int r : {0, 1, 2})
            for (i64 k : {5, 17, 40, 77}) {
                const double N = 9.0;
                double want = 0;
                box_representations(k, d, 3, [&](const std::vector<i64>& l) {
                    double prod = 1;
                    for (i64 v : l) prod *= w.fourier(static_cast<double>(mod.power(r)) * v * N / static_cast<double>(mod.q()));
                    want += prod;
                });
                EXPECT_NEAR(tau_n(k, dual, r, w, mod, N), want, 1e-12 * (1 + want));
            }
}

TEST(Tau, BudgetExceeded) {
    Budget tiny{100};
    EXPECT_THROW(representation_count(100000, DualForm({1, 1, 1, 1}), 3, tiny), error);
}

TEST(SingularCoefficient, TrivialModulus) {
    for (u64 p : {3u, 5u, 7u})
        for (std::size_t n : {4u, 5u, 6u}) {
            DualForm dual(std::vector<i64>(n, 1));
            EXPECT_NEAR(singular_coefficient(1, 7, dual, p), std::pow((p - 1.0) / p, n), 1e-14);
        }
}

TEST(SingularCoefficient, PeriodicInK) {
    DualForm dual({1, 2, 1, 4});
    for (i64 q : {2, 6, 9, 10, 15})
        for (i64 k = 0; k < 20; ++k) EXPECT_NEAR(singular_coefficient(q, k, dual, 5), singular_coefficient(q, k + q, dual, 5), 1e-14);
}

TEST(SingularCoefficient, FactorizedMatchesNaive) {
    EXPECT_NEAR(singular_coefficient(5, 1, DualForm({1, 1, 1, 1}), 3), singular_coefficient_naive(5, 1, DualForm({1, 1, 1, 1}), 3), 1e-9);
    for (u64 p : {3u, 5u})
        for (const auto& d : {std::vector<i64>{1, 1, 1, 1}, std::vector<i64>{1, 2, 2, 7}, std::vector<i64>{1, 1, 1, 1, 1, 1}})
            for (i64 q = 1; q * static_cast<i64>(p) <= 15; ++q)
                for (i64 k : {0, 1, 2, 5}) {
                    DualForm dual(d);
                    EXPECT_NEAR(singular_coefficient(q, k, dual, p), singular_coefficient_naive(q, k, dual, p), 1e-9)
                        << "q=" << q << " p=" << p << " k=" << k;
                }
}

TEST(SingularCoefficient, DirectDefinitionOracle) {
    // a_q(k) straight from the definition, without histograms, for a few tiny cases
    const u64 p = 3;
    const std::vector<i64> d = {1, 1, 2, 1};
    for (i64 q : {2, 4}) {
        const i64 pq = q * static_cast<i64>(p);
        for (i64 k : {1, 3}) {
            std::complex<double> total = 0;
            for (i64 a = 1; a < q; ++a) {
                if (std::gcd(a, q) != 1) continue;
                for (i64 x0 = 0; x0 < pq; ++x0)
                    for (i64 x1 = 0; x1 < pq; ++x1)
                        for (i64 x2 = 0; x2 < pq; ++x2)
                            for (i64 x3 = 0; x3 < pq; ++x3) {
                                if (x0 % 3 == 0 || x1 % 3 == 0 || x2 % 3 == 0 || x3 % 3 == 0) continue;
                                const i64 F = d[0] * x0 * x0 + d[1] * x1 * x1 + d[2] * x2 * x2 + d[3] * x3 * x3;
                                const double th = 2 * std::numbers::pi * static_cast<double>(((a * (F - k)) % q + q) % q) / q;
                                total += std::complex<double>(std::cos(th), std::sin(th));
                            }
            }
            const double want = total.real() / std::pow(static_cast<double>(pq), 4);
            EXPECT_NEAR(singular_coefficient(q, k, DualForm(d), p), want, 1e-12);
        }
    }
}

TEST(SingularSeries, SixVariableConsistency) {
    DualForm dual(std::vector<i64>(6, 1));
    for (i64 k : {1, 2, 7}) {
        auto s20 = singular_series(k, dual, 3, 20);
        auto s40 = singular_series(k, dual, 3, 40);
        auto s80 = singular_series(k, dual, 3, 80);
        EXPECT_LT(std::abs(s40.partial_sum - s20.partial_sum), s20.tail_bound);
        EXPECT_LT(std::abs(s80.partial_sum - s40.partial_sum), s40.tail_bound);
        EXPECT_LT(std::abs(s80.partial_sum - s20.partial_sum), s20.tail_bound);
    }
}

TEST(SingularSeries, PeriodicInK) {
    DualForm dual({1, 1, 2, 1, 1});
    auto a = singular_series(3, dual, 5, 10);
    auto b = singular_series(3 + 2520, dual, 5, 10);
    EXPECT_EQ(a.coefficients, b.coefficients);
    EXPECT_EQ(a.partial_sum, b.partial_sum);
    EXPECT_EQ(a.tail_bound, b.tail_bound);
}

TEST(SingularSeries, RejectsFewVariables) { EXPECT_THROW(singular_series(1, DualForm({1, 1, 1}), 3, 10), error); }

TEST(SingularSeries, RegressionFixture) {
    std::ifstream in(CONGRUENCE_LAB_FIXTURE_DIR "/singular_series_p3_n4_k1.json");
    ASSERT_TRUE(in.good());
    auto fixture = nlohmann::json::parse(in);
    auto data = singular_series(1, DualForm({1, 1, 1, 1}), 3, 50);
    ASSERT_EQ(fixture["coefficients"].size(), 50u);
    for (int q = 1; q <= 50; ++q)
        EXPECT_NEAR(data.coefficients[q - 1], fixture["coefficients"][std::to_string(q)].get<double>(), 1e-13) << q;
    EXPECT_NEAR(data.partial_sum, fixture["partial_sum"].get<double>(), 1e-12);
}

TEST(SingularIntegral, TwoVariableGaussianClosedForm) {
    // prod Omega = sigma^2 exp(-pi sigma^2 |x|^2); V(t) = 1 - exp(-pi sigma^2 t), V'(t) = pi sigma^2 exp(-pi sigma^2 t)
    for (double sigma : {0.5, 1.0, 2.0})
        for (double t : {0.1, 0.7, 2.0}) {
            const double got = singular_integral(t, 1.0, DualForm({1, 1}), WeightSpec::gaussian(sigma));
            const double want = std::numbers::pi * sigma * sigma * std::exp(-std::numbers::pi * sigma * sigma * t);
            EXPECT_NEAR(got, want, 1e-12 * want);
        }
}

TEST(SingularIntegral, TwoVariableFiniteDifference) {
    // V(t) = int_{x1^2 + 2 x2^2 <= t} Omega(x1) Omega(x2), inner integral in closed form via erf
    const double sigma = 1.3;
    auto w = WeightSpec::gaussian(sigma);
    auto V = [&](double t) {
        return composite_simpson(
            [&](double phi) {
                const double x1 = std::sqrt(t) * std::sin(phi);
                const double h = std::sqrt(t / 2.0) * std::cos(phi);  // |x2| <= h
                // int_{-h}^{h} sigma exp(-pi sigma^2 y^2) dy = erf(sqrt(pi) sigma h)
                return w.fourier(x1) * std::erf(std::sqrt(std::numbers::pi) * sigma * h) * std::sqrt(t) * std::cos(phi);
            },
            -std::numbers::pi / 2, std::numbers::pi / 2, 2000);
    };
    for (double t : {0.3, 1.0, 2.5}) {
        const double eps = t * 1e-3;
        const double fd = (V(t + eps) - V(t - eps)) / (2 * eps);
        EXPECT_NEAR(singular_integral(t, 1.0, DualForm({1, 2}), w), fd, 1e-5 * fd);
    }
}

TEST(SingularIntegral, ScalesWithP) {
    auto w = WeightSpec::gaussian(1.0);
    DualForm dual({1, 3});
    EXPECT_NEAR(singular_integral(40.0, 4.0, dual, w), singular_integral(2.5, 1.0, dual, w), 1e-14);
}

TEST(SingularIntegral, MonteCarloMatchesConvolution) {
    const std::vector<i64> d = {1, 2, 3};
    for (const auto& w : {WeightSpec::gaussian(1.0), WeightSpec::bump_pair(1.0)})
        for (double t : {0.2, 1.0, 3.0}) {
            const double want = shell_density_by_convolution(t, d, [&](double x) { return w.fourier(x); });
            const double got = singular_integral(t, 1.0, DualForm(d), w);
            EXPECT_NEAR(got, want, 3e-3 * want) << w.str() << " t=" << t;
        }
}

TEST(SingularIntegral, RadialFourVariables) {
    // all-ones Gaussian: weight constant on the shell, sigma = pi^2 t exp(-pi t) for sigma = 1
    for (double t : {0.5, 2.0})
        EXPECT_NEAR(singular_integral(t, 1.0, DualForm({1, 1, 1, 1}), WeightSpec::gaussian(1.0)),
                    std::numbers::pi * std::numbers::pi * t * std::exp(-std::numbers::pi * t), 1e-12);
}

TEST(SingularIntegral, VanishesBeyondBumpSupport) {
    auto w = WeightSpec::bump_pair(1.0);
    EXPECT_EQ(singular_integral(1e4, 1.0, DualForm({1, 1, 1, 1}), w), 0.0);
    EXPECT_EQ(singular_integral(50.0, 1.0, DualForm({1, 2, 1}), w), 0.0);
}

TEST(SingularIntegral, BoundedOnLogGrid) {
    auto w = WeightSpec::bump_pair(1.0);
    double M = 0;
    for (double t = 1; t <= 1e4; t *= 1.5) M = std::max(M, std::abs(singular_integral(t, 1.0, DualForm({1, 1, 1, 1}), w, {1 << 14})));
    EXPECT_TRUE(std::isfinite(M));
    EXPECT_LT(M, 1.0);
}

TEST(SingularIntegral, Deterministic) {
    auto w = WeightSpec::bump_pair(1.0);
    DualForm dual({1, 2, 3, 1});
    const double a = singular_integral(1.3, 1.0, dual, w);
    set_threads(1);
    const double b = singular_integral(1.3, 1.0, dual, w);
    set_threads(0);
    EXPECT_EQ(a, b);
}

TEST(RepresentationAsymptotic, FourVariableRatio) {
    const u64 p = 3;
    DualForm dual({1, 1, 1, 1});
    auto w = WeightSpec::gaussian(1.0);
    const int q_max = 60;
    std::vector<SingularCoefficientTable> tables;
    for (int q = 1; q <= q_max; ++q) tables.emplace_back(q, dual, p);
    // unit squares mod 3 are all 1, so x1^2 + ... + x4^2 = 1 (mod 3) on unit vectors
    auto unit_solvable_mod_p = [](i64 k) { return k % 3 == 1; };
    for (double P : {10.0, 20.0}) {
        double ratio_sum = 0;
        int terms = 0;
        for (i64 k = static_cast<i64>(P * P); k <= static_cast<i64>(2 * P * P); ++k) {
            double sigma = 0;
            for (const auto& t : tables) sigma += t(k);
            if (!unit_solvable_mod_p(k)) continue;  // local factor at p vanishes; partial sums only carry truncation noise
            const double lhs = weighted_representations(k, dual, p, w, P);
            const double rhs = singular_integral(static_cast<double>(k), P, dual, w, {4096}) * sigma * P * P;
            ratio_sum += lhs / rhs;
            ++terms;
        }
        const double avg = ratio_sum / terms;
        EXPECT_GT(avg, 0.5) << P;
        EXPECT_LT(avg, 1.5) << P;
    }
}

TEST(QuadrupleCount, Example) {
    EXPECT_EQ(quadruple_count({1, 1, 1, 1}, 4, PrimePowerModulus(3, 4), 1), 16u);
    EXPECT_EQ(quadruple_count({1, 1, 1, 1}, 5, PrimePowerModulus(3, 4), 1), 0u);
}

TEST(QuadrupleCount, HypothesisChecked) {
    try {
        quadruple_count({1, 1, 1, 1}, 0, PrimePowerModulus(3, 3), 2);  // 8 * 4 = 32 >= 27
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::hypothesis_violated);
    }
    EXPECT_THROW(quadruple_count({1, 3, 1, 1}, 0, PrimePowerModulus(3, 5), 2), error);
}

TEST(QuadrupleCount, MatchesExhaustive) {
    Lcg64 rng(99);
    for (int trial = 0; trial < 12; ++trial) {
        const i64 M = 1 + static_cast<i64>(rng.below(12));
        const PrimePowerModulus c(3, 7);
        std::array<i64, 4> alpha;
        for (auto& a : alpha) {
            do a = static_cast<i64>(rng.below(2187));
            while (a % 3 == 0);
        }
        const i64 q = 2187;
        const i64 b = static_cast<i64>(rng.below(q));
        u64 want = 0;
        for (i64 x = -M; x <= M; ++x)
            for (i64 y = -M; y <= M; ++y)
                for (i64 z = -M; z <= M; ++z)
                    for (i64 u = -M; u <= M; ++u)
                        want += ((alpha[0] * x * x + alpha[1] * y * y + alpha[2] * z * z + alpha[3] * u * u - b) % q == 0);
        EXPECT_EQ(quadruple_count(alpha, b, c, M), want);
    }
}

TEST(QuadrupleCount, Envelope) {
    Lcg64 rng(5);
    const i64 M = 10;
    for (int trial = 0; trial < 20; ++trial) {
        std::array<i64, 4> alpha;
        for (auto& a : alpha) {
            do a = static_cast<i64>(rng.below(2187));
            while (a % 3 == 0);
        }
        const u64 count = quadruple_count(alpha, static_cast<i64>(rng.below(2187)), PrimePowerModulus(3, 7), M);
        EXPECT_LE(static_cast<double>(count), 50.0 * M * M * std::log(M) * std::log(M));
    }
}
