#pragma once

// Oracle-agreement suites behind `selftest`. Reports carry no timings or thread
// counts, so equal seeds give byte-identical output.

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "congruence_lab/congruence_lab.hpp"
#include "emit.hpp"

namespace cli {

using namespace congruence_lab;

struct SuiteResult {
    std::string name;
    u64 cases = 0;
    double max_error = 0.0;
    double tolerance = 0.0;
    bool exact = false;  // integer or rational comparison: max_error counts mismatches

    bool pass() const { return exact ? max_error == 0.0 : max_error < tolerance; }

    json to_json() const {
        json j{{"name", name}, {"cases", cases}};
        if (exact)
            j["mismatches"] = static_cast<u64>(max_error);
        else
            j["max_error"] = max_error, j["tolerance"] = tolerance;
        j["pass"] = pass();
        return j;
    }

    void record(double err) {
        ++cases;
        if (std::isnan(err))
            max_error = std::numeric_limits<double>::infinity();
        else
            max_error = std::max(max_error, err);
    }
};

inline double rel_err(std::complex<double> got, std::complex<double> want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

inline i64 draw_unit(Lcg64& rng, i64 p, i64 range) {
    i64 v;
    do v = static_cast<i64>(rng.below(static_cast<u64>(range))) + 1;
    while (v % p == 0);
    return v;
}

inline SuiteResult suite_gauss(bool quick) {
    SuiteResult r{"gauss_closed_vs_bruteforce", 0, 0, 1e-8};
    for (u64 p : {3u, 5u, 7u})
        for (int m = 1; m <= (quick ? 2 : 3); ++m) {
            PrimePowerModulus mod(p, m);
            const i64 q = mod.q64();
            RootTable table(q);
            for (i64 a = 0; a < q; ++a)
                for (i64 b = 0; b < q; ++b)
                    r.record(rel_err(gauss_sum_closed(a, b, mod).to_complex(), gauss_sum_bruteforce(a, b, table)));
        }
    return r;
}

inline SuiteResult suite_kloosterman(bool quick) {
    SuiteResult r{"kloosterman_salie_closed_vs_bruteforce", 0, 0, 1e-8};
    std::vector<std::pair<u64, int>> moduli = {{3, 2}, {5, 2}, {3, 3}};
    if (!quick) moduli.insert(moduli.end(), {{7, 2}, {3, 4}, {5, 3}});
    for (auto [p, m] : moduli) {
        PrimePowerModulus mod(p, m);
        const i64 q = mod.q64();
        UnitSumKernel kernel(q);
        for (i64 a = 0; a < q; ++a)
            for (i64 b = 0; b < q; ++b) {
                if (detail::classify_unit_sum(a, b, mod) == detail::UnitSumCase::unsupported) continue;
                r.record(rel_err(kloosterman_closed(a, b, mod).to_complex(), kernel.kloosterman(a, b)));
                r.record(rel_err(salie_closed(a, b, mod).to_complex(), kernel.salie(a, b)));
            }
    }
    return r;
}

inline SuiteResult suite_f_kernel(u64 seed, bool quick) {
    SuiteResult r{"f_kernel_closed_vs_bruteforce", 0, 0, 1e-6};
    Lcg64 rng(seed ^ 0xF0F0F0F0ULL);
    const std::pair<u64, int> moduli[] = {{3, 2}, {3, 3}, {5, 2}};
    const int trials = quick ? 30 : 200;
    for (int t = 0; t < trials; ++t) {
        auto [p, m] = moduli[rng.below(3)];
        PrimePowerModulus mod(p, m);
        const std::size_t n = 2 + rng.below(2);
        const i64 pp = static_cast<i64>(p);
        std::vector<i64> lambdas(n), l(n), k(n);
        for (auto& v : lambdas) v = draw_unit(rng, pp, 40);
        DiagonalForm form(lambdas, draw_unit(rng, pp, 40));
        const int rr = static_cast<int>(rng.below(static_cast<u64>(m - 1)));
        for (std::size_t j = 0; j < n; ++j) {
            l[j] = draw_unit(rng, pp, 60) * (rng.below(2) ? 1 : -1);
            k[j] = l[j] * static_cast<i64>(mod.power(rr));
        }
        const auto want = F_bruteforce(k, form, mod);
        const auto got = F_closed(rr, l, form, mod);
        r.record(std::abs(got - want) / std::max(1.0, std::abs(want)));
    }
    return r;
}

inline SuiteResult suite_hensel(u64 seed, bool quick) {
    SuiteResult r{"hensel_stability", 0, 0, 0, true};
    Lcg64 rng(seed ^ 0x4E5E1ULL);
    const int forms = quick ? 6 : 20;
    for (int t = 0; t < forms; ++t) {
        const u64 p = std::array<u64, 3>{3, 5, 7}[rng.below(3)];
        const i64 pp = static_cast<i64>(p);
        const std::size_t n = 2 + rng.below(3);
        std::vector<i64> lambdas(n);
        for (auto& v : lambdas) v = draw_unit(rng, pp, 50);
        DiagonalForm form(lambdas, draw_unit(rng, pp, 50));
        const auto report = hensel_stability_report(form, p, p == 3 ? 3 : 2);
        bool constant = true;
        for (const auto& v : report) constant = constant && v == report.front();
        ++r.cases;
        r.max_error += constant ? 0.0 : 1.0;
    }
    return r;
}

inline SuiteResult suite_ternary(u64 seed, bool quick) {
    SuiteResult r{"ternary_unit_count", 0, 0, 0, true};
    Lcg64 rng(seed ^ 0x7E4A7ULL);
    for (i64 p : {3, 5, 7, 11, 13}) {
        for (int t = 0; t < (quick ? 5 : 50); ++t) {
            const i64 l1 = draw_unit(rng, p, 100), l2 = draw_unit(rng, p, 100), l3 = draw_unit(rng, p, 100);
            i64 count = 0;
            for (i64 x = 1; x < p; ++x)
                for (i64 y = 1; y < p; ++y)
                    for (i64 z = 1; z < p; ++z) count += (l1 * x * x + l2 * y * y + l3 * z * z) % p == 0;
            const Rational want = ternary_C_p(l1, l2, l3, static_cast<u64>(p)) * Rational(p * p);
            ++r.cases;
            r.max_error += want == Rational(count) ? 0.0 : 1.0;
        }
    }
    return r;
}

inline SuiteResult suite_sqrt_sums(u64 seed, bool quick) {
    SuiteResult r{"sqrt_root_sum_routes", 0, 0, 1e-8};
    Lcg64 rng(seed ^ 0x5A5AULL);
    const int trials = quick ? 40 : 300;
    for (int t = 0; t < trials; ++t) {
        SqrtSumParams P;
        P.p = std::array<u64, 3>{3, 5, 7}[rng.below(3)];
        P.s = 2 + static_cast<int>(rng.below(P.p == 3 ? 6 : 3));
        const i64 q = PrimePowerModulus(P.p, P.s).q64();
        P.Lambda = draw_unit(rng, static_cast<i64>(P.p), q - 1);
        if (rng.below(3)) P.a = draw_unit(rng, static_cast<i64>(P.p), static_cast<i64>(P.p) - 1);
        P.c = 1 + static_cast<i64>(rng.below(20));
        P.b = static_cast<i64>(rng.below(static_cast<u64>(P.c)));
        P.K = 1 + static_cast<i64>(rng.below(static_cast<u64>(q)));
        P.mu = static_cast<int>(rng.below(2));
        const auto oracle = sqrt_root_sum_by_roots(P);
        r.record(std::abs(sqrt_root_sum(P) - oracle));
        r.record(std::abs(sqrt_root_sum_linearized(P) - oracle));
    }
    return r;
}

inline SuiteResult suite_singular(bool quick) {
    SuiteResult r{"singular_coefficient_factorized_vs_naive", 0, 0, 1e-9};
    for (u64 p : {3u, 5u})
        for (i64 q = 1; q * static_cast<i64>(p) <= (quick ? 9 : 15); ++q)
            for (i64 k : {1, 2, 4}) {
                DualForm dual({1, 1, 2, 1});
                r.record(std::abs(singular_coefficient(q, k, dual, p) - singular_coefficient_naive(q, k, dual, p)));
            }
    return r;
}

inline SuiteResult suite_quadruple(u64 seed, bool quick) {
    SuiteResult r{"quadruple_meet_in_middle_vs_exhaustive", 0, 0, 0, true};
    Lcg64 rng(seed ^ 0x4444ULL);
    for (int t = 0; t < (quick ? 4 : 12); ++t) {
        const i64 M = 1 + static_cast<i64>(rng.below(quick ? 6 : 12));
        const PrimePowerModulus c(3, 7);
        const i64 q = c.q64();
        std::array<i64, 4> alpha;
        for (auto& a : alpha) a = draw_unit(rng, 3, q - 1);
        const i64 b = static_cast<i64>(rng.below(static_cast<u64>(q)));
        u64 want = 0;
        for (i64 x = -M; x <= M; ++x)
            for (i64 y = -M; y <= M; ++y)
                for (i64 z = -M; z <= M; ++z)
                    for (i64 u = -M; u <= M; ++u)
                        want += (alpha[0] * x * x + alpha[1] * y * y + alpha[2] * z * z + alpha[3] * u * u - b) % q == 0;
        ++r.cases;
        r.max_error += quadruple_count(alpha, b, c, M) == want ? 0.0 : 1.0;
    }
    return r;
}

inline SuiteResult suite_spectral(bool quick) {
    SuiteResult r{"spectral_vs_direct_count", 0, 0, 1e-6};
    struct Config {
        std::vector<i64> lambdas;
        i64 constant;
        u64 p;
        int m;
        double N;
    };
    std::vector<Config> configs = {{{1, 1}, 2, 5, 2, 6}, {{1, 2, 1}, 1, 3, 2, 4}};
    if (!quick) configs.insert(configs.end(), {{{1, 1, 2}, 1, 3, 3, 5}, {{2, 3}, 1, 7, 2, 8}, {{1, 1, 1}, 2, 5, 2, 5}});
    for (const auto& c : configs) {
        DiagonalForm form(c.lambdas, c.constant);
        PrimePowerModulus mod(c.p, c.m);
        auto w = WeightSpec::gaussian(1.0);
        const double direct = count_weighted_direct(form, mod, c.N, w, CoprimalityMode::all_units).T;
        const double spectral = count_weighted_spectral(form, mod, c.N, w).T;
        r.record(std::abs(spectral - direct) / std::max(1.0, std::abs(direct)));
    }
    return r;
}

inline SuiteResult suite_poisson(bool quick) {
    SuiteResult r{"poisson_identity", 0, 0, 1e-8};
    for (double sigma : {0.7, 1.0, 1.5})
        for (i64 q : {5, 9, 27})
            for (i64 a : {0, 1, 4})
                for (double N : {2.0, 4.5}) {
                    if (quick && q == 27) continue;
                    auto w = WeightSpec::gaussian(sigma);
                    const i64 K = spectral_k_cutoff(w, N, static_cast<u128>(q)) + 1;
                    r.record(poisson_identity_check(w, q, a, N, K).gap);
                }
    return r;
}

inline json run_selftest(u64 seed, bool quick, bool& all_pass) {
    std::vector<SuiteResult> results = {
        suite_gauss(quick),          suite_kloosterman(quick), suite_f_kernel(seed, quick),  suite_hensel(seed, quick),
        suite_ternary(seed, quick),  suite_sqrt_sums(seed, quick), suite_singular(quick),   suite_quadruple(seed, quick),
        suite_spectral(quick),       suite_poisson(quick),
    };
    all_pass = true;
    json suites = json::array();
    for (const auto& s : results) {
        all_pass = all_pass && s.pass();
        suites.push_back(s.to_json());
    }
    return json{{"command", "selftest"}, {"seed", seed}, {"quick", quick}, {"suites", suites}, {"pass", all_pass}};
}

}  // namespace cli
