#pragma once

// Sums of e_{p^s}(u) over square roots u of k*Lambda modulo p^s, with k running
// through 0 < k <= K, k = b (mod c), p not dividing k:
//
//   S = sum_k sum_{u^2 = k Lambda, u = a (mod p)} (u / p^s)^mu e_{p^s}(u)
//
// With `a` absent every root is taken.

#include <cmath>
#include <complex>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "modmath.hpp"
#include "parallel.hpp"

namespace congruence_lab {

struct SqrtSumParams {
    u64 p = 3;
    int s = 2;
    i64 Lambda = 1;
    std::optional<i64> a;
    i64 b = 0;
    i64 c = 1;
    i64 K = 1;
    int mu = 0;
};

namespace detail {

struct SqrtSumSetup {
    PrimePowerModulus mod;
    i64 q;
    i64 p;
    i64 lambda;  // reduced mod q
    i64 first_k;  // least k > 0 with k = b (mod c)
};

inline SqrtSumSetup check_sqrt_params(const SqrtSumParams& P) {
    if (P.s < 2) fail(errc::invalid_argument, "exponent s must be at least 2");
    PrimePowerModulus mod(P.p, P.s);
    const i64 q = mod.q64();
    const i64 p = static_cast<i64>(P.p);
    if (P.Lambda % p == 0) fail(errc::coprimality_violated, "Lambda must be coprime to p");
    if (P.a && *P.a % p == 0) fail(errc::coprimality_violated, "root class a must be coprime to p");
    if (P.c < 1) fail(errc::invalid_argument, "progression modulus c must be positive");
    if (P.K < 1 || P.K > q) fail(errc::invalid_argument, "K must satisfy 0 < K <= p^s");
    if (P.mu != 0 && P.mu != 1) fail(errc::invalid_argument, "mu must be 0 or 1");
    i64 first = ((P.b % P.c) + P.c) % P.c;
    if (first == 0) first = P.c;
    return {mod, q, p, static_cast<i64>(reduce(P.Lambda, static_cast<u128>(q))), first};
}

inline int twist(i64 u, const SqrtSumParams& P) {
    if (P.mu == 0 || P.s % 2 == 0) return 1;
    return jacobi_symbol(u, static_cast<i128>(P.p));  // (u / p^s) = (u / p)^s
}

// Unit roots of k*Lambda modulo p^s in the requested class, as residues mod p^s.
template <class Fn>
void for_each_root(i64 k, const SqrtSumSetup& S, const SqrtSumParams& P, Fn&& fn) {
    const i128 target = static_cast<i128>(k) * S.lambda;
    auto w = sqrt_mod_prime(Residue{reduce(target, static_cast<u128>(S.p)), static_cast<u128>(S.p)});
    if (!w) return;
    const i64 w0 = static_cast<i64>(w->value);
    for (i64 root : {w0, S.p - w0}) {
        if (P.a && ((*P.a % S.p) + S.p) % S.p != root) continue;
        fn(static_cast<i64>(hensel_lift_sqrt(Residue{static_cast<u128>(root), static_cast<u128>(S.p)}, target, S.mod).value));
    }
}

inline i64 lcm_capped(i64 a, i64 b) {
    const u128 l = static_cast<u128>(a) / gcd_u(static_cast<u128>(a), static_cast<u128>(b)) * static_cast<u128>(b);
    return l > static_cast<u128>(INT64_MAX) ? INT64_MAX : static_cast<i64>(l);
}

}  // namespace detail

// Iterates k along the progression and lifts each root; cost O((K/c) s).
inline std::complex<double> sqrt_root_sum(const SqrtSumParams& P, Budget budget = {}) {
    const auto S = detail::check_sqrt_params(P);
    if (S.first_k > P.K) return 0.0;
    budget.charge(static_cast<long double>((P.K - S.first_k) / P.c + 1) * P.s, "sqrt_root_sum");
    CompensatedComplexSum acc;
    for (i64 k = S.first_k; k <= P.K; k += P.c) {
        if (k % S.p == 0) continue;
        detail::for_each_root(k, S, P, [&](i64 u) {
            acc.add(static_cast<double>(detail::twist(u, P)) * additive_character(u, static_cast<u128>(S.q)));
        });
    }
    return acc.value();
}

// Same sum by running over every unit u mod p^s and recovering k = u^2 / Lambda.
inline std::complex<double> sqrt_root_sum_by_roots(const SqrtSumParams& P, Budget budget = {}) {
    const auto S = detail::check_sqrt_params(P);
    budget.charge(static_cast<long double>(S.q), "sqrt_root_sum_by_roots");
    const u128 q = static_cast<u128>(S.q);
    const u128 lambda_inv = inverse_mod(S.lambda, q);
    CompensatedComplexSum acc;
    for (i64 u = 1; u < S.q; ++u) {
        if (u % S.p == 0) continue;
        if (P.a && (u - *P.a) % S.p != 0) continue;
        const i64 k = static_cast<i64>(mul_mod(mul_mod(static_cast<u128>(u), static_cast<u128>(u), q), lambda_inv, q));
        if (k > P.K || ((k - P.b) % P.c) != 0) continue;
        acc.add(static_cast<double>(detail::twist(u, P)) * additive_character(u, q));
    }
    return acc.value();
}

// Number of (k, u) pairs the sum runs over.
inline u64 sqrt_root_pair_count(const SqrtSumParams& P) {
    const auto S = detail::check_sqrt_params(P);
    u64 pairs = 0;
    for (i64 k = S.first_k; k <= P.K; k += P.c) {
        if (k % S.p == 0) continue;
        const int chi = jacobi_symbol(static_cast<i128>(k) * S.lambda, S.p);
        if (chi != 1) continue;
        if (!P.a) {
            pairs += 2;
        } else {
            const i64 a = ((*P.a % S.p) + S.p) % S.p;
            pairs += static_cast<i64>(reduce(static_cast<i128>(a) * a - static_cast<i128>(k) * S.lambda, S.p)) == 0;
        }
    }
    return pairs;
}

// Block form of the same sum. With T = ceil(s/2) and k = k0 + p^T j, the root in the
// class of u0 is u0 + p^T v where v = Lambda j (2 u0)^{-1} (mod p^{s-T}), so along each
// residue class k0 mod lcm(c, p^T) the phases form a geometric series.
inline std::complex<double> sqrt_root_sum_linearized(const SqrtSumParams& P, Budget budget = {}) {
    const auto S = detail::check_sqrt_params(P);
    if (S.first_k > P.K) return 0.0;
    const int T = (P.s + 1) / 2;
    const i64 pT = static_cast<i64>(S.mod.power(T));
    const i64 q_rem = static_cast<i64>(S.mod.power(P.s - T));
    const i64 L = detail::lcm_capped(P.c, pT);
    const i64 k0_max = std::min(L, P.K);
    budget.charge(static_cast<long double>((k0_max - S.first_k) / P.c + 1) * P.s, "sqrt_root_sum_linearized");
    const i64 step_in_j = static_cast<i64>(reduce(static_cast<i128>(L / pT) % q_rem * S.lambda, static_cast<u128>(q_rem)));
    CompensatedComplexSum acc;
    for (i64 k0 = S.first_k; k0 <= k0_max; k0 += P.c) {
        if (k0 % S.p == 0) continue;
        const i64 count = (P.K - k0) / L + 1;
        detail::for_each_root(k0, S, P, [&](i64 u0) {
            const i64 inv2u = static_cast<i64>(inverse_mod(2 * static_cast<i128>(u0), static_cast<u128>(q_rem)));
            const i64 A = static_cast<i64>(mul_mod(static_cast<u128>(step_in_j), static_cast<u128>(inv2u), static_cast<u128>(q_rem)));
            std::complex<double> series;
            if (A == 0) {
                series = static_cast<double>(count);
            } else {
                const i128 top = static_cast<i128>(A) * (count % q_rem);
                series = (1.0 - additive_character(top, static_cast<u128>(q_rem))) /
                         (1.0 - additive_character(A, static_cast<u128>(q_rem)));
            }
            acc.add(static_cast<double>(detail::twist(u0, P)) * additive_character(u0, static_cast<u128>(S.q)) * series);
        });
    }
    return acc.value();
}

// Picks whichever of the two k-iterations visits fewer terms.
inline std::complex<double> sqrt_root_sum_auto(const SqrtSumParams& P, Budget budget = {}) {
    const auto S = detail::check_sqrt_params(P);
    const i64 pT = static_cast<i64>(S.mod.power((P.s + 1) / 2));
    const i64 L = detail::lcm_capped(P.c, pT);
    return L < P.K ? sqrt_root_sum_linearized(P, budget) : sqrt_root_sum(P, budget);
}

// --- bound scan -------------------------------------------------------------

// 64-bit linear congruential generator, x <- a x + c (mod 2^64), with Knuth's MMIX constants.
class Lcg64 {
public:
    static constexpr u64 multiplier = 6364136223846793005ULL;
    static constexpr u64 increment = 1442695040888963407ULL;

    explicit Lcg64(u64 seed) : state_(seed) {}

    u64 next() {
        state_ = state_ * multiplier + increment;
        return state_;
    }

    // Uniform in [0, n), from the high bits.
    u64 below(u64 n) { return static_cast<u64>((static_cast<u128>(next()) * n) >> 64); }

private:
    u64 state_;
};

struct BoundScanRow {
    SqrtSumParams params;
    std::complex<double> sum_value;
    double normalized = 0.0;
};

// |S| / (p^{s/2} log p^s)
inline double normalized_sum(std::complex<double> value, u64 p, int s) {
    const double ps = std::pow(static_cast<double>(p), s);
    return std::abs(value) / (std::sqrt(ps) * std::log(ps));
}

// Draws one parameter tuple per trial and per s in [s_min, s_max]:
//   Lambda uniform unit mod p^s, a uniform in [1, p-1], c = p^g * c' with g in [0, s], c' in [1, 8],
//   b uniform mod c, K uniform in [1, p^s], mu uniform in {0, 1}.
inline std::vector<SqrtSumParams> bound_scan_parameters(u64 p, int s_min, int s_max, int trials, u64 seed) {
    if (s_min < 2 || s_max < s_min) fail(errc::invalid_argument, "s range must satisfy 2 <= s_min <= s_max");
    if (trials < 1) fail(errc::invalid_argument, "trials must be positive");
    Lcg64 rng(seed);
    std::vector<SqrtSumParams> out;
    for (int s = s_min; s <= s_max; ++s) {
        PrimePowerModulus mod(p, s);
        const u64 q = static_cast<u64>(mod.q64());
        for (int t = 0; t < trials; ++t) {
            SqrtSumParams P;
            P.p = p;
            P.s = s;
            do P.Lambda = static_cast<i64>(1 + rng.below(q - 1));
            while (P.Lambda % static_cast<i64>(p) == 0);
            P.a = static_cast<i64>(1 + rng.below(p - 1));
            const int g = static_cast<int>(rng.below(static_cast<u64>(s) + 1));
            P.c = static_cast<i64>(mod.power(g)) * static_cast<i64>(1 + rng.below(8));
            P.b = static_cast<i64>(rng.below(static_cast<u64>(P.c)));
            P.K = static_cast<i64>(1 + rng.below(q));
            P.mu = static_cast<int>(rng.below(2));
            out.push_back(P);
        }
    }
    return out;
}

inline std::vector<BoundScanRow> bound_scan(u64 p, int s_min, int s_max, int trials, u64 seed, Budget budget = {}) {
    auto params = bound_scan_parameters(p, s_min, s_max, trials, seed);
    return parallel_blocks<BoundScanRow>(params.size(), 1, [&](std::size_t i, std::size_t, std::size_t) {
        BoundScanRow row;
        row.params = params[i];
        row.sum_value = sqrt_root_sum_auto(params[i], budget);
        row.normalized = normalized_sum(row.sum_value, params[i].p, params[i].s);
        return row;
    });
}

inline double bound_scan_max(const std::vector<BoundScanRow>& rows) {
    double best = 0.0;
    for (const auto& r : rows) best = std::max(best, r.normalized);
    return best;
}

inline std::string bound_scan_csv(const std::vector<BoundScanRow>& rows) {
    std::string out = "p,s,Lambda,a,b,c,K,mu,re,im,abs,normalized\n";
    char buf[512];
    for (const auto& r : rows) {
        const auto& P = r.params;
        const std::string a = P.a ? std::to_string(*P.a) : std::string();
        std::snprintf(buf, sizeof buf, "%llu,%d,%lld,%s,%lld,%lld,%lld,%d,%.17g,%.17g,%.17g,%.17g\n",
                      static_cast<unsigned long long>(P.p), P.s, static_cast<long long>(P.Lambda), a.c_str(),
                      static_cast<long long>(P.b), static_cast<long long>(P.c), static_cast<long long>(P.K), P.mu,
                      r.sum_value.real(), r.sum_value.imag(), std::abs(r.sum_value), r.normalized);
        out += buf;
    }
    return out;
}

}  // namespace congruence_lab
