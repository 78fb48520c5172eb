#pragma once

// Exact solution densities of diagonal quadratic congruences modulo p and p^m.

#include <cmath>
#include <vector>

#include "core.hpp"
#include "diagonal_form.hpp"
#include "modmath.hpp"

namespace congruence_lab {

// numerator / p^{n-1}
struct DensityValue {
    u128 numerator = 0;
    u128 denominator = 1;
    Rational as_rational;
};

enum class CoordinateRange { units, all };

namespace detail {

// h[v] = #{x mod q : lambda x^2 = v (mod q)}, x restricted to units when asked.
inline std::vector<u128> square_histogram(i64 lambda, u64 p, u64 q, CoordinateRange range) {
    std::vector<u128> h(q, 0);
    const u64 l = static_cast<u64>(reduce(lambda, q));
    for (u64 x = 0; x < q; ++x) {
        if (range == CoordinateRange::units && x % p == 0) continue;
        h[static_cast<u64>(mul_mod(l, mul_mod(x, x, q), q))] += 1;
    }
    return h;
}

inline std::vector<u128> cyclic_convolve(const std::vector<u128>& a, const std::vector<u128>& b) {
    const std::size_t q = a.size();
    std::vector<u128> out(q, 0);
    for (std::size_t i = 0; i < q; ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < q; ++j) {
            if (b[j] == 0) continue;
            std::size_t k = i + j;
            if (k >= q) k -= q;
            out[k] += a[i] * b[j];
        }
    }
    return out;
}

// Number of x mod q (coordinates per range) with sum lambda_j x_j^2 = target.
inline u128 histogram_count(const std::vector<i64>& lambdas, i128 target, u64 p, u64 q, CoordinateRange range,
                            const Budget& budget, const char* where) {
    budget.charge(static_cast<long double>(lambdas.size()) * q * q, where);
    std::vector<u128> acc = square_histogram(lambdas[0], p, q, range);
    for (std::size_t j = 1; j < lambdas.size(); ++j) acc = cyclic_convolve(acc, square_histogram(lambdas[j], p, q, range));
    return acc[static_cast<u64>(reduce(target, q))];
}

inline u128 pow_u(u128 base, int e) {
    u128 r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

inline u64 require_small_prime(u64 p) {
    PrimePowerModulus check(p, 1);
    return check.p();
}

inline DensityValue make_density(u128 count, u64 p, std::size_t n) {
    const u128 den = pow_u(p, static_cast<int>(n) - 1);
    return DensityValue{count, den, Rational(static_cast<i128>(count), static_cast<i128>(den))};
}

}  // namespace detail

// #{x in (Z/p)^{*n} : Q(x) = 0 mod p} / p^{n-1}
inline DensityValue density_B(const DiagonalForm& form, u64 p, Budget budget = {}) {
    detail::require_small_prime(p);
    form.require_units(p, true);
    u128 count = detail::histogram_count(form.lambdas, form.inhomogeneous_term, p, p, CoordinateRange::units, budget, "density_B");
    return detail::make_density(count, p, form.n());
}

// #{x in (Z/p)^n, x != 0 : Q(x) = 0 mod p} / p^{n-1}, for homogeneous Q.
inline DensityValue density_A(const DiagonalForm& form, u64 p, Budget budget = {}) {
    detail::require_small_prime(p);
    if (!form.homogeneous()) fail(errc::not_homogeneous, "density_A needs lambda_{n+1} = 0");
    form.require_units(p, false);
    u128 count = detail::histogram_count(form.lambdas, 0, p, p, CoordinateRange::all, budget, "density_A");
    return detail::make_density(count - 1, p, form.n());
}

// s_p = 2 + (-l1 l2 / p) + (-l1 l3 / p) + (-l2 l3 / p)
inline int ternary_s_p(i64 l1, i64 l2, i64 l3, u64 p) {
    const i128 pp = static_cast<i128>(p);
    return 2 + jacobi_symbol(-static_cast<i128>(l1) * l2, pp) + jacobi_symbol(-static_cast<i128>(l1) * l3, pp) +
           jacobi_symbol(-static_cast<i128>(l2) * l3, pp);
}

// C_p = (p - s_p)(p - 1) / p^2
inline Rational ternary_C_p(i64 l1, i64 l2, i64 l3, u64 p) {
    detail::require_small_prime(p);
    DiagonalForm({l1, l2, l3}, 0).require_units(p, false);
    const i128 pp = static_cast<i128>(p);
    return Rational((pp - ternary_s_p(l1, l2, l3, p)) * (pp - 1), pp * pp);
}

// #B_m: unit y mod p^m with Q(y) = 0 mod p^m.
inline u128 count_B_m(const DiagonalForm& form, const PrimePowerModulus& modulus, Budget budget = {}) {
    form.require_units(modulus.p(), false);
    const u64 q = static_cast<u64>(modulus.q64());
    return detail::histogram_count(form.lambdas, form.inhomogeneous_term, modulus.p(), q, CoordinateRange::units, budget,
                                   "count_B_m");
}

// Same count by enumerating every unit vector; the oracle for count_B_m.
inline u128 count_B_m_exhaustive(const DiagonalForm& form, const PrimePowerModulus& modulus, Budget budget = {}) {
    const i64 q = modulus.q64();
    const i64 p = static_cast<i64>(modulus.p());
    const std::size_t n = form.n();
    budget.charge(std::pow(static_cast<long double>(q), static_cast<long double>(n)), "count_B_m_exhaustive");
    std::vector<i64> x(n, 1);
    u128 count = 0;
    while (true) {
        if (reduce(form.evaluate(x), static_cast<u128>(q)) == 0) ++count;
        std::size_t j = 0;
        for (; j < n; ++j) {
            ++x[j];
            if (x[j] % p == 0) ++x[j];
            if (x[j] < q) break;
            x[j] = 1;
        }
        if (j == n) break;
    }
    return count;
}

// #B_m / p^{m(n-1)} for m = 1..m_max; constant when Hensel lifting applies.
inline std::vector<Rational> hensel_stability_report(const DiagonalForm& form, u64 p, int m_max, Budget budget = {}) {
    if (m_max < 1) fail(errc::invalid_argument, "m_max must be at least 1");
    std::vector<Rational> out;
    for (int m = 1; m <= m_max; ++m) {
        PrimePowerModulus mod(p, m);
        const u128 count = count_B_m(form, mod, budget);
        const u128 den = detail::pow_u(mod.q(), static_cast<int>(form.n()) - 1);
        out.emplace_back(static_cast<i128>(count), static_cast<i128>(den));
    }
    return out;
}

}  // namespace congruence_lab
