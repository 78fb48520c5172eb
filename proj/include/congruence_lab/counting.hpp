#pragma once

// Weighted small-solution counts
//   T = sum_{x in Z^n, coprimality condition, Q(x) = 0 mod p^m} prod_i Phi(x_i / N)
// by direct enumeration and by the Poisson-expanded frequency sum
//   T = N^n / q^{n+1} sum_k Psi(k) F(k),  Psi(k) = prod_i Phi^(k_i N / q),
// together with the zero-frequency main term T0 = B * Phi^(0)^n * N^n / q.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "charsums.hpp"
#include "core.hpp"
#include "densities.hpp"
#include "diagonal_form.hpp"
#include "modmath.hpp"
#include "parallel.hpp"
#include "weights.hpp"

namespace congruence_lab {

enum class CoprimalityMode { all_units, not_all_zero_mod_p };

inline const char* mode_name(CoprimalityMode m) {
    return m == CoprimalityMode::all_units ? "all_units" : "not_all_zero_mod_p";
}

enum class DirectStrategy { automatic, last_coordinate, residue_histogram };

inline const char* strategy_name(DirectStrategy s) {
    switch (s) {
        case DirectStrategy::automatic: return "auto";
        case DirectStrategy::last_coordinate: return "last_coordinate";
        case DirectStrategy::residue_histogram: return "residue_histogram";
    }
    return "unknown";
}

struct CountReport {
    double T = 0.0;
    double T0 = 0.0;
    double ratio = 0.0;
    u64 p = 0;
    int m = 0;
    double N = 0.0;
    DiagonalForm form;
    std::string weight;
    CoprimalityMode mode = CoprimalityMode::all_units;
    std::string method;
    Rational density;            // B (or its not-all-zero analogue) in T0
    i64 box_radius = 0;          // coordinates enumerated over [-box_radius, box_radius]
    u64 points_enumerated = 0;   // lattice points or residue pairs touched
    u64 frequencies_used = 0;    // spectral: nonzero frequency vectors summed
    i64 k_cutoff = 0;
    double truncation_bound = 0.0;
};

// Density factor of T0: #{x mod p in the coprimality class : Q(x) = 0 mod p} / p^{n-1}.
inline Rational main_term_density(const DiagonalForm& form, u64 p, CoprimalityMode mode, Budget budget = {}) {
    detail::require_small_prime(p);
    form.require_units(p, false);
    u128 count = 0;
    if (mode == CoprimalityMode::all_units) {
        count = detail::histogram_count(form.lambdas, form.inhomogeneous_term, p, p, CoordinateRange::units, budget,
                                        "main_term_density");
    } else {
        count = detail::histogram_count(form.lambdas, form.inhomogeneous_term, p, p, CoordinateRange::all, budget,
                                        "main_term_density");
        if (form.inhomogeneous_term % static_cast<i64>(p) == 0) count -= 1;
    }
    return Rational(static_cast<i128>(count), static_cast<i128>(detail::pow_u(p, static_cast<int>(form.n()) - 1)));
}

inline double main_term(const Rational& density, const WeightSpec& w, double N, std::size_t n, u128 q) {
    return density.to_double() * std::pow(w.fourier_at_zero(), static_cast<double>(n)) * std::pow(N, static_cast<double>(n)) /
           static_cast<double>(q);
}

namespace detail {

inline void check_count_inputs(const DiagonalForm& form, const PrimePowerModulus& modulus, double N) {
    if (!(N > 0) || !std::isfinite(N)) fail(errc::invalid_argument, "N must be a positive real");
    form.require_units(modulus.p(), false);
    if (modulus.q() >= (u128{1} << 40)) fail(errc::invalid_argument, "modulus too large for counting");
}

inline CountReport report_skeleton(const DiagonalForm& form, const PrimePowerModulus& modulus, double N, const WeightSpec& w,
                                   CoprimalityMode mode) {
    CountReport r;
    r.p = modulus.p();
    r.m = modulus.m();
    r.N = N;
    r.form = form;
    r.weight = w.str();
    r.mode = mode;
    r.density = main_term_density(form, modulus.p(), mode);
    r.T0 = main_term(r.density, w, N, form.n(), modulus.q());
    return r;
}

inline bool admissible(i64 x, i64 p, CoprimalityMode mode) { return mode == CoprimalityMode::not_all_zero_mod_p || x % p != 0; }

// weights[x + X] = Phi(x / N)
inline std::vector<double> coordinate_weights(const WeightSpec& w, double N, i64 X) {
    std::vector<double> out(static_cast<std::size_t>(2 * X + 1));
    for (i64 x = -X; x <= X; ++x) out[static_cast<std::size_t>(x + X)] = w.eval(static_cast<double>(x) / N);
    return out;
}

// Mass of one coordinate just outside the box, used for the truncation estimate.
inline double outside_mass(const WeightSpec& w, double N, i64 X) {
    double s = 0.0;
    for (i64 x = X + 1; x <= 2 * X + 2; ++x) s += 2.0 * w.eval(static_cast<double>(x) / N);
    if (w.kind() == WeightKind::sharp_cutoff) return 0.0;
    return s + weight_tail_threshold;
}

inline double weighted_histogram_count(const DiagonalForm& form, const PrimePowerModulus& modulus, const std::vector<double>& weights,
                                       i64 X, CoordinateRange range, bool multiples_of_p_only) {
    const i64 q = modulus.q64();
    const i64 p = static_cast<i64>(modulus.p());
    std::vector<double> acc;
    for (std::size_t j = 0; j < form.n(); ++j) {
        std::vector<double> h(static_cast<std::size_t>(q), 0.0);
        const u128 l = reduce(form.lambdas[j], static_cast<u128>(q));
        for (i64 x = -X; x <= X; ++x) {
            const bool divisible = x % p == 0;
            if (range == CoordinateRange::units && divisible) continue;
            if (multiples_of_p_only && !divisible) continue;
            const u128 v = mul_mod(l, mul_mod(reduce(x, q), reduce(x, q), q), q);
            h[static_cast<std::size_t>(v)] += weights[static_cast<std::size_t>(x + X)];
        }
        if (j == 0) {
            acc = std::move(h);
            continue;
        }
        std::vector<double> next(static_cast<std::size_t>(q), 0.0);
        for (i64 a = 0; a < q; ++a) {
            const double wa = acc[static_cast<std::size_t>(a)];
            if (wa == 0.0) continue;
            for (i64 b = 0; b < q; ++b) {
                const double wb = h[static_cast<std::size_t>(b)];
                if (wb == 0.0) continue;
                i64 c = a + b;
                if (c >= q) c -= q;
                next[static_cast<std::size_t>(c)] += wa * wb;
            }
        }
        acc = std::move(next);
    }
    return acc[static_cast<std::size_t>(reduce(form.inhomogeneous_term, static_cast<u128>(q)))];
}

inline std::size_t solved_coordinate(const DiagonalForm& form) {
    std::size_t best = 0;
    auto magnitude = [](i64 v) { return v < 0 ? -static_cast<i128>(v) : static_cast<i128>(v); };
    for (std::size_t j = 0; j < form.n(); ++j)
        if (magnitude(form.lambdas[j]) >= magnitude(form.lambdas[best])) best = j;
    return best;
}

struct LastCoordinateContext {
    const DiagonalForm* form;
    i64 q, p, X;
    CoprimalityMode mode;
    std::vector<i64> outer_lambdas;  // reduced mod q
    u128 solved_lambda_inverse;
    const std::vector<double>* weights;
    std::vector<std::optional<RootClassSet>>* roots;  // by target residue, filled up front
};

inline double leaf_sum(const LastCoordinateContext& ctx, i64 residual, bool all_outer_zero, u64& touched) {
    // lambda_n x_n^2 = lambda_{n+1} - residual (mod q)
    const i64 rhs = static_cast<i64>(reduce(static_cast<i128>(ctx.form->inhomogeneous_term) - residual, ctx.q));
    const i64 target = static_cast<i64>(mul_mod(static_cast<u128>(rhs), ctx.solved_lambda_inverse, ctx.q));
    const bool target_unit = target % ctx.p != 0;
    if (ctx.mode == CoprimalityMode::all_units && !target_unit) return 0.0;
    if (ctx.mode == CoprimalityMode::not_all_zero_mod_p && all_outer_zero && !target_unit) return 0.0;
    const RootClassSet& set = *(*ctx.roots)[static_cast<std::size_t>(target)];
    double s = 0.0;
    set.for_each_in_range(-ctx.X, ctx.X, [&](i64 x) {
        ++touched;
        s += (*ctx.weights)[static_cast<std::size_t>(x + ctx.X)];
    });
    return s;
}

inline void enumerate_outer(const LastCoordinateContext& ctx, std::size_t depth, i64 residual, double weight, bool all_zero,
                            CompensatedSum& out, u64& touched) {
    if (depth == ctx.outer_lambdas.size()) {
        const double s = leaf_sum(ctx, residual, all_zero, touched);
        if (s != 0.0) out.add(weight * s);
        return;
    }
    const i64 l = ctx.outer_lambdas[depth];
    for (i64 x = -ctx.X; x <= ctx.X; ++x) {
        if (!admissible(x, ctx.p, ctx.mode)) continue;
        const double wx = (*ctx.weights)[static_cast<std::size_t>(x + ctx.X)];
        if (wx == 0.0) continue;
        const i64 xr = static_cast<i64>(reduce(x, static_cast<u128>(ctx.q)));
        const i64 term = static_cast<i64>(static_cast<i128>(l) * xr % ctx.q * xr % ctx.q);
        i64 next = residual + term;
        if (next >= ctx.q) next -= ctx.q;
        enumerate_outer(ctx, depth + 1, next, weight * wx, all_zero && x % ctx.p == 0, out, touched);
    }
}

inline double last_coordinate_count(const DiagonalForm& form, const PrimePowerModulus& modulus, const std::vector<double>& weights,
                                    i64 X, CoprimalityMode mode, u64& touched) {
    const i64 q = modulus.q64();
    const std::size_t solved = solved_coordinate(form);
    LastCoordinateContext ctx;
    ctx.form = &form;
    ctx.q = q;
    ctx.p = static_cast<i64>(modulus.p());
    ctx.X = X;
    ctx.mode = mode;
    for (std::size_t j = 0; j < form.n(); ++j)
        if (j != solved) ctx.outer_lambdas.push_back(static_cast<i64>(reduce(form.lambdas[j], static_cast<u128>(q))));
    ctx.solved_lambda_inverse = inverse_mod(form.lambdas[solved], static_cast<u128>(q));
    ctx.weights = &weights;
    std::vector<std::optional<RootClassSet>> roots(static_cast<std::size_t>(q));
    for (i64 t = 0; t < q; ++t) roots[static_cast<std::size_t>(t)] = sqrt_classes_mod_prime_power(t, modulus);
    ctx.roots = &roots;

    if (ctx.outer_lambdas.empty()) {
        u64 t = 0;
        double s = leaf_sum(ctx, 0, true, t);
        touched += t;
        return s;
    }
    // Blocks over the first outer coordinate; reduction in block order.
    const std::size_t span = static_cast<std::size_t>(2 * X + 1);
    struct Partial {
        CompensatedSum sum;
        u64 touched = 0;
    };
    auto parts = parallel_blocks<Partial>(span, 1, [&](std::size_t begin, std::size_t end, std::size_t) {
        Partial part;
        for (std::size_t i = begin; i < end; ++i) {
            const i64 x = static_cast<i64>(i) - X;
            if (!admissible(x, ctx.p, mode)) continue;
            const double wx = weights[i];
            if (wx == 0.0) continue;
            const i64 xr = static_cast<i64>(reduce(x, static_cast<u128>(q)));
            const i64 term = static_cast<i64>(static_cast<i128>(ctx.outer_lambdas[0]) * xr % q * xr % q);
            enumerate_outer(ctx, 1, term, wx, x % ctx.p == 0, part.sum, part.touched);
        }
        return part;
    });
    CompensatedSum total;
    for (const auto& part : parts) {
        total.add(part.sum);
        touched += part.touched;
    }
    return total.value();
}

}  // namespace detail

inline CountReport count_weighted_direct(const DiagonalForm& form, const PrimePowerModulus& modulus, double N, const WeightSpec& w,
                                         CoprimalityMode mode, DirectStrategy strategy = DirectStrategy::automatic,
                                         Budget budget = {}) {
    detail::check_count_inputs(form, modulus, N);
    CountReport r = detail::report_skeleton(form, modulus, N, w, mode);
    const i64 X = static_cast<i64>(std::floor(w.support_radius() * N));
    r.box_radius = X;
    const long double side = 2.0L * X + 1.0L;
    const long double q = static_cast<long double>(modulus.q());
    const std::size_t n = form.n();
    const long double enumeration_cost = std::pow(side, static_cast<long double>(n - 1)) * modulus.m();
    const long double histogram_cost = static_cast<long double>(n) * q * q + n * side;

    if (strategy == DirectStrategy::automatic)
        strategy = enumeration_cost <= histogram_cost ? DirectStrategy::last_coordinate : DirectStrategy::residue_histogram;
    const std::vector<double> weights = detail::coordinate_weights(w, N, X);

    if (strategy == DirectStrategy::last_coordinate) {
        budget.charge(enumeration_cost + q, "count_weighted_direct (last coordinate)");
        r.T = detail::last_coordinate_count(form, modulus, weights, X, mode, r.points_enumerated);
        r.points_enumerated += static_cast<u64>(std::pow(side, static_cast<long double>(n - 1)));
    } else {
        budget.charge(histogram_cost * (mode == CoprimalityMode::all_units ? 1 : 2), "count_weighted_direct (residue histogram)");
        if (mode == CoprimalityMode::all_units) {
            r.T = detail::weighted_histogram_count(form, modulus, weights, X, CoordinateRange::units, false);
        } else {
            r.T = detail::weighted_histogram_count(form, modulus, weights, X, CoordinateRange::all, false) -
                  detail::weighted_histogram_count(form, modulus, weights, X, CoordinateRange::all, true);
        }
        r.points_enumerated = static_cast<u64>(histogram_cost);
    }
    r.T = std::max(0.0, r.T);
    r.method = std::string("direct/") + strategy_name(strategy);
    double full = 0.0;
    for (double v : weights) full += v;
    r.truncation_bound = static_cast<double>(n) * detail::outside_mass(w, N, X) * std::pow(full, static_cast<double>(n - 1));
    r.ratio = r.T0 > 0 ? r.T / r.T0 : std::numeric_limits<double>::quiet_NaN();
    return r;
}

// Frequency cutoff so that Psi vanishes (or falls below 1e-10 relative) outside |k_i| <= K.
inline i64 spectral_k_cutoff(const WeightSpec& w, double N, u128 q) {
    const double radius = w.fourier_support_radius(1e-10 * w.fourier_at_zero());
    if (!std::isfinite(radius))
        fail(errc::truncation_insufficient, "the weight's Fourier transform decays too slowly to truncate the frequency sum");
    return static_cast<i64>(std::floor(radius * static_cast<double>(q) / N));
}

inline CountReport count_weighted_spectral(const DiagonalForm& form, const PrimePowerModulus& modulus, double N, const WeightSpec& w,
                                           i64 k_cutoff = 0, Budget budget = {}) {
    detail::check_count_inputs(form, modulus, N);
    CountReport r = detail::report_skeleton(form, modulus, N, w, CoprimalityMode::all_units);
    const u64 p = modulus.p();
    const int m = modulus.m();
    const i64 q = modulus.q64();
    const std::size_t n = form.n();
    const i64 auto_cutoff = spectral_k_cutoff(w, N, modulus.q());
    if (k_cutoff <= 0) {
        k_cutoff = auto_cutoff;
    } else if (k_cutoff < auto_cutoff) {
        const double tail = w.fourier(static_cast<double>(k_cutoff + 1) * N / static_cast<double>(q));
        if (std::abs(tail) > 1e-10 * w.fourier_at_zero())
            fail(errc::truncation_insufficient, "k_cutoff " + std::to_string(k_cutoff) + " leaves a frequency tail above 1e-10");
    }
    r.k_cutoff = k_cutoff;
    const long double vectors = std::pow(2.0L * k_cutoff + 1.0L, static_cast<long double>(n));
    budget.charge(vectors * n, "count_weighted_spectral");

    // Psi factors per coordinate frequency.
    std::vector<double> psi(static_cast<std::size_t>(2 * k_cutoff + 1));
    for (i64 k = -k_cutoff; k <= k_cutoff; ++k)
        psi[static_cast<std::size_t>(k + k_cutoff)] = w.fourier(static_cast<double>(k) * N / static_cast<double>(q));

    const bool closed_available = m >= 2 && form.inhomogeneous_term % static_cast<i64>(p) != 0;
    std::optional<FClosedEvaluator> closed;
    if (closed_available) closed.emplace(form, modulus);
    std::vector<std::unordered_map<u64, std::complex<double>>> closed_cache(static_cast<std::size_t>(std::max(m - 1, 1)));
    std::map<std::vector<i64>, std::complex<double>> brute_cache;

    // k = 0: F(0) = q #B_m, which is T0 by Hensel stability.
    CompensatedComplexSum total;
    std::vector<i64> k(n, -k_cutoff), l(n);
    const double scale = std::pow(N, static_cast<double>(n)) / std::pow(static_cast<double>(q), static_cast<double>(n + 1));
    while (true) {
        double weight = 1.0;
        bool all_zero = true;
        for (std::size_t j = 0; j < n; ++j) {
            weight *= psi[static_cast<std::size_t>(k[j] + k_cutoff)];
            if (k[j] != 0) all_zero = false;
        }
        if (!all_zero && weight != 0.0) {
            int rmin = m, rmax = 0;
            for (std::size_t j = 0; j < n; ++j) {
                const int v = valuation(static_cast<i128>(reduce(k[j], static_cast<u128>(q))), p, m);
                rmin = std::min(rmin, v);
                rmax = std::max(rmax, v);
            }
            std::complex<double> F{0.0, 0.0};
            if (rmin <= m - 2 && rmin != rmax) {
                // mixed valuations: some unit-restricted Gauss difference vanishes for every h
            } else if (rmin <= m - 2 && closed) {
                const i64 pr = static_cast<i64>(modulus.power(rmin));
                for (std::size_t j = 0; j < n; ++j) l[j] = k[j] / pr;
                const u128 A = closed->dual_argument(rmin, l);
                auto& cache = closed_cache[static_cast<std::size_t>(rmin)];
                auto it = cache.find(static_cast<u64>(A));
                if (it == cache.end()) it = cache.emplace(static_cast<u64>(A), closed->value_from_dual_argument(rmin, A)).first;
                F = it->second;
            } else {
                std::vector<i64> key(n);
                for (std::size_t j = 0; j < n; ++j) key[j] = static_cast<i64>(reduce(k[j], static_cast<u128>(q)));
                auto it = brute_cache.find(key);
                if (it != brute_cache.end()) {
                    F = it->second;
                } else if (std::abs(weight) * std::pow(N, static_cast<double>(n)) >= 1e-10) {  // |F| <= q^{n+1}
                    try {
                        F = brute_cache.emplace(key, F_bruteforce(key, form, modulus, budget)).first->second;
                    } catch (const error& e) {
                        if (e.code() != errc::budget_exceeded) throw;
                        fail(errc::unsupported_case, "frequency with valuation >= m-1 contributes and F_bruteforce is over budget");
                    }
                }
            }
            if (F != std::complex<double>{0.0, 0.0}) {
                total.add(weight * F);
                ++r.frequencies_used;
            }
        }
        std::size_t j = 0;
        for (; j < n; ++j) {
            if (++k[j] <= k_cutoff) break;
            k[j] = -k_cutoff;
        }
        if (j == n) break;
    }
    r.T = r.T0 + scale * total.value().real();
    r.method = "spectral";
    r.points_enumerated = static_cast<u64>(vectors);
    r.truncation_bound = 1e-10 * r.T0;
    r.ratio = r.T0 > 0 ? r.T / r.T0 : std::numeric_limits<double>::quiet_NaN();
    return r;
}

// The k = 0 term N^n / q^{n+1} Phi^(0)^n F(0) with F(0) = q #B_m.
inline double spectral_zero_frequency(const DiagonalForm& form, const PrimePowerModulus& modulus, double N, const WeightSpec& w,
                                      Budget budget = {}) {
    const std::size_t n = form.n();
    const double q = static_cast<double>(modulus.q());
    const double count = static_cast<double>(count_B_m(form, modulus, budget));
    return std::pow(N, static_cast<double>(n)) / std::pow(q, static_cast<double>(n + 1)) *
           std::pow(w.fourier_at_zero(), static_cast<double>(n)) * q * count;
}

struct PoissonCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
};

// sum_{x = a mod q} Phi(x/N)  versus  N/q sum_{|k| <= truncation} Phi^(kN/q) e(ka/q)
inline PoissonCheck poisson_identity_check(const WeightSpec& w, i64 q, i64 a, double N, i64 truncation) {
    if (q < 1) fail(errc::invalid_argument, "q must be positive");
    if (!(N > 0)) fail(errc::invalid_argument, "N must be positive");
    if (truncation < 0) fail(errc::invalid_argument, "truncation must be non-negative");
    const double first_omitted = static_cast<double>(truncation + 1) * N / static_cast<double>(q);
    const double needed = w.fourier_support_radius(1e-10 * w.fourier_at_zero());
    if (!std::isfinite(needed) || first_omitted <= needed) {
        // tails below 1e-10 are required beyond the truncation
        if (!std::isfinite(needed) || std::abs(w.fourier_exact(first_omitted)) > 1e-10 * w.fourier_at_zero())
            fail(errc::truncation_insufficient, "truncation " + std::to_string(truncation) + " leaves a tail above 1e-10");
    }
    PoissonCheck out;
    const i64 X = static_cast<i64>(std::ceil(2.0 * w.support_radius() * N)) + q;
    const i64 ar = static_cast<i64>(reduce(a, static_cast<u128>(q)));
    CompensatedSum lhs;
    for (i64 x = ar - ((X + ar) / q) * q; x <= X; x += q) lhs.add(w.eval_exact(static_cast<double>(x) / N));
    CompensatedSum rhs;
    for (i64 k = -truncation; k <= truncation; ++k) {
        const double f = w.fourier_exact(static_cast<double>(k) * N / static_cast<double>(q));
        if (f == 0.0) continue;
        rhs.add(f * additive_character(static_cast<i128>(k) * ar, static_cast<u128>(q)).real());
    }
    out.lhs = lhs.value();
    out.rhs = N / static_cast<double>(q) * rhs.value();
    out.gap = std::abs(out.lhs - out.rhs);
    return out;
}

}  // namespace congruence_lab
