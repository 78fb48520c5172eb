#pragma once

// Representation numbers of the dual form Q~(l) = sum Delta_j l_j^2 with unit coordinates,
// singular-series coefficients a_q(k), the singular integral, and the quadruple count
//   #{|l_i| <= M : a1 l1^2 + a2 l2^2 + a3 l3^2 + a4 l4^2 = b (mod c)}.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "core.hpp"
#include "densities.hpp"
#include "diagonal_form.hpp"
#include "modmath.hpp"
#include "parallel.hpp"
#include "weights.hpp"

namespace congruence_lab {

// Delta = lambda_1 ... lambda_{n+1}, Delta_j = Delta / lambda_j, Delta_{n+1} Lambda = 1 (mod p^m).
struct DualForm {
    std::vector<i64> deltas;
    i64 Lambda = 0;
    u128 modulus = 0;

    DualForm() = default;
    explicit DualForm(std::vector<i64> d, i64 lambda = 0, u128 mod = 0) : deltas(std::move(d)), Lambda(lambda), modulus(mod) {
        if (deltas.empty()) fail(errc::invalid_argument, "dual form needs at least one coefficient");
    }

    static DualForm from_form(const DiagonalForm& form, const PrimePowerModulus& mod) {
        form.require_units(mod.p(), true);
        i128 delta = form.inhomogeneous_term;
        for (i64 l : form.lambdas) {
            delta *= l;
            if (abs_u(delta) > (static_cast<u128>(1) << 100)) fail(errc::invalid_argument, "coefficient product too large");
        }
        std::vector<i64> d;
        for (i64 l : form.lambdas) {
            const i128 v = delta / l;
            if (abs_u(v) > static_cast<u128>(INT64_MAX)) fail(errc::invalid_argument, "dual coefficient exceeds 64 bits");
            d.push_back(static_cast<i64>(v));
        }
        const i128 last = delta / form.inhomogeneous_term;
        const u128 inv = inverse_mod(last, mod.q());
        return DualForm(std::move(d), static_cast<i64>(inv), mod.q());
    }

    std::size_t n() const { return deltas.size(); }

    i128 evaluate(std::span<const i64> l) const {
        i128 total = 0;
        for (std::size_t j = 0; j < deltas.size(); ++j) total += static_cast<i128>(deltas[j]) * l[j] * l[j];
        return total;
    }

    bool positive_definite() const {
        return std::all_of(deltas.begin(), deltas.end(), [](i64 d) { return d > 0; });
    }

    void require_positive_definite() const {
        if (!positive_definite()) fail(errc::indefinite_form, "dual form must have all Delta_j > 0");
    }
};

namespace detail {

inline i64 isqrt_floor(i128 v) {
    if (v <= 0) return 0;
    i64 r = static_cast<i64>(std::sqrt(static_cast<long double>(v)));
    while (static_cast<i128>(r) * r > v) --r;
    while (static_cast<i128>(r + 1) * (r + 1) <= v) ++r;
    return r;
}

struct ConeDescent {
    std::vector<i64> deltas;  // sorted descending
    std::vector<std::size_t> order;
    i64 p;
    i64 coordinate_cap;  // |l_j| <= cap; negative means uncapped
    u64 max_nodes;
    u64 nodes = 0;
    std::vector<i64> l;

    template <class Fn>
    void descend(std::size_t depth, i128 remaining, Fn& fn) {
        if (++nodes > max_nodes) fail(errc::budget_exceeded, "representation enumeration exceeded its budget");
        const i64 d = deltas[depth];
        if (depth + 1 == deltas.size()) {
            if (remaining <= 0 || remaining % d != 0) return;
            const i128 sq = remaining / d;
            const i64 r = isqrt_floor(sq);
            if (static_cast<i128>(r) * r != sq || r % p == 0) return;
            if (coordinate_cap >= 0 && r > coordinate_cap) return;
            for (i64 v : {r, -r}) {
                l[order[depth]] = v;
                fn(static_cast<const std::vector<i64>&>(l));
            }
            return;
        }
        i64 bound = isqrt_floor(remaining / d);
        if (coordinate_cap >= 0) bound = std::min(bound, coordinate_cap);
        for (i64 v = 1; v <= bound; ++v) {
            if (v % p == 0) continue;
            const i128 rest = remaining - static_cast<i128>(d) * v * v;
            for (i64 s : {v, -v}) {
                l[order[depth]] = s;
                descend(depth + 1, rest, fn);
            }
        }
    }
};

}  // namespace detail

// Calls fn(l) for every l in Z^n with unit coordinates mod p and Q~(l) = k.
// Coordinates are peeled off in order of descending Delta_j.
template <class Fn>
u64 for_each_representation(i128 k, const DualForm& dual, u64 p, Fn&& fn, i64 coordinate_cap = -1, Budget budget = {}) {
    dual.require_positive_definite();
    if (k <= 0) return 0;
    detail::ConeDescent cd;
    cd.order.resize(dual.n());
    std::iota(cd.order.begin(), cd.order.end(), std::size_t{0});
    std::stable_sort(cd.order.begin(), cd.order.end(), [&](std::size_t a, std::size_t b) { return dual.deltas[a] > dual.deltas[b]; });
    for (std::size_t j : cd.order) cd.deltas.push_back(dual.deltas[j]);
    cd.p = static_cast<i64>(p);
    cd.coordinate_cap = coordinate_cap;
    cd.max_nodes = budget.max_ops;
    cd.l.assign(dual.n(), 0);
    cd.descend(0, k, fn);
    return cd.nodes;
}

inline u64 representation_count(i128 k, const DualForm& dual, u64 p, Budget budget = {}) {
    u64 count = 0;
    for_each_representation(k, dual, p, [&](const std::vector<i64>&) { ++count; }, -1, budget);
    return count;
}

// sum over representations of prod_j Omega(l_j / P), with Omega = Phi^ of the weight.
inline double weighted_representations(i128 k, const DualForm& dual, u64 p, const WeightSpec& w, double P, Budget budget = {}) {
    if (!(P > 0)) fail(errc::invalid_argument, "scale P must be positive");
    const double radius = w.fourier_support_radius();
    const i64 cap = std::isfinite(radius) && w.kind() == WeightKind::bump_pair ? static_cast<i64>(std::ceil(radius * P)) : -1;
    CompensatedSum acc;
    for_each_representation(
        k, dual, p,
        [&](const std::vector<i64>& l) {
            double prod = 1.0;
            for (i64 v : l) prod *= w.fourier(static_cast<double>(v) / P);
            acc.add(prod);
        },
        cap, budget);
    return acc.value();
}

// tau_n(k) = sum_{Q~(l) = k, units} Psi(p^r l), Psi(x) = prod Phi^(x_i N / p^m).
inline double tau_n(i128 k, const DualForm& dual, int r, const WeightSpec& w, const PrimePowerModulus& mod, double N,
                    Budget budget = {}) {
    if (r < 0 || r > mod.m()) fail(errc::invalid_argument, "r must lie in [0, m]");
    if (!(N > 0)) fail(errc::invalid_argument, "N must be positive");
    const double P = static_cast<double>(mod.q()) / (static_cast<double>(mod.power(r)) * N);
    return weighted_representations(k, dual, mod.p(), w, P, budget);
}

// --- singular series ---------------------------------------------------------

// Per-q precomputation: for each unit a mod q the product over j of
//   S_j(a) = sum_{x mod pq, p not dividing x} e_q(a Delta_j x^2).
class SingularCoefficientTable {
public:
    SingularCoefficientTable(i64 q, const DualForm& dual, u64 p, Budget budget = {}) : q_(q), table_(q) {
        if (q < 1) fail(errc::invalid_argument, "q must be positive");
        detail::require_small_prime(p);
        const i64 pq = q * static_cast<i64>(p);
        budget.charge(static_cast<long double>(q) * pq * dual.n(), "singular_coefficient");
        std::vector<i64> squares;
        for (i64 x = 0; x < pq; ++x)
            if (x % static_cast<i64>(p) != 0) squares.push_back(static_cast<i64>(static_cast<i128>(x) * x % q));
        for (i64 a = 0; a < q; ++a)
            if (std::gcd(a, q) == 1) units_.push_back(a);
        products_.assign(units_.size(), 1.0);
        std::vector<i64> distinct = dual.deltas;
        std::sort(distinct.begin(), distinct.end());
        for (std::size_t u = 0; u < units_.size(); ++u) {
            for (std::size_t j = 0; j < distinct.size();) {
                std::size_t multiplicity = 1;
                while (j + multiplicity < distinct.size() && distinct[j + multiplicity] == distinct[j]) ++multiplicity;
                const i64 ad = static_cast<i64>(reduce(static_cast<i128>(units_[u]) * distinct[j], static_cast<u128>(q)));
                double re = 0, im = 0;
                for (i64 s : squares) {
                    const i64 idx = static_cast<i64>(static_cast<i128>(ad) * s % q);
                    re += table_.re(idx);
                    im += table_.im(idx);
                }
                const std::complex<double> S(re, im);
                for (std::size_t t = 0; t < multiplicity; ++t) products_[u] *= S;
                j += multiplicity;
            }
        }
        scale_ = std::pow(static_cast<double>(pq), -static_cast<double>(dual.n()));
    }

    // a_q(k); depends only on k mod q.
    double operator()(i128 k) const {
        const i64 kk = static_cast<i64>(reduce(k, static_cast<u128>(q_)));
        CompensatedSum acc;
        for (std::size_t u = 0; u < units_.size(); ++u) {
            const i64 idx = static_cast<i64>(reduce(-static_cast<i128>(units_[u]) * kk, static_cast<u128>(q_)));
            acc.add((std::complex<double>(table_.re(idx), table_.im(idx)) * products_[u]).real());
        }
        return acc.value() * scale_;
    }

private:
    i64 q_;
    RootTable table_;
    std::vector<i64> units_;
    std::vector<std::complex<double>> products_;
    double scale_ = 1.0;
};

inline double singular_coefficient(i64 q, i128 k, const DualForm& dual, u64 p, Budget budget = {}) {
    return SingularCoefficientTable(q, dual, p, budget)(k);
}

// Literal (pq)^n double sum, kept as the oracle for the factorized form.
inline double singular_coefficient_naive(i64 q, i128 k, const DualForm& dual, u64 p, Budget budget = {}) {
    if (q < 1) fail(errc::invalid_argument, "q must be positive");
    const i64 pp = static_cast<i64>(p);
    const i64 pq = q * pp;
    const std::size_t n = dual.n();
    budget.charge(std::pow(static_cast<long double>(pq), static_cast<long double>(n)), "singular_coefficient_naive");
    std::vector<double> histogram(static_cast<std::size_t>(q), 0.0);
    std::vector<i64> x(n, 1);
    while (true) {
        histogram[static_cast<std::size_t>(reduce(dual.evaluate(x), static_cast<u128>(q)))] += 1.0;
        std::size_t j = 0;
        for (; j < n; ++j) {
            ++x[j];
            if (x[j] % pp == 0) ++x[j];
            if (x[j] < pq) break;
            x[j] = 1;
        }
        if (j == n) break;
    }
    CompensatedSum acc;
    for (i64 a = 0; a < q; ++a) {
        if (std::gcd(a, q) != 1) continue;
        for (i64 v = 0; v < q; ++v)
            if (histogram[static_cast<std::size_t>(v)] != 0)
                acc.add(histogram[static_cast<std::size_t>(v)] * additive_character(static_cast<i128>(a) * (v - k), static_cast<u128>(q)).real());
    }
    return acc.value() * std::pow(static_cast<double>(pq), -static_cast<double>(n));
}

struct SingularData {
    i128 k = 0;
    int q_max = 0;
    std::vector<double> coefficients;  // coefficients[q - 1] = a_q(k)
    double partial_sum = 0.0;
    double decay_constant = 0.0;  // max_q |a_q(k)| q^{n/2 - 1}
    double tail_bound = 0.0;
};

// sum_{q <= q_max} a_q(k), with tail estimate C q_max^{2 - n/2} for n >= 5 and C / q_max for n = 4.
inline SingularData singular_series(i128 k, const DualForm& dual, u64 p, int q_max, Budget budget = {}) {
    const std::size_t n = dual.n();
    if (n < 4) fail(errc::invalid_argument, "singular series needs n >= 4");
    if (q_max < 1) fail(errc::invalid_argument, "q_max must be positive");
    SingularData out;
    out.k = k;
    out.q_max = q_max;
    out.coefficients = parallel_blocks<double>(static_cast<std::size_t>(q_max), 1, [&](std::size_t i, std::size_t, std::size_t) {
        return singular_coefficient(static_cast<i64>(i) + 1, k, dual, p, budget);
    });
    CompensatedSum acc;
    const double half = static_cast<double>(n) / 2.0;
    for (int q = 1; q <= q_max; ++q) {
        const double a = out.coefficients[static_cast<std::size_t>(q - 1)];
        acc.add(a);
        out.decay_constant = std::max(out.decay_constant, std::abs(a) * std::pow(static_cast<double>(q), half - 1.0));
    }
    out.partial_sum = acc.value();
    out.tail_bound = n == 4 ? out.decay_constant / q_max : out.decay_constant * std::pow(static_cast<double>(q_max), 2.0 - half);
    return out;
}

// --- singular integral -------------------------------------------------------

struct SingularIntegralOptions {
    u64 samples = 1u << 20;  // Monte Carlo directions for n >= 3
    u64 seed = 0x5eed;
    int angular_nodes = 4096;  // trapezoid nodes for n = 2
};

namespace detail {

inline u64 splitmix64(u64& state) {
    u64 z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline double unit_interval(u64& state) { return (static_cast<double>(splitmix64(state) >> 11) + 0.5) * 0x1.0p-53; }

inline double sphere_area(std::size_t n) {
    return 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
}

}  // namespace detail

// Thin-shell density of sum Delta_j x_j^2 at t = k / P^2 for the weight prod Omega(x_j), Omega = Phi^.
// With x_j = y_j / sqrt(Delta_j) the shell is a round sphere of radius sqrt(t):
//   sigma = (prod Delta_j)^{-1/2} t^{n/2 - 1} / 2 * |S^{n-1}| * mean over directions of the weight.
inline double singular_integral(double k, double P, const DualForm& dual, const WeightSpec& w,
                                const SingularIntegralOptions& opt = {}) {
    dual.require_positive_definite();
    if (!(P >= 1.0)) fail(errc::invalid_argument, "P must be at least 1");
    if (!(k > 0)) fail(errc::invalid_argument, "k must be positive");
    const std::size_t n = dual.n();
    const double t = k / (P * P);
    const double rho = std::sqrt(t);
    std::vector<double> inv_sqrt(n);
    double det = 1.0;
    i64 delta_max = 0;
    for (std::size_t j = 0; j < n; ++j) {
        inv_sqrt[j] = 1.0 / std::sqrt(static_cast<double>(dual.deltas[j]));
        det *= static_cast<double>(dual.deltas[j]);
        delta_max = std::max(delta_max, dual.deltas[j]);
    }
    if (w.kind() == WeightKind::bump_pair) {
        const double support = w.fourier_support_radius();
        if (t > static_cast<double>(n) * static_cast<double>(delta_max) * support * support) return 0.0;
    }
    auto weight_at = [&](const double* theta) {
        double prod = 1.0;
        for (std::size_t j = 0; j < n; ++j) prod *= w.fourier(rho * theta[j] * inv_sqrt[j]);
        return prod;
    };
    double mean = 0.0;
    if (n == 1) {
        const double plus = 1.0, minus = -1.0;
        mean = 0.5 * (weight_at(&plus) + weight_at(&minus));
    } else if (n == 2) {
        CompensatedSum acc;
        for (int i = 0; i < opt.angular_nodes; ++i) {
            const double phi = 2.0 * std::numbers::pi * i / opt.angular_nodes;
            const double theta[2] = {std::cos(phi), std::sin(phi)};
            acc.add(weight_at(theta));
        }
        mean = acc.value() / opt.angular_nodes;
    } else {
        constexpr std::size_t blocks = 64;
        const u64 per_block = std::max<u64>(1, opt.samples / blocks);
        auto partial = parallel_blocks<double>(blocks, 1, [&](std::size_t b, std::size_t, std::size_t) {
            u64 state = opt.seed ^ (0xD1B54A32D192ED03ULL * (b + 1));
            std::vector<double> theta(n + 1);
            CompensatedSum acc;
            for (u64 s = 0; s < per_block; ++s) {
                double norm2 = 0.0;
                for (std::size_t j = 0; j < n; j += 2) {
                    const double r = std::sqrt(-2.0 * std::log(detail::unit_interval(state)));
                    const double a = 2.0 * std::numbers::pi * detail::unit_interval(state);
                    theta[j] = r * std::cos(a);
                    theta[j + 1] = r * std::sin(a);
                }
                for (std::size_t j = 0; j < n; ++j) norm2 += theta[j] * theta[j];
                const double inv = 1.0 / std::sqrt(norm2);
                for (std::size_t j = 0; j < n; ++j) theta[j] *= inv;
                acc.add(weight_at(theta.data()));
            }
            return acc.value();
        });
        CompensatedSum total;
        for (double v : partial) total.add(v);
        mean = total.value() / static_cast<double>(per_block * blocks);
    }
    return mean * detail::sphere_area(n) * 0.5 * std::pow(t, n / 2.0 - 1.0) / std::sqrt(det);
}

// --- quadruple count ---------------------------------------------------------

// Meet in the middle: sorted residues of a1 l1^2 + a2 l2^2, then for each (l3, l4)
// the number of pairs hitting b - a3 l3^2 - a4 l4^2.
inline u64 quadruple_count(const std::array<i64, 4>& alphas, i128 b, const PrimePowerModulus& c, i64 M, Budget budget = {}) {
    if (M < 0) fail(errc::invalid_argument, "M must be non-negative");
    for (i64 a : alphas)
        if (a % static_cast<i64>(c.p()) == 0) fail(errc::coprimality_violated, "alpha_i must be coprime to p");
    const u128 q = c.q();
    if (8 * static_cast<u128>(M) * static_cast<u128>(M) >= q) fail(errc::hypothesis_violated, "needs 8 M^2 < c");
    const i64 side = 2 * M + 1;
    budget.charge(static_cast<long double>(side) * side * 2, "quadruple_count");
    auto pair_residues = [&](i64 a1, i64 a2) {
        std::vector<u128> v;
        v.reserve(static_cast<std::size_t>(side * side));
        for (i64 x = -M; x <= M; ++x)
            for (i64 y = -M; y <= M; ++y)
                v.push_back(reduce(static_cast<i128>(a1) * x * x + static_cast<i128>(a2) * y * y, q));
        return v;
    };
    auto left = pair_residues(alphas[0], alphas[1]);
    std::sort(left.begin(), left.end());
    const u128 target = reduce(b, q);
    u64 count = 0;
    for (u128 r : pair_residues(alphas[2], alphas[3])) {
        const u128 need = target >= r ? target - r : target + q - r;
        auto range = std::equal_range(left.begin(), left.end(), need);
        count += static_cast<u64>(range.second - range.first);
    }
    return count;
}

}  // namespace congruence_lab
