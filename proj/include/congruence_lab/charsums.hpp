#pragma once

// Quadratic Gauss sums, Kloosterman and Salie sums modulo odd prime powers:
// brute-force kernels and closed-form evaluators, plus the Poisson-dual kernel
// F(k) of the weighted congruence count.

#include <cmath>
#include <complex>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "core.hpp"
#include "diagonal_form.hpp"
#include "modmath.hpp"
#include "parallel.hpp"

namespace congruence_lab {

// ---------------------------------------------------------------------------
// Exact values.
// ---------------------------------------------------------------------------

// rational_factor * sign * eps * sqrt(sqrt_arg) * e(phase_num / phase_den), or zero.
struct ExactCharSum {
    bool is_zero = true;
    u128 rational_factor = 1;
    int sign = 1;
    EpsilonFactor eps = EpsilonFactor::one;
    u128 sqrt_arg = 1;
    i128 phase_num = 0;
    u128 phase_den = 1;

    static ExactCharSum zero() { return ExactCharSum{}; }

    static ExactCharSum rational(u128 value) {
        if (value == 0) return zero();
        ExactCharSum s;
        s.is_zero = false;
        s.rational_factor = value;
        return s;
    }

    std::complex<double> to_complex() const {
        if (is_zero) return {0.0, 0.0};
        long double magnitude = static_cast<long double>(rational_factor) * std::sqrt(static_cast<long double>(sqrt_arg));
        std::complex<double> unit = additive_character(phase_num, phase_den) * congruence_lab::to_complex(eps);
        return unit * static_cast<double>(sign * magnitude);
    }
};

// i^quarter_turns * e(phase_num / p^s)
struct UnitTerm {
    int quarter_turns = 0;
    i128 phase_num = 0;
};

// sqrt(p^s) * sum of at most two unit terms.
struct KloostermanClosedForm {
    bool is_zero = true;
    u64 p = 3;
    int s = 1;
    std::vector<UnitTerm> terms;

    u128 modulus() const {
        u128 q = 1;
        for (int i = 0; i < s; ++i) q *= p;
        return q;
    }

    std::complex<double> to_complex() const {
        if (is_zero) return {0.0, 0.0};
        static const std::complex<double> quarter[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        const u128 q = modulus();
        std::complex<double> total{0.0, 0.0};
        for (const auto& t : terms) total += quarter[((t.quarter_turns % 4) + 4) % 4] * additive_character(t.phase_num, q);
        return total * static_cast<double>(std::sqrt(static_cast<long double>(q)));
    }
};

namespace detail {

inline int quarter_turns_of(EpsilonFactor e) { return e == EpsilonFactor::one ? 0 : 1; }

inline i64 mod_i64(i64 a, i64 m) {
    i64 r = a % m;
    return r < 0 ? r + m : r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Generalized quadratic Gauss sums G(a, b, c) = sum_{n mod c} e_c(a n^2 + b n).
// ---------------------------------------------------------------------------

inline std::complex<double> gauss_sum_bruteforce(i64 a, i64 b, const RootTable& table) {
    const i64 c = table.modulus();
    const double* re = table.re_data();
    const double* im = table.im_data();
    const i64 two_a = detail::mod_i64(2 * detail::mod_i64(a, c), c);
    i64 idx = 0;                                      // a n^2 + b n
    i64 delta = detail::mod_i64(detail::mod_i64(a, c) + detail::mod_i64(b, c), c);  // a(2n+1) + b
    double re0 = 0, re1 = 0, im0 = 0, im1 = 0;
    i64 n = 0;
    for (; n + 1 < c; n += 2) {
        re0 += re[idx];
        im0 += im[idx];
        idx += delta;
        if (idx >= c) idx -= c;
        delta += two_a;
        if (delta >= c) delta -= c;
        re1 += re[idx];
        im1 += im[idx];
        idx += delta;
        if (idx >= c) idx -= c;
        delta += two_a;
        if (delta >= c) delta -= c;
    }
    if (n < c) {
        re0 += re[idx];
        im0 += im[idx];
    }
    return {re0 + re1, im0 + im1};
}

inline std::complex<double> gauss_sum_bruteforce(i64 a, i64 b, i64 c) {
    if (c < 1) fail(errc::invalid_argument, "Gauss sum modulus must be positive");
    return gauss_sum_bruteforce(a, b, RootTable(c));
}

// Closed form for c = p^m: factor d = (a, c) out, vanish when d does not divide b,
// then complete the square and evaluate G(a', 0, c') = (a'/c') eps_{c'} sqrt(c').
inline ExactCharSum gauss_sum_closed(i128 a, i128 b, const PrimePowerModulus& modulus) {
    const u128 c = modulus.q();
    const int v = valuation(static_cast<i128>(reduce(a, c)), modulus.p(), modulus.m());
    const u128 d = modulus.power(v);
    if (reduce(b, d) != 0) return ExactCharSum::zero();
    if (v == modulus.m()) return ExactCharSum::rational(reduce(b, c) == 0 ? c : 0);

    const u128 c1 = c / d;
    const u128 a1 = reduce(a, c) / d;
    const u128 b1 = reduce(b, c) / d % c1;

    ExactCharSum out;
    out.is_zero = false;
    out.rational_factor = d;
    out.sign = jacobi_symbol(static_cast<i128>(a1), static_cast<i128>(c1));
    out.eps = epsilon_c(static_cast<i128>(c1));
    out.sqrt_arg = c1;
    // phase -(4a')^{-1} b'^2 / c'
    u128 inv4a = inverse_mod(static_cast<i128>(mul_mod(4, a1, c1)), c1);
    u128 ph = mul_mod(inv4a, mul_mod(b1, b1, c1), c1);
    out.phase_num = ph == 0 ? 0 : static_cast<i128>(c1 - ph);
    out.phase_den = c1;
    return out;
}

// ---------------------------------------------------------------------------
// Kloosterman K0(a,b,c) and Salie K1(a,b,c) sums over units n mod c.
// ---------------------------------------------------------------------------

// Units mod c with their inverses and Jacobi symbols, shared by repeated sums.
class UnitSumKernel {
public:
    explicit UnitSumKernel(i64 c) : table_(c) {
        if (c < 1 || c % 2 == 0) fail(errc::even_modulus, "Kloosterman and Salie sums need an odd modulus");
        for (i64 n = 0; n < c; ++n) {
            if (std::gcd(n, c) != 1) continue;
            units_.push_back(n);
            inverses_.push_back(static_cast<i64>(inverse_mod(n, static_cast<u128>(c))));
            jacobi_.push_back(jacobi_symbol(n, c));
        }
    }

    i64 modulus() const { return table_.modulus(); }

    std::complex<double> kloosterman(i64 a, i64 b) const { return sum(a, b, false); }
    std::complex<double> salie(i64 a, i64 b) const { return sum(a, b, true); }

private:
    std::complex<double> sum(i64 a, i64 b, bool twisted) const {
        const i64 c = modulus();
        const i64 ar = detail::mod_i64(a, c), br = detail::mod_i64(b, c);
        double re = 0, im = 0;
        for (std::size_t i = 0; i < units_.size(); ++i) {
            i64 idx = static_cast<i64>((static_cast<i128>(ar) * inverses_[i] + static_cast<i128>(br) * units_[i]) % c);
            double w = twisted ? jacobi_[i] : 1.0;
            re += w * table_.re(idx);
            im += w * table_.im(idx);
        }
        return {re, im};
    }

    RootTable table_;
    std::vector<i64> units_;
    std::vector<i64> inverses_;
    std::vector<int> jacobi_;
};

inline std::complex<double> kloosterman_bruteforce(i64 a, i64 b, i64 c) { return UnitSumKernel(c).kloosterman(a, b); }

inline std::complex<double> salie_bruteforce(i64 a, i64 b, i64 c) { return UnitSumKernel(c).salie(a, b); }

namespace detail {

enum class UnitSumCase { both_units, zero_by_vanishing, unsupported };

inline UnitSumCase classify_unit_sum(i128 a, i128 b, const PrimePowerModulus& modulus) {
    const u64 p = modulus.p();
    const bool pa = reduce(a, p) == 0, pb = reduce(b, p) == 0;
    if (pa && pb) return UnitSumCase::unsupported;
    if (pa || pb) {
        // p | a, p !| b vanishes for m >= 2; p | b reduces to it through K(a,b) = K(b,a).
        if (modulus.m() < 2) return UnitSumCase::unsupported;
        return UnitSumCase::zero_by_vanishing;
    }
    return UnitSumCase::both_units;
}

inline KloostermanClosedForm empty_form(const PrimePowerModulus& modulus) {
    KloostermanClosedForm f;
    f.p = modulus.p();
    f.s = modulus.m();
    return f;
}

}  // namespace detail

// K0(a, b, p^s) = 2 (v/c) sqrt(c) Re(eps_c e_c(2v)) with v^2 = ab, or 0.
inline KloostermanClosedForm kloosterman_closed(i128 a, i128 b, const PrimePowerModulus& modulus) {
    if (modulus.m() < 2) fail(errc::invalid_argument, "closed Kloosterman evaluation needs exponent m >= 2");
    KloostermanClosedForm out = detail::empty_form(modulus);
    switch (detail::classify_unit_sum(a, b, modulus)) {
        case detail::UnitSumCase::unsupported:
            fail(errc::unsupported_case, "K0 with p dividing both arguments has no closed form here");
        case detail::UnitSumCase::zero_by_vanishing:
            return out;
        case detail::UnitSumCase::both_units:
            break;
    }
    const u128 c = modulus.q();
    RootClassSet roots = sqrt_classes_mod_prime_power(static_cast<i128>(mul_mod(reduce(a, c), reduce(b, c), c)), modulus);
    if (roots.empty()) return out;
    const u128 v = roots.progressions.front().offset;
    int turns = detail::quarter_turns_of(epsilon_c(static_cast<i128>(c)));
    if (jacobi_symbol(static_cast<i128>(v), static_cast<i128>(c)) < 0) turns += 2;
    const u128 two_v = add_mod(v, v, c);
    out.is_zero = false;
    // 2 Re(z) = z + conj(z); conj(eps) = eps^{-1}.
    out.terms.push_back({turns, static_cast<i128>(two_v)});
    out.terms.push_back({(4 - turns) % 4, static_cast<i128>(two_v == 0 ? 0 : c - two_v)});
    return out;
}

// K1(a, b, p^s) = eps_c (b/c) sqrt(c) sum_{v^2 = ab} e_c(2v).
inline KloostermanClosedForm salie_closed(i128 a, i128 b, const PrimePowerModulus& modulus) {
    KloostermanClosedForm out = detail::empty_form(modulus);
    switch (detail::classify_unit_sum(a, b, modulus)) {
        case detail::UnitSumCase::unsupported:
            fail(errc::unsupported_case, "K1 with p dividing both arguments (or m = 1 with p | ab) has no closed form here");
        case detail::UnitSumCase::zero_by_vanishing:
            return out;
        case detail::UnitSumCase::both_units:
            break;
    }
    const u128 c = modulus.q();
    RootClassSet roots = sqrt_classes_mod_prime_power(static_cast<i128>(mul_mod(reduce(a, c), reduce(b, c), c)), modulus);
    if (roots.empty()) return out;
    int turns = detail::quarter_turns_of(epsilon_c(static_cast<i128>(c)));
    if (jacobi_symbol(b, static_cast<i128>(c)) < 0) turns += 2;
    out.is_zero = false;
    for (const auto& pr : roots.progressions) out.terms.push_back({turns, static_cast<i128>(add_mod(pr.offset, pr.offset, c))});
    return out;
}

// ---------------------------------------------------------------------------
// Vanishing criterion for S_alpha(f; p^n) with f(x) = a/x + b x.
// ---------------------------------------------------------------------------

// f'(x) = (b x^2 - a) / x^2, so r = ord_p(f') = min(v_p(a), v_p(b)) and the criterion
// asks for r <= n-2 and p^{-r} (b alpha^2 - a) != 0 mod p.
inline bool cochrane_vanishes(i128 a, i128 b, const Residue& alpha, const PrimePowerModulus& modulus) {
    const u64 p = modulus.p();
    if (alpha.modulus != p) fail(errc::invalid_argument, "alpha must be a residue modulo p");
    if (alpha.value % p == 0) fail(errc::invalid_argument, "alpha must be coprime to p");
    if (modulus.m() < 2) return false;
    if (a == 0 && b == 0) return false;
    const int big = 1 << 20;
    const int r = std::min(valuation(a, p, big), valuation(b, p, big));
    if (r > modulus.m() - 2) return false;
    // p^{-r}(b alpha^2 - a) mod p; the power of p divides both coefficients.
    i128 pr = 1;
    for (int i = 0; i < r; ++i) pr *= static_cast<i128>(p);
    const u128 al2 = mul_mod(alpha.value, alpha.value, p);
    const u128 bb = reduce(b / pr, p), aa = reduce(a / pr, p);
    const u128 value = (mul_mod(bb, al2, p) + p - aa) % p;
    return value != 0;
}

// S_alpha(f; p^n) = sum_{x = 1..p^n, x = alpha (mod p)} e_{p^n}(a xbar + b x).
inline std::complex<double> laurent_restricted_sum(i64 a, i64 b, i64 alpha, const PrimePowerModulus& modulus) {
    const i64 q = modulus.q64();
    const i64 p = static_cast<i64>(modulus.p());
    if (detail::mod_i64(alpha, p) == 0) fail(errc::invalid_argument, "alpha must be coprime to p");
    std::complex<double> total{0.0, 0.0};
    for (i64 x = detail::mod_i64(alpha, p); x < q; x += p) {
        i64 inv = static_cast<i64>(inverse_mod(x, static_cast<u128>(q)));
        total += additive_character(static_cast<i128>(a) * inv + static_cast<i128>(b) * x, static_cast<u128>(q));
    }
    return total;
}

// ---------------------------------------------------------------------------
// Unit-restricted quadratic sums as differences of Gauss sums.
// ---------------------------------------------------------------------------

// G(h lambda, k, p^m) - G(h lambda p, k, p^{m-1}) in closed form. With s = ord_p(h)
// and r = ord_p(k) (valuations of 0 taken as m): zero when s > r (except -p^{m-1} for
// h = 0, r = m-1), zero when s < r and
// s <= m-2, and for s = r <= m-2 the single term
//   (h' lambda / p^{m-r}) eps_{p^{m-r}} p^{(m+r)/2} e(-(4 h' lambda)^{-1} l^2 / p^{m-r}).
inline ExactCharSum gauss_difference(i128 h, i128 lambda, i128 k, const PrimePowerModulus& modulus) {
    const u64 p = modulus.p();
    const int m = modulus.m();
    const u128 q = modulus.q();
    if (m < 2) fail(errc::invalid_argument, "gauss_difference needs m >= 2");
    if (reduce(lambda, p) == 0) fail(errc::coprimality_violated, "lambda must be coprime to p");
    const int s = valuation(static_cast<i128>(reduce(h, q)), p, m);
    const int r = valuation(static_cast<i128>(reduce(k, q)), p, m);
    if (s > r) {
        if (s == m && r == m - 1) {
            ExactCharSum out = ExactCharSum::rational(q / p);
            out.sign = -1;
            return out;
        }
        return ExactCharSum::zero();
    }
    if (s < r) {
        if (s <= m - 2) return ExactCharSum::zero();
        fail(errc::unsupported_case, "difference with ord_p(h) = m-1 < ord_p(k) is a two-term value");
    }
    if (r == m) return ExactCharSum::rational(q - q / p);
    if (r == m - 1) fail(errc::unsupported_case, "difference with ord_p(h) = ord_p(k) = m-1 is a two-term value");

    const u128 pr = modulus.power(r);
    const u128 c1 = q / pr;
    const u128 h1 = reduce(h, q) / pr % c1;
    const u128 l1 = reduce(k, q) / pr % c1;
    const u128 hl = mul_mod(h1, reduce(lambda, c1), c1);
    ExactCharSum out;
    out.is_zero = false;
    out.rational_factor = pr;
    out.sign = jacobi_symbol(static_cast<i128>(hl), static_cast<i128>(c1));
    out.eps = epsilon_c(static_cast<i128>(c1));
    out.sqrt_arg = c1;
    u128 ph = mul_mod(inverse_mod(static_cast<i128>(mul_mod(4, hl, c1)), c1), mul_mod(l1, l1, c1), c1);
    out.phase_num = ph == 0 ? 0 : static_cast<i128>(c1 - ph);
    out.phase_den = c1;
    return out;
}

// ---------------------------------------------------------------------------
// F(k) = sum_{h=1}^{q} e_q(-h lambda_{n+1}) prod_j sum_{y unit mod q} e_q(h lambda_j y^2 + k_j y).
// ---------------------------------------------------------------------------

// Unit-restricted quadratic sum over y mod q with p not dividing y.
inline std::complex<double> unit_quadratic_sum(i64 a, i64 b, i64 p, const RootTable& table) {
    const i64 c = table.modulus();
    const i64 ar = detail::mod_i64(a, c), br = detail::mod_i64(b, c);
    const i64 two_a = detail::mod_i64(2 * ar, c);
    i64 idx = 0, delta = detail::mod_i64(ar + br, c);
    double re = 0, im = 0;
    i64 residue = 0;  // y mod p
    for (i64 y = 0; y < c; ++y) {
        if (residue != 0) {
            re += table.re(idx);
            im += table.im(idx);
        }
        idx += delta;
        if (idx >= c) idx -= c;
        delta += two_a;
        if (delta >= c) delta -= c;
        if (++residue == p) residue = 0;
    }
    return {re, im};
}

inline std::complex<double> F_bruteforce(std::span<const i64> k, const DiagonalForm& form, const PrimePowerModulus& modulus,
                                         Budget budget = {}) {
    if (k.size() != form.n()) fail(errc::invalid_argument, "frequency vector length must match the form");
    form.require_units(modulus.p(), false);
    const i64 q = modulus.q64();
    budget.charge(static_cast<long double>(q) * q * static_cast<long double>(form.n()), "F_bruteforce");
    const i64 p = static_cast<i64>(modulus.p());
    const RootTable table(q);
    CompensatedComplexSum total;
    std::map<std::pair<i64, i64>, std::complex<double>> memo;
    for (i64 h = 1; h <= q; ++h) {
        std::complex<double> term = table[detail::mod_i64(-static_cast<i64>((static_cast<i128>(h) * form.inhomogeneous_term) % q), q)];
        memo.clear();
        for (std::size_t j = 0; j < form.n() && term != 0.0; ++j) {
            const i64 a = static_cast<i64>((static_cast<i128>(h) * detail::mod_i64(form.lambdas[j], q)) % q);
            const i64 b = detail::mod_i64(k[j], q);
            auto it = memo.find({a, b});
            if (it == memo.end()) it = memo.emplace(std::pair{a, b}, unit_quadratic_sum(a, b, p, table)).first;
            term *= it->second;
        }
        total.add(term);
    }
    return total.value();
}

// Closed form of F(p^r l) for unit l and 0 <= r <= m-2:
//   eps_{p^{m-r}}^n p^{n(m+r)/2} (lambda_1...lambda_n / p^{m-r}) K_n(-A, -lambda_{n+1}, p^{m-r}),
//   A = 4^{-1} sum_j lambda_j^{-1} l_j^2 (mod p^{m-r}).
// K_n is evaluated as the Kloosterman (n even) or Salie (n odd) sum at (-A, -lambda_{n+1}).
class FClosedEvaluator {
public:
    FClosedEvaluator(DiagonalForm form, PrimePowerModulus modulus) : form_(std::move(form)), modulus_(modulus) {
        form_.require_units(modulus_.p(), true);
        if (modulus_.m() < 2) fail(errc::invalid_argument, "F_closed needs m >= 2");
        i128 prod = 1;
        const u128 q = modulus_.q();
        for (i64 l : form_.lambdas) prod = static_cast<i128>(mul_mod(static_cast<u128>(prod), reduce(l, q), q));
        lambda_product_ = prod;
        for (i64 l : form_.lambdas) lambda_inverses_.push_back(inverse_mod(l, q));
    }

    const DiagonalForm& form() const { return form_; }
    const PrimePowerModulus& modulus() const { return modulus_; }

    // A modulo p^{m-r}.
    u128 dual_argument(int r, std::span<const i64> l) const {
        check(r, l);
        const u128 c = modulus_.power(modulus_.m() - r);
        u128 acc = 0;
        for (std::size_t j = 0; j < l.size(); ++j) {
            u128 lj = reduce(l[j], c);
            acc = add_mod(acc, mul_mod(lambda_inverses_[j] % c, mul_mod(lj, lj, c), c), c);
        }
        return mul_mod(inverse_mod(4, c), acc, c);
    }

    std::complex<double> value_from_dual_argument(int r, u128 A) const {
        const int s = modulus_.m() - r;
        const PrimePowerModulus mod_s = modulus_.with_exponent(s);
        const u128 c = mod_s.q();
        const std::size_t n = form_.n();
        const i128 minus_a = -static_cast<i128>(A % c);
        const i128 minus_l = -static_cast<i128>(form_.inhomogeneous_term);
        KloostermanClosedForm k = (n % 2 == 0) ? kloosterman_closed(minus_a, minus_l, mod_s) : salie_closed(minus_a, minus_l, mod_s);
        if (k.is_zero) return {0.0, 0.0};
        std::complex<double> eps_n{1.0, 0.0};
        if (epsilon_c(static_cast<i128>(c)) == EpsilonFactor::i) {
            static const std::complex<double> quarter[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
            eps_n = quarter[n % 4];
        }
        const int sign = jacobi_symbol(lambda_product_, static_cast<i128>(c));
        const long double scale = std::pow(static_cast<long double>(modulus_.p()),
                                           static_cast<long double>(n) * (modulus_.m() + r) / 2.0L);
        return eps_n * static_cast<double>(sign * scale) * k.to_complex();
    }

    std::complex<double> operator()(int r, std::span<const i64> l) const { return value_from_dual_argument(r, dual_argument(r, l)); }

private:
    void check(int r, std::span<const i64> l) const {
        if (l.size() != form_.n()) fail(errc::invalid_argument, "vector length must match the form");
        if (r < 0 || r > modulus_.m() - 2) fail(errc::invalid_argument, "F_closed needs 0 <= r <= m-2");
        for (i64 x : l)
            if (reduce(x, modulus_.p()) == 0) fail(errc::coprimality_violated, "every l_j must be coprime to p");
    }

    DiagonalForm form_;
    PrimePowerModulus modulus_;
    i128 lambda_product_ = 1;
    std::vector<u128> lambda_inverses_;
};

inline std::complex<double> F_closed(int r, std::span<const i64> l, const DiagonalForm& form, const PrimePowerModulus& modulus) {
    return FClosedEvaluator(form, modulus)(r, l);
}

}  // namespace congruence_lab
