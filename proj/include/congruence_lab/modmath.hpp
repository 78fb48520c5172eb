#pragma once

// Exact modular arithmetic: powers, inverses, Jacobi symbols, square roots modulo
// odd primes and their Hensel lifts to prime powers, and the additive character.
// All residue logic is integer-only; doubles appear only in additive_character.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"

namespace congruence_lab {

// ---------------------------------------------------------------------------
// Primitive helpers on unsigned 128-bit values.
// ---------------------------------------------------------------------------

inline u128 mul_mod(u128 a, u128 b, u128 m) {
    a %= m;
    b %= m;
    if ((a >> 64) == 0 && (b >> 64) == 0) return (a * b) % m;
    // Double-and-add keeps every intermediate below 2m.
    u128 result = 0;
    while (b > 0) {
        if (b & 1) {
            result = (result >= m - a) ? result - (m - a) : result + a;
        }
        a = (a >= m - a) ? a - (m - a) : a + a;
        b >>= 1;
    }
    return result;
}

inline u128 add_mod(u128 a, u128 b, u128 m) { return (a >= m - b) ? a - (m - b) : a + b; }

inline u128 reduce(i128 a, u128 m) {
    if (a >= 0) return static_cast<u128>(a) % m;
    u128 r = abs_u(a) % m;
    return r == 0 ? 0 : m - r;
}

inline u128 pow_mod(u128 base, u128 exp, u128 m) {
    if (m == 1) return 0;
    u128 result = 1;
    base %= m;
    while (exp > 0) {
        if (exp & 1) result = mul_mod(result, base, m);
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    return result;
}

// p-adic valuation of a nonzero integer; returns `cap` for zero.
inline int valuation(i128 a, u64 p, int cap) {
    if (a == 0) return cap;
    u128 u = abs_u(a);
    int v = 0;
    while (u % p == 0 && v < cap) {
        u /= p;
        ++v;
    }
    return v;
}

inline bool is_prime(u64 n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (u64 d = 3; d * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Domain types.
// ---------------------------------------------------------------------------

// q = p^m with p an odd prime below 2^20 and q below 2^127.
class PrimePowerModulus {
public:
    static constexpr u64 max_prime = (u64{1} << 20);

    PrimePowerModulus(u64 p, int m) : p_(p), m_(m) {
        if (p < 3 || p >= max_prime || !is_prime(p))
            fail(errc::invalid_argument, "p must be an odd prime below 2^20, got " + std::to_string(p));
        if (m < 1 || m > 60) fail(errc::invalid_argument, "exponent m must lie in [1, 60]");
        u128 q = 1;
        const u128 limit = u128{1} << 126;
        for (int i = 0; i < m; ++i) {
            if (q > limit / p) fail(errc::invalid_argument, "p^m does not fit a 128-bit integer");
            q *= p;
        }
        q_ = q;
    }

    u64 p() const { return p_; }
    int m() const { return m_; }
    u128 q() const { return q_; }

    // Narrowing accessor for code paths that index arrays by residue.
    i64 q64() const {
        if (q_ >= (u128{1} << 62)) fail(errc::invalid_argument, "modulus too large for this operation");
        return static_cast<i64>(q_);
    }

    // p^k for 0 <= k <= m.
    u128 power(int k) const {
        if (k < 0 || k > m_) fail(errc::invalid_argument, "power exponent out of range");
        u128 r = 1;
        for (int i = 0; i < k; ++i) r *= p_;
        return r;
    }

    PrimePowerModulus with_exponent(int m) const { return PrimePowerModulus(p_, m); }

    friend bool operator==(const PrimePowerModulus& a, const PrimePowerModulus& b) {
        return a.p_ == b.p_ && a.m_ == b.m_;
    }

private:
    u64 p_;
    int m_;
    u128 q_;
};

struct Residue {
    u128 value = 0;
    u128 modulus = 1;

    static Residue make(i128 v, u128 modulus) {
        if (modulus == 0) fail(errc::invalid_argument, "residue modulus must be positive");
        return Residue{reduce(v, modulus), modulus};
    }

    friend bool operator==(const Residue& a, const Residue& b) {
        return a.value == b.value && a.modulus == b.modulus;
    }
};

// One arithmetic progression offset + step*Z, reduced modulo the set's modulus.
struct Progression {
    u128 offset = 0;
    u128 step = 1;
};

// Solution set of u^2 = r (mod modulus) as disjoint progressions.
struct RootClassSet {
    std::vector<Progression> progressions;
    u128 modulus = 1;

    bool empty() const { return progressions.empty(); }

    // Number of residues modulo `modulus`.
    u128 size() const {
        u128 total = 0;
        for (const auto& pr : progressions) total += modulus / pr.step;
        return total;
    }

    bool contains(i128 u) const {
        u128 r = reduce(u, modulus);
        for (const auto& pr : progressions)
            if (r % pr.step == pr.offset) return true;
        return false;
    }

    // All residues in [0, modulus); intended for small sets.
    std::vector<u128> residues() const {
        std::vector<u128> out;
        for (const auto& pr : progressions)
            for (u128 x = pr.offset; x < modulus; x += pr.step) out.push_back(x);
        return out;
    }

    // Calls fn(x) for every integer x in [lo, hi] whose residue lies in the set.
    template <class Fn>
    void for_each_in_range(i64 lo, i64 hi, Fn&& fn) const {
        if (lo > hi) return;
        for (const auto& pr : progressions) {
            const i128 step = static_cast<i128>(pr.step);
            const i128 off = static_cast<i128>(pr.offset);
            // first x >= lo with x = off (mod step)
            i128 shift = static_cast<i128>(reduce(static_cast<i128>(lo) - off, pr.step));
            i128 x = lo + (shift == 0 ? 0 : step - shift);
            for (; x <= hi; x += step) fn(static_cast<i64>(x));
        }
    }
};

// ---------------------------------------------------------------------------
// Operations.
// ---------------------------------------------------------------------------

inline Residue mod_pow(const Residue& base, u128 exp) {
    return Residue{pow_mod(base.value, exp, base.modulus), base.modulus};
}

// Extended Euclid on signed 128-bit values; returns x with a*x = g (mod m).
inline Residue mod_inverse(const Residue& a) {
    i128 old_r = static_cast<i128>(a.value), r = static_cast<i128>(a.modulus);
    i128 old_s = 1, s = 0;
    while (r != 0) {
        i128 q = old_r / r;
        i128 t = old_r - q * r;
        old_r = r;
        r = t;
        t = old_s - q * s;
        old_s = s;
        s = t;
    }
    if (old_r != 1 && a.modulus != 1)
        fail(errc::not_invertible, to_string(a.value) + " has no inverse modulo " + to_string(a.modulus));
    return Residue::make(old_s, a.modulus);
}

inline u128 inverse_mod(i128 a, u128 m) { return mod_inverse(Residue::make(a, m)).value; }

inline int jacobi_symbol(i128 a, i128 c) {
    if (c <= 0 || c % 2 == 0) fail(errc::even_modulus, "Jacobi symbol needs an odd positive modulus");
    u128 n = static_cast<u128>(c);
    u128 x = reduce(a, n);
    int result = 1;
    while (x != 0) {
        while ((x & 1) == 0) {
            x >>= 1;
            u128 r = n & 7;
            if (r == 3 || r == 5) result = -result;
        }
        std::swap(x, n);
        if ((x & 3) == 3 && (n & 3) == 3) result = -result;
        x %= n;
    }
    return n == 1 ? result : 0;
}

enum class EpsilonFactor { one, i };

inline EpsilonFactor epsilon_c(i128 c) {
    if (c <= 0 || c % 2 == 0) fail(errc::even_modulus, "epsilon_c needs an odd positive modulus");
    return (c % 4 == 1) ? EpsilonFactor::one : EpsilonFactor::i;
}

inline std::complex<double> to_complex(EpsilonFactor e) {
    return e == EpsilonFactor::one ? std::complex<double>(1.0, 0.0) : std::complex<double>(0.0, 1.0);
}

// e_q(a) = exp(2 pi i a / q), with a reduced exactly to (-q/2, q/2] first.
inline std::complex<double> additive_character(i128 a, u128 q) {
    if (q == 0) fail(errc::invalid_argument, "additive character needs q >= 1");
    u128 r = reduce(a, q);
    long double num = (r > q / 2) ? -static_cast<long double>(q - r) : static_cast<long double>(r);
    long double angle = 2.0L * std::numbers::pi_v<long double> * (num / static_cast<long double>(q));
    return {static_cast<double>(std::cos(angle)), static_cast<double>(std::sin(angle))};
}

// Precomputed e_q(j) for 0 <= j < q, used by the brute-force kernels.
class RootTable {
public:
    explicit RootTable(i64 q) : q_(q), re_(static_cast<std::size_t>(q)), im_(static_cast<std::size_t>(q)) {
        if (q < 1) fail(errc::invalid_argument, "root table needs q >= 1");
        for (i64 j = 0; j < q; ++j) {
            auto z = additive_character(j, static_cast<u128>(q));
            re_[static_cast<std::size_t>(j)] = z.real();
            im_[static_cast<std::size_t>(j)] = z.imag();
        }
    }

    i64 modulus() const { return q_; }
    double re(i64 j) const { return re_[static_cast<std::size_t>(j)]; }
    double im(i64 j) const { return im_[static_cast<std::size_t>(j)]; }
    std::complex<double> operator[](i64 j) const { return {re(j), im(j)}; }
    const double* re_data() const { return re_.data(); }
    const double* im_data() const { return im_.data(); }

private:
    i64 q_;
    std::vector<double> re_;
    std::vector<double> im_;
};

// Tonelli-Shanks; returns the root in [0, p/2].
inline std::optional<Residue> sqrt_mod_prime(const Residue& a) {
    const u128 p = a.modulus;
    if (p < 3 || p % 2 == 0) fail(errc::invalid_argument, "sqrt_mod_prime needs an odd prime modulus");
    const u128 x = a.value % p;
    if (x == 0) return Residue{0, p};
    if (pow_mod(x, (p - 1) / 2, p) != 1) return std::nullopt;

    u128 q = p - 1;
    int s = 0;
    while ((q & 1) == 0) {
        q >>= 1;
        ++s;
    }
    u128 z = 2;
    while (pow_mod(z, (p - 1) / 2, p) != p - 1) ++z;

    u128 m = static_cast<u128>(s);
    u128 c = pow_mod(z, q, p);
    u128 t = pow_mod(x, q, p);
    u128 r = pow_mod(x, (q + 1) / 2, p);
    while (t != 1) {
        u128 i = 0;
        u128 tt = t;
        while (tt != 1) {
            tt = mul_mod(tt, tt, p);
            ++i;
        }
        u128 b = c;
        for (u128 j = 0; j + 1 < m - i; ++j) b = mul_mod(b, b, p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    if (r > p / 2) r = p - r;
    return Residue{r, p};
}

// Lifts a unit root w of u^2 = r (mod p^t) to the unique root modulo p^s that
// agrees with w modulo p. Each step doubles the exponent:
//   u <- u + p^t * (2u)^{-1} * (r - u^2) / p^t   (mod p^{min(2t, s)}).
inline Residue hensel_lift_sqrt(const Residue& w, i128 r, const PrimePowerModulus& target) {
    const u64 p = target.p();
    int t = 0;
    u128 mod_t = 1;
    while (mod_t < w.modulus) {
        mod_t *= p;
        ++t;
    }
    if (mod_t != w.modulus || t < 1)
        fail(errc::invalid_argument, "root modulus must be a positive power of p");
    if (t > target.m()) fail(errc::invalid_argument, "target exponent below the root's exponent");
    if (w.value % p == 0) fail(errc::not_coprime_root, "root must be coprime to p");
    if (mul_mod(w.value, w.value, mod_t) != reduce(r, mod_t))
        fail(errc::lift_mismatch, "w^2 is not congruent to r modulo p^t");

    u128 u = w.value;
    while (t < target.m()) {
        int t2 = std::min(2 * t, target.m());
        u128 mod_t2 = target.power(t2);
        u128 gap_mod = target.power(t2 - t);
        u128 diff = (reduce(r, mod_t2) + mod_t2 - mul_mod(u, u, mod_t2)) % mod_t2;  // divisible by p^t
        u128 quotient = (diff / mod_t) % gap_mod;
        u128 two_u = add_mod(u % gap_mod, u % gap_mod, gap_mod);
        u128 h = mul_mod(inverse_mod(static_cast<i128>(two_u), gap_mod), quotient, gap_mod);
        u = (u + h * mod_t) % mod_t2;
        t = t2;
        mod_t = mod_t2;
    }
    return Residue{u, mod_t};
}

// Complete solution set of u^2 = r (mod p^m).
//   r = 0 (mod p^m):            p^{ceil(m/2)} Z
//   r = p^e r', e odd, e < m:   empty
//   r = p^{2t} r', 2t < m:      p^t (±v + p^{m-2t} Z), v^2 = r' (mod p^{m-2t})
inline RootClassSet sqrt_classes_mod_prime_power(i128 r, const PrimePowerModulus& modulus) {
    const u64 p = modulus.p();
    const int m = modulus.m();
    const u128 q = modulus.q();
    RootClassSet out;
    out.modulus = q;
    u128 rr = reduce(r, q);
    if (rr == 0) {
        out.progressions.push_back({0, modulus.power((m + 1) / 2)});
        return out;
    }
    int e = valuation(static_cast<i128>(rr), p, m);
    if (e % 2 == 1) return out;
    int t = e / 2;
    u128 unit = rr / modulus.power(e);
    auto base = sqrt_mod_prime(Residue{unit % p, p});
    if (!base) return out;
    const int reduced_exp = m - 2 * t;
    const u128 reduced_mod = modulus.power(reduced_exp);
    u128 v = reduced_exp == 1 ? base->value
                              : hensel_lift_sqrt(*base, static_cast<i128>(unit), modulus.with_exponent(reduced_exp)).value;
    const u128 scale = modulus.power(t);
    const u128 step = modulus.power(m - t);
    u128 a = (scale * v) % step;
    u128 b = (scale * (reduced_mod - v)) % step;
    if (a > b) std::swap(a, b);
    out.progressions.push_back({a, step});
    out.progressions.push_back({b, step});
    return out;
}

}  // namespace congruence_lab
