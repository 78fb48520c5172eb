#pragma once

// Shared integer types, the error type, exact rationals and operation budgets.

#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace congruence_lab {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

enum class errc {
    invalid_argument,
    not_invertible,
    even_modulus,
    not_coprime_root,
    lift_mismatch,
    budget_exceeded,
    coprimality_violated,
    not_homogeneous,
    unsupported_case,
    truncation_insufficient,
    indefinite_form,
    hypothesis_violated,
};

inline const char* errc_name(errc code) {
    switch (code) {
        case errc::invalid_argument: return "InvalidArgument";
        case errc::not_invertible: return "NotInvertible";
        case errc::even_modulus: return "EvenModulus";
        case errc::not_coprime_root: return "NotCoprimeRoot";
        case errc::lift_mismatch: return "LiftMismatch";
        case errc::budget_exceeded: return "BudgetExceeded";
        case errc::coprimality_violated: return "CoprimalityViolated";
        case errc::not_homogeneous: return "NotHomogeneous";
        case errc::unsupported_case: return "UnsupportedCase";
        case errc::truncation_insufficient: return "TruncationInsufficient";
        case errc::indefinite_form: return "IndefiniteForm";
        case errc::hypothesis_violated: return "HypothesisViolated";
    }
    return "Unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

// Default cap on inner-loop operations for oracle paths.
inline constexpr u64 default_operation_budget = 100'000'000ULL;

struct Budget {
    u64 max_ops = default_operation_budget;

    void charge(long double ops, const char* where) const {
        if (ops > static_cast<long double>(max_ops)) {
            fail(errc::budget_exceeded, std::string(where) + " needs ~" +
                                            std::to_string(static_cast<double>(ops)) +
                                            " operations, budget is " + std::to_string(max_ops));
        }
    }
};

inline std::string to_string(i128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    u128 u = neg ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
    std::string s;
    while (u > 0) {
        s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    return neg ? "-" + s : s;
}

inline std::string to_string(u128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    return s;
}

inline u128 gcd_u(u128 a, u128 b) {
    while (b != 0) {
        u128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

inline u128 abs_u(i128 v) { return v < 0 ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v); }

inline i128 gcd_i(i128 a, i128 b) { return static_cast<i128>(gcd_u(abs_u(a), abs_u(b))); }

// Exact reduced fraction with positive denominator.
class Rational {
public:
    Rational() = default;
    Rational(i128 num, i128 den = 1) : num_(num), den_(den) {
        if (den_ == 0) fail(errc::invalid_argument, "rational with zero denominator");
        normalize();
    }

    i128 num() const { return num_; }
    i128 den() const { return den_; }
    double to_double() const { return static_cast<double>(static_cast<long double>(num_) / static_cast<long double>(den_)); }
    std::string str() const { return den_ == 1 ? to_string(num_) : to_string(num_) + "/" + to_string(den_); }

    friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        i128 g = gcd_i(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    i128 num_ = 0;
    i128 den_ = 1;
};

}  // namespace congruence_lab
