#pragma once

#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"

namespace congruence_lab {

// lambda_1 x_1^2 + ... + lambda_n x_n^2 - lambda_{n+1}.
struct DiagonalForm {
    std::vector<i64> lambdas;
    i64 inhomogeneous_term = 0;

    DiagonalForm() = default;
    DiagonalForm(std::vector<i64> coefficients, i64 constant) : lambdas(std::move(coefficients)), inhomogeneous_term(constant) {
        if (lambdas.empty()) fail(errc::invalid_argument, "a diagonal form needs at least one variable");
    }

    std::size_t n() const { return lambdas.size(); }
    bool homogeneous() const { return inhomogeneous_term == 0; }

    i128 evaluate(std::span<const i64> x) const {
        i128 total = -static_cast<i128>(inhomogeneous_term);
        for (std::size_t i = 0; i < lambdas.size(); ++i)
            total += static_cast<i128>(lambdas[i]) * x[i] * x[i];
        return total;
    }

    // Throws CoprimalityViolated unless every lambda_j (and optionally lambda_{n+1}) is a unit mod p.
    void require_units(u64 p, bool include_constant) const {
        for (i64 l : lambdas)
            if (l % static_cast<i64>(p) == 0)
                fail(errc::coprimality_violated, "coefficient " + std::to_string(l) + " is divisible by p=" + std::to_string(p));
        if (include_constant && inhomogeneous_term % static_cast<i64>(p) == 0)
            fail(errc::coprimality_violated, "constant term " + std::to_string(inhomogeneous_term) +
                                                 " is divisible by p=" + std::to_string(p));
    }

    std::string str() const {
        std::ostringstream os;
        os << "(";
        for (std::size_t i = 0; i < lambdas.size(); ++i) os << (i ? "," : "") << lambdas[i];
        os << ";" << inhomogeneous_term << ")";
        return os.str();
    }
};

}  // namespace congruence_lab
