#pragma once

#include <string>

#include "lueq/errors.hpp"

namespace lueq {

/// Numerical thresholds realizing the exact algebraic conditions
/// (det != 0, commutators vanishing, eigenvalue coincidence).
///
/// eps_zero  - absolute threshold for "numerically zero"
/// eps_eig   - eigenvalue gap below which two eigenvalues count as degenerate
/// eps_match - tolerance for comparing invariant values between two states
struct Tolerance {
    double eps_zero = 1e-9;
    double eps_eig = 1e-7;
    double eps_match = 1e-8;

    Tolerance() = default;

    Tolerance(double eps_zero, double eps_eig, double eps_match)
        : eps_zero(eps_zero), eps_eig(eps_eig), eps_match(eps_match) {
        check();
    }

    void check() const {
        if (!(eps_zero > 0.0) || !(eps_eig > 0.0) || !(eps_match > 0.0)) {
            throw Error("tolerances must be strictly positive");
        }
        if (eps_zero > eps_match) {
            throw Error("eps_zero must not exceed eps_match (eps_zero=" + std::to_string(eps_zero) +
                        ", eps_match=" + std::to_string(eps_match) + ")");
        }
    }
};

}  // namespace lueq
