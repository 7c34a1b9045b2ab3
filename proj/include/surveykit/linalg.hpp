#pragma once

#include <array>

namespace surveykit {

using Matrix3 = std::array<std::array<double, 3>, 3>;
using Vector3 = std::array<double, 3>;

struct LinearSolve3 {
    Vector3 x{};
    /// Largest over smallest pivot magnitude of the equilibrated system.
    double condition_estimate = 1.0;
    bool singular = false;
};

/// Gaussian elimination with partial pivoting on a row-equilibrated copy of
/// the system (each row divided by its largest |entry|). Reports `singular`
/// when a pivot falls below `tol` (the equilibrated rows have unit max-norm)
/// or a row is identically zero; `x` is meaningless in that case.
[[nodiscard]] LinearSolve3 solve3(const Matrix3& a, const Vector3& b, double tol = 1e-12);

}  // namespace surveykit
