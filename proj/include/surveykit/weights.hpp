#pragma once

#include "surveykit/estimators.hpp"
#include "surveykit/theory.hpp"

namespace surveykit {

/// Weights (w0, w1, w2) of ybar, t1, t2 satisfying
///   w0 + w1 + w2 = 1,
///   w1 alpha V1 + w2 (beta - lambda V2 / 2) = Kx,
///   w1 B(t1) + w2 B(t2) = 0,
/// i.e. minimum first-order MSE with the first-order bias cancelled.
/// Throws SingularSystem (message lists the slope and bias rows) when the
/// last two equations are dependent.
[[nodiscard]] WeightSolution solve_weights(const TheoryInput& in);

/// Two-phase analog for (h0, h1, h2) of ybar, t1d, t2d:
///   slope row (0, m R1, q - gamma R2), bias row (0, B(t1d), B(t2d)).
[[nodiscard]] WeightSolution solve_weights_two_phase(const TheoryInput& in);

}  // namespace surveykit
