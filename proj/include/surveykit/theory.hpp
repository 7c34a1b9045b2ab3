#pragma once

#include "surveykit/estimators.hpp"
#include "surveykit/population.hpp"

namespace surveykit {

/// Everything the first-order formulas need. Build it with make_theory_input
/// so that the shape factors agree with the config and Xbar.
struct TheoryInput {
    PopulationMoments moments;
    FiniteFactors factors;
    FamilyConfig cfg;
    ShapeFactors shape;
};

[[nodiscard]] TheoryInput make_theory_input(const PopulationMoments& moments, const FiniteFactors& factors,
                                            const FamilyConfig& cfg);

/// First-order bias and MSE.
struct BiasMse {
    double bias = 0.0;
    double mse = 0.0;
};

// Single phase. All expressions carry the Ybar (bias) and Ybar^2 (mse) factors.

/// Sample mean: unbiased, MSE = Ybar^2 f1 Cy^2 = f1 Sy^2.
[[nodiscard]] BiasMse theory_mean(const PopulationMoments& m, const FiniteFactors& f);
/// Classical exponential ratio estimator ybar exp[(Xbar - xbar)/(Xbar + xbar)].
[[nodiscard]] BiasMse theory_exp_ratio(const PopulationMoments& m, const FiniteFactors& f);
[[nodiscard]] BiasMse theory_t1(const TheoryInput& in);
[[nodiscard]] BiasMse theory_t2(const TheoryInput& in);

/// Effective first-order slope of the combined estimator,
/// Q = w1 alpha V1 + w2 (beta - lambda V2 / 2).
[[nodiscard]] double combined_slope(const TheoryInput& in, const WeightSolution& w);
[[nodiscard]] BiasMse theory_tp(const TheoryInput& in, const WeightSolution& w);
/// Ybar^2 f1 Cy^2 (1 - rho^2), the regression-estimator bound.
[[nodiscard]] double min_mse_tp(const PopulationMoments& m, const FiniteFactors& f);

// Two phase (factors must carry f2, f3).

[[nodiscard]] BiasMse theory_t1d(const TheoryInput& in);
[[nodiscard]] BiasMse theory_t2d(const TheoryInput& in);
/// L2 = h1 m R1 + h2 (q - gamma R2).
[[nodiscard]] double combined_slope_two_phase(const TheoryInput& in, const WeightSolution& h);
[[nodiscard]] BiasMse theory_tpd(const TheoryInput& in, const WeightSolution& h);
/// Ybar^2 Cy^2 (f1 - f3 rho^2).
[[nodiscard]] double min_mse_tpd(const PopulationMoments& m, const FiniteFactors& f);

/// Percentage relative efficiency 100 * mse_base / mse_est. Throws ZeroMse
/// unless mse_est > 0.
[[nodiscard]] double pre_percent(double mse_base, double mse_est);

}  // namespace surveykit
