#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "surveykit/population.hpp"

namespace surveykit {

/// An SRSWOR sample of size n >= 2. Sample means are computed once, with the
/// same compensated summation as the population means, so a census sample
/// reproduces Ybar and Xbar bit for bit.
class Sample {
public:
    explicit Sample(std::vector<Unit> units);

    [[nodiscard]] std::span<const Unit> units() const noexcept { return units_; }
    [[nodiscard]] std::size_t size() const noexcept { return units_.size(); }
    [[nodiscard]] double ybar() const noexcept { return ybar_; }
    [[nodiscard]] double xbar() const noexcept { return xbar_; }

private:
    std::vector<Unit> units_;
    double ybar_;
    double xbar_;
};

/// Nested two-phase sample: x only on the first phase (size n'), (y, x) on a
/// second-phase subsample of size n <= n' drawn from it.
class TwoPhaseSample {
public:
    TwoPhaseSample(std::vector<double> first_phase_x, Sample second_phase);

    [[nodiscard]] std::span<const double> first_phase_x() const noexcept { return first_x_; }
    [[nodiscard]] const Sample& second_phase() const noexcept { return second_; }
    [[nodiscard]] double xbar_first() const noexcept { return xbar_first_; }
    [[nodiscard]] double ybar() const noexcept { return second_.ybar(); }
    [[nodiscard]] double xbar() const noexcept { return second_.xbar(); }

private:
    std::vector<double> first_x_;
    Sample second_;
    double xbar_first_;
};

/// Tuning constants of the t1/t2 families and their two-phase analogs.
/// K1, K3, K4, K5 are already-resolved numbers (parameter atoms are evaluated
/// before they land here). K2 must be +1 or -1.
struct FamilyConfig {
    double K1 = 1.0;
    int K2 = 1;
    double K3 = 0.0;
    double K4 = 1.0;
    double K5 = 0.0;
    double alpha = 1.0;
    double beta = 1.0;
    double lambda = 0.0;
    double m = 1.0;
    double q = 1.0;
    double gamma = 0.0;

    /// Throws InvalidConfig for K2 outside {+1, -1} and DegenerateDenominator
    /// when K1*Xbar + K2*K3 or K4*Xbar + K5 vanishes.
    void validate(double Xbar) const;
};

struct ShapeFactors {
    double V1 = 0.0;
    double V2 = 0.0;
    double R1 = 0.0;
    double R2 = 0.0;
};

[[nodiscard]] ShapeFactors shape_factors(const FamilyConfig& cfg, double Xbar);

/// Weights of the three member estimators (mean, t1, t2) in a combined
/// estimator, with diagnostics filled in by the solver.
struct WeightSolution {
    std::array<double, 3> w{1.0, 0.0, 0.0};
    double residual_sum = 0.0;
    double residual_opt = 0.0;
    double residual_bias = 0.0;
    double condition_estimate = 1.0;
};

[[nodiscard]] double est_mean(const Sample& s);
[[nodiscard]] double est_ratio(const Sample& s, double Xbar);
[[nodiscard]] double est_product(const Sample& s, double Xbar);
[[nodiscard]] double est_exp_ratio(const Sample& s, double Xbar);
[[nodiscard]] double est_regression(const Sample& s, double Xbar, double beta_coef);

/// ybar * ((K1 Xbar + K2 K3) / (K1 xbar + K2 K3))^alpha
[[nodiscard]] double est_t1(const Sample& s, double Xbar, const FamilyConfig& cfg);
/// ybar * {2 - (xbar/Xbar)^beta exp[lambda (A - a) / (A + a)]}, A = K4 Xbar + K5, a = K4 xbar + K5
[[nodiscard]] double est_t2(const Sample& s, double Xbar, const FamilyConfig& cfg);
[[nodiscard]] double est_tp(const Sample& s, double Xbar, const FamilyConfig& cfg, const WeightSolution& w);

[[nodiscard]] double est_mean(const TwoPhaseSample& s);
[[nodiscard]] double est_t1d(const TwoPhaseSample& s, const FamilyConfig& cfg);
[[nodiscard]] double est_t2d(const TwoPhaseSample& s, const FamilyConfig& cfg);
[[nodiscard]] double est_tpd(const TwoPhaseSample& s, const FamilyConfig& cfg, const WeightSolution& h);

}  // namespace surveykit
