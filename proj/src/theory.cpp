#include "surveykit/theory.hpp"

#include <cmath>

#include "surveykit/error.hpp"

namespace surveykit {

namespace {

double sq(double v) { return v * v; }

// Generic first-order MSE of ybar (1 - Q (e1 - e1')) style estimators: the
// deviation is Ybar [e0 - Q e], E(e^2) = fq Cx^2, E(e0 e) = fq Kx Cx^2.
double linear_mse(const PopulationMoments& m, double f1, double fq, double Q) {
    const double cx2 = sq(m.Cx);
    return sq(m.Ybar) * (f1 * sq(m.Cy) + fq * cx2 * (sq(Q) - 2.0 * Q * m.Kx));
}

}  // namespace

TheoryInput make_theory_input(const PopulationMoments& moments, const FiniteFactors& factors,
                              const FamilyConfig& cfg) {
    return TheoryInput{moments, factors, cfg, shape_factors(cfg, moments.Xbar)};
}

BiasMse theory_mean(const PopulationMoments& m, const FiniteFactors& f) {
    return {0.0, sq(m.Ybar) * f.f1() * sq(m.Cy)};
}

BiasMse theory_exp_ratio(const PopulationMoments& m, const FiniteFactors& f) {
    const double cx2 = sq(m.Cx);
    return {m.Ybar * f.f1() * cx2 * (3.0 / 8.0 - m.Kx / 2.0), linear_mse(m, f.f1(), f.f1(), 0.5)};
}

BiasMse theory_t1(const TheoryInput& in) {
    const auto& m = in.moments;
    const double a = in.cfg.alpha;
    const double V1 = in.shape.V1;
    const double f1 = in.factors.f1();
    const double cx2 = sq(m.Cx);
    const double bias = m.Ybar * f1 * cx2 * (a * (a + 1.0) * sq(V1) / 2.0 - a * V1 * m.Kx);
    const double mse = sq(m.Ybar) * f1 * (sq(m.Cy) + cx2 * (sq(a) * sq(V1) - 2.0 * V1 * a * m.Kx));
    return {bias, mse};
}

BiasMse theory_t2(const TheoryInput& in) {
    const auto& m = in.moments;
    const double b = in.cfg.beta;
    const double l = in.cfg.lambda;
    const double V2 = in.shape.V2;
    const double f1 = in.factors.f1();
    const double cx2 = sq(m.Cx);
    const double coef = l * V2 * b / 2.0 - b * (b - 1.0) / 2.0 - l * (l + 2.0) * sq(V2) / 8.0 - b * m.Kx +
                        l * V2 * m.Kx / 2.0;
    const double mse = sq(m.Ybar) * f1 *
                       (sq(m.Cy) + cx2 * (sq(b) + sq(l) * sq(V2) / 4.0 - b * l * V2) -
                        2.0 * m.Kx * cx2 * (b - l * V2 / 2.0));
    return {m.Ybar * f1 * cx2 * coef, mse};
}

double combined_slope(const TheoryInput& in, const WeightSolution& w) {
    return w.w[1] * in.cfg.alpha * in.shape.V1 + w.w[2] * (in.cfg.beta - in.cfg.lambda * in.shape.V2 / 2.0);
}

BiasMse theory_tp(const TheoryInput& in, const WeightSolution& w) {
    const double bias = w.w[1] * theory_t1(in).bias + w.w[2] * theory_t2(in).bias;
    const double Q = combined_slope(in, w);
    return {bias, linear_mse(in.moments, in.factors.f1(), in.factors.f1(), Q)};
}

double min_mse_tp(const PopulationMoments& m, const FiniteFactors& f) {
    return sq(m.Ybar) * f.f1() * sq(m.Cy) * (1.0 - sq(m.rho));
}

BiasMse theory_t1d(const TheoryInput& in) {
    const auto& m = in.moments;
    const double mm = in.cfg.m;
    const double R1 = in.shape.R1;
    const double f1 = in.factors.f1();
    const double f2 = in.factors.f2();
    const double f3 = in.factors.f3();
    const double cx2 = sq(m.Cx);
    // The Kx cross term enters with a minus sign: E(e0 e1') - E(e0 e1) = -f3 Kx Cx^2.
    const double bias = m.Ybar * cx2 *
                        (mm * (mm - 1.0) * sq(R1) * f2 / 2.0 + mm * (mm + 1.0) * sq(R1) * f1 / 2.0 -
                         sq(mm) * sq(R1) * f2 - mm * R1 * f3 * m.Kx);
    return {bias, linear_mse(m, f1, f3, mm * R1)};
}

BiasMse theory_t2d(const TheoryInput& in) {
    const auto& m = in.moments;
    const double q = in.cfg.q;
    const double g = in.cfg.gamma;
    const double R2 = in.shape.R2;
    const double f1 = in.factors.f1();
    const double f2 = in.factors.f2();
    const double f3 = in.factors.f3();
    const double cx2 = sq(m.Cx);
    // Second-order expansion in e1 (second phase) and e1' (first phase);
    // with f2 = 0, f3 = f1 and R2 = V2/2 this is the single-phase t2 bias.
    const double coef = -q * (q - 1.0) * f1 / 2.0 - q * (q + 1.0) * f2 / 2.0 + sq(q) * f2 -
                        g * sq(R2) * f3 - sq(g) * sq(R2) * f3 / 2.0 + q * g * R2 * f3 - q * f3 * m.Kx +
                        g * R2 * f3 * m.Kx;
    const double L1 = q - g * R2;
    return {m.Ybar * cx2 * coef, linear_mse(m, f1, f3, L1)};
}

double combined_slope_two_phase(const TheoryInput& in, const WeightSolution& h) {
    return h.w[1] * in.cfg.m * in.shape.R1 + h.w[2] * (in.cfg.q - in.cfg.gamma * in.shape.R2);
}

BiasMse theory_tpd(const TheoryInput& in, const WeightSolution& h) {
    const double bias = h.w[1] * theory_t1d(in).bias + h.w[2] * theory_t2d(in).bias;
    const double L2 = combined_slope_two_phase(in, h);
    return {bias, linear_mse(in.moments, in.factors.f1(), in.factors.f3(), L2)};
}

double min_mse_tpd(const PopulationMoments& m, const FiniteFactors& f) {
    return sq(m.Ybar) * sq(m.Cy) * (f.f1() - f.f3() * sq(m.rho));
}

double pre_percent(double mse_base, double mse_est) {
    if (!(mse_est > 0.0)) throw Error(ErrorCode::ZeroMse, "estimator MSE must be positive to form a PRE");
    return 100.0 * mse_base / mse_est;
}

}  // namespace surveykit
