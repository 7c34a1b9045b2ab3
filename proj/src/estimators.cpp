#include "surveykit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "surveykit/error.hpp"
#include "surveykit/numeric.hpp"

namespace surveykit {

namespace {

double mean_of(std::span<const Unit> units, double Unit::*field) {
    CompensatedSum acc;
    for (const auto& u : units) acc.add(u.*field);
    return acc.value() / static_cast<double>(units.size());
}

bool is_integer(double v) { return std::isfinite(v) && v == std::nearbyint(v); }

// (num/den)^p. Real powers need a positive base; integer powers only a
// nonzero one. Negative exponents invert the ratio instead of the power so
// that p = -1 gives den/num with a single rounding.
double ratio_power(double num, double den, double p, const char* what) {
    if (p == 0.0) return 1.0;
    if (den == 0.0 || num == 0.0) {
        throw Error(ErrorCode::NonPositiveBase, std::string(what) + ": zero in power base");
    }
    if (!is_integer(p) && (num / den) <= 0.0) {
        throw Error(ErrorCode::NonPositiveBase,
                    std::string(what) + ": non-integer exponent needs a positive base");
    }
    if (p < 0.0) return std::pow(den / num, -p);
    return std::pow(num / den, p);
}

// {2 - (xs/xref)^power * exp[coef (A - a)/(A + a)]} with A, a the K4/K5 brackets.
double dual_factor(double xs, double xref, double power, double coef, double K4, double K5,
                   const char* what) {
    if (xref == 0.0) throw Error(ErrorCode::DegenerateDenominator, std::string(what) + ": reference mean is zero");
    const double A = K4 * xref + K5;
    const double a = K4 * xs + K5;
    if (A <= 0.0 || a <= 0.0) {
        throw Error(ErrorCode::NonPositiveBase, std::string(what) + ": K4*mean + K5 must be positive");
    }
    const double shrink = ratio_power(xs, xref, power, what);
    const double arg = coef == 0.0 ? 0.0 : coef * (A - a) / (A + a);
    return 2.0 - shrink * std::exp(arg);
}

void require_normalized(const WeightSolution& w) {
    const double total = w.w[0] + w.w[1] + w.w[2];
    if (std::abs(total - 1.0) > 1e-9) {
        throw Error(ErrorCode::WeightsNotNormalized, "weights sum to " + std::to_string(total) + ", not 1");
    }
}

}  // namespace

Sample::Sample(std::vector<Unit> units) : units_(std::move(units)) {
    if (units_.size() < 2) throw Error(ErrorCode::InvalidSizes, "a sample needs at least 2 units");
    for (const auto& u : units_) {
        if (!std::isfinite(u.y) || !std::isfinite(u.x)) {
            throw Error(ErrorCode::NonNumericCell, "sample contains a non-finite value");
        }
    }
    ybar_ = mean_of(units_, &Unit::y);
    xbar_ = mean_of(units_, &Unit::x);
}

TwoPhaseSample::TwoPhaseSample(std::vector<double> first_phase_x, Sample second_phase)
    : first_x_(std::move(first_phase_x)), second_(std::move(second_phase)) {
    if (second_.size() > first_x_.size()) {
        throw Error(ErrorCode::InvalidSizes, "second phase is larger than the first phase");
    }
    std::vector<double> first_sorted = first_x_;
    std::vector<double> second_sorted;
    second_sorted.reserve(second_.size());
    for (const auto& u : second_.units()) second_sorted.push_back(u.x);
    std::sort(first_sorted.begin(), first_sorted.end());
    std::sort(second_sorted.begin(), second_sorted.end());
    if (!std::includes(first_sorted.begin(), first_sorted.end(), second_sorted.begin(), second_sorted.end())) {
        throw Error(ErrorCode::InvalidSizes, "second-phase x values are not contained in the first phase");
    }
    xbar_first_ = compensated_mean(first_x_);
}

void FamilyConfig::validate(double Xbar) const {
    if (K2 != 1 && K2 != -1) throw Error(ErrorCode::InvalidConfig, "K2 must be +1 or -1");
    if (K1 * Xbar + K2 * K3 == 0.0) {
        throw Error(ErrorCode::DegenerateDenominator, "K1*Xbar + K2*K3 is zero");
    }
    if (K4 * Xbar + K5 == 0.0) throw Error(ErrorCode::DegenerateDenominator, "K4*Xbar + K5 is zero");
}

ShapeFactors shape_factors(const FamilyConfig& cfg, double Xbar) {
    cfg.validate(Xbar);
    ShapeFactors s;
    s.V1 = cfg.K1 * Xbar / (cfg.K1 * Xbar + cfg.K2 * cfg.K3);
    s.V2 = cfg.K4 * Xbar / (cfg.K4 * Xbar + cfg.K5);
    s.R1 = s.V1;
    s.R2 = s.V2 / 2.0;
    return s;
}

double est_mean(const Sample& s) { return s.ybar(); }

double est_ratio(const Sample& s, double Xbar) {
    if (s.xbar() == 0.0) throw Error(ErrorCode::ZeroSampleMeanX, "sample mean of x is zero");
    return s.ybar() * (Xbar / s.xbar());
}

double est_product(const Sample& s, double Xbar) {
    if (Xbar == 0.0) throw Error(ErrorCode::DegenerateDenominator, "population mean of x is zero");
    return s.ybar() * (s.xbar() / Xbar);
}

double est_exp_ratio(const Sample& s, double Xbar) {
    const double den = Xbar + s.xbar();
    if (den == 0.0) throw Error(ErrorCode::DegenerateDenominator, "Xbar + xbar is zero");
    return s.ybar() * std::exp((Xbar - s.xbar()) / den);
}

double est_regression(const Sample& s, double Xbar, double beta_coef) {
    return s.ybar() + beta_coef * (Xbar - s.xbar());
}

double est_t1(const Sample& s, double Xbar, const FamilyConfig& cfg) {
    const double k23 = cfg.K2 * cfg.K3;
    return s.ybar() * ratio_power(cfg.K1 * Xbar + k23, cfg.K1 * s.xbar() + k23, cfg.alpha, "t1");
}

double est_t2(const Sample& s, double Xbar, const FamilyConfig& cfg) {
    return s.ybar() * dual_factor(s.xbar(), Xbar, cfg.beta, cfg.lambda, cfg.K4, cfg.K5, "t2");
}

double est_tp(const Sample& s, double Xbar, const FamilyConfig& cfg, const WeightSolution& w) {
    require_normalized(w);
    const auto& c = w.w;
    double total = c[0] * est_mean(s);
    if (c[1] != 0.0) total += c[1] * est_t1(s, Xbar, cfg);
    if (c[2] != 0.0) total += c[2] * est_t2(s, Xbar, cfg);
    return total;
}

double est_mean(const TwoPhaseSample& s) { return s.ybar(); }

double est_t1d(const TwoPhaseSample& s, const FamilyConfig& cfg) {
    const double k23 = cfg.K2 * cfg.K3;
    return s.ybar() * ratio_power(cfg.K1 * s.xbar_first() + k23, cfg.K1 * s.xbar() + k23, cfg.m, "t1d");
}

double est_t2d(const TwoPhaseSample& s, const FamilyConfig& cfg) {
    return s.ybar() * dual_factor(s.xbar(), s.xbar_first(), cfg.q, cfg.gamma, cfg.K4, cfg.K5, "t2d");
}

double est_tpd(const TwoPhaseSample& s, const FamilyConfig& cfg, const WeightSolution& h) {
    require_normalized(h);
    const auto& c = h.w;
    double total = c[0] * est_mean(s);
    if (c[1] != 0.0) total += c[1] * est_t1d(s, cfg);
    if (c[2] != 0.0) total += c[2] * est_t2d(s, cfg);
    return total;
}

}  // namespace surveykit
