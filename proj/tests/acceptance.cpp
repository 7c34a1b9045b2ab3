// Acceptance suite: one line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "surveykit/cli.hpp"
#include "surveykit/error.hpp"
#include "surveykit/numeric.hpp"
#include "surveykit/theory.hpp"
#include "surveykit/verify.hpp"
#include "surveykit/weights.hpp"

using namespace surveykit;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

int failures = 0;

void report(int id, const char* name, const Outcome& o) {
    std::printf("criterion %2d %s  %s%s%s\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.empty() ? "" : ": ",
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

FinitePopulation fixture(const std::string& name) { return load_population_file(oracle::data_dir + "/" + name); }

// Independent transcription of the first-order bias coefficients (without
// the Ybar Cx^2 factor and the design factor where it is common).
long double bias_t1(const PopulationMoments& m, long double f1, long double a, long double V1) {
    return m.Ybar * f1 * m.Cx * m.Cx * (a * (a + 1) * V1 * V1 / 2 - a * V1 * m.Kx);
}

long double bias_t2(const PopulationMoments& m, long double f1, long double b, long double l, long double V2) {
    return m.Ybar * f1 * m.Cx * m.Cx *
           (l * V2 * b / 2 - b * (b - 1) / 2 - l * (l + 2) * V2 * V2 / 8 - b * m.Kx + l * V2 * m.Kx / 2);
}

long double bias_t1d(const PopulationMoments& m, long double f1, long double f2, long double f3, long double mm,
                     long double R1) {
    return m.Ybar * m.Cx * m.Cx *
           (mm * (mm - 1) * R1 * R1 * f2 / 2 + mm * (mm + 1) * R1 * R1 * f1 / 2 - mm * mm * R1 * R1 * f2 -
            mm * R1 * f3 * m.Kx);
}

long double bias_t2d(const PopulationMoments& m, long double f1, long double f2, long double f3, long double q,
                     long double g, long double R2) {
    return m.Ybar * m.Cx * m.Cx *
           (-q * (q - 1) * f1 / 2 - q * (q + 1) * f2 / 2 + q * q * f2 - g * R2 * R2 * f3 - g * g * R2 * R2 * f3 / 2 +
            q * g * R2 * f3 - q * f3 * m.Kx + g * R2 * f3 * m.Kx);
}

PopulationMoments make_moments(double Ybar, double Xbar, double Cy, double Cx, double rho) {
    PopulationMoments m;
    m.Ybar = Ybar;
    m.Xbar = Xbar;
    m.Cy = Cy;
    m.Cx = Cx;
    m.rho = rho;
    m.Kx = rho * Cy / Cx;
    m.Sy2 = Cy * Cy * Ybar * Ybar;
    m.Sx2 = Cx * Cx * Xbar * Xbar;
    m.Syx = rho * std::sqrt(m.Sy2 * m.Sx2);
    m.beta2x = 3.0;
    m.N = 200;
    return m;
}

struct RandomFixture {
    PopulationMoments m;
    FiniteFactors f{0, 0, 0};
    FamilyConfig cfg;
};

// Random moments, design sizes and family constants.
std::vector<RandomFixture> random_fixtures(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<RandomFixture> out;
    while (static_cast<int>(out.size()) < count) {
        RandomFixture fx;
        fx.m = make_moments(1 + 199 * u(rng), 1 + 99 * u(rng), 0.02 + 0.6 * u(rng), 0.02 + 0.6 * u(rng),
                            -0.98 + 1.96 * u(rng));
        const std::size_t N = 50 + static_cast<std::size_t>(950 * u(rng));
        const std::size_t n_prime = 4 + static_cast<std::size_t>((N - 4) * 0.9 * u(rng));
        const std::size_t n = 2 + static_cast<std::size_t>((n_prime - 2) * u(rng));
        fx.f = finite_factors(N, n, n_prime);
        auto& c = fx.cfg;
        c.K1 = 0.2 + 3 * u(rng);
        c.K2 = u(rng) < 0.5 ? 1 : -1;
        c.K3 = 0.5 * c.K1 * fx.m.Xbar * u(rng);
        c.K4 = 0.2 + 3 * u(rng);
        c.K5 = 2 * fx.m.Xbar * u(rng);
        c.alpha = -2 + 4 * u(rng);
        c.beta = -2 + 4 * u(rng);
        c.lambda = -2 + 4 * u(rng);
        c.m = -2 + 4 * u(rng);
        c.q = -2 + 4 * u(rng);
        c.gamma = -2 + 4 * u(rng);
        out.push_back(fx);
    }
    return out;
}

long double V1_of(const FamilyConfig& c, double X) { return c.K1 * (long double)X / (c.K1 * (long double)X + c.K2 * c.K3); }
long double V2_of(const FamilyConfig& c, double X) { return c.K4 * (long double)X / (c.K4 * (long double)X + c.K5); }

// ---------------------------------------------------------------------------

// |w0 + w1 + w2 - 1| evaluated exactly. Once max|w| reaches 2^14, half an
// ulp of w0 exceeds 1e-12 and no double triple can meet that bound; such
// fixtures are held to the best representable residual instead and counted.
double sum_residual(const WeightSolution& w, int& beyond_double) {
    const long double exact = std::fabs((long double)w.w[0] + w.w[1] + w.w[2] - 1);
    const double biggest = std::max({std::fabs(w.w[0]), std::fabs(w.w[1]), std::fabs(w.w[2])});
    if (biggest < 16384.0) return static_cast<double>(exact);
    ++beyond_double;
    const double half_ulp = 0.5 * (std::nextafter(std::fabs(w.w[0]), INFINITY) - std::fabs(w.w[0]));
    return exact <= half_ulp ? 0.0 : static_cast<double>(exact);
}

void criterion_1() {
    Outcome o;
    int beyond_double = 0;
    const auto t0 = Clock::now();
    const auto fixtures = random_fixtures(200, 101);
    int solved = 0;
    double worst_sum = 0, worst_opt = 0, worst_bias = 0, worst_sum2 = 0, worst_opt2 = 0, worst_bias2 = 0;
    for (const auto& fx : fixtures) {
        const auto in = make_theory_input(fx.m, fx.f, fx.cfg);
        const auto& c = fx.cfg;
        const long double V1 = V1_of(c, fx.m.Xbar), V2 = V2_of(c, fx.m.Xbar);
        WeightSolution w, h;
        try {
            w = solve_weights(in);
            h = solve_weights_two_phase(in);
        } catch (const Error& e) {
            o.require(false, std::string("unexpected ") + e.what());
            continue;
        }
        ++solved;
        const long double f1 = fx.f.f1(), f2 = fx.f.f2(), f3 = fx.f.f3();
        {
            const long double b1 = bias_t1(fx.m, f1, c.alpha, V1), b2 = bias_t2(fx.m, f1, c.beta, c.lambda, V2);
            const long double scale = std::max({1.0L, std::fabs(b1), std::fabs(b2)});
            const double rs = sum_residual(w, beyond_double);
            const double ro = std::fabs(w.w[1] * c.alpha * V1 + w.w[2] * (c.beta - c.lambda * V2 / 2) - fx.m.Kx);
            const double rb = std::fabs(w.w[1] * b1 + w.w[2] * b2) / scale;
            worst_sum = std::max(worst_sum, rs);
            worst_opt = std::max(worst_opt, ro);
            worst_bias = std::max(worst_bias, rb);
        }
        {
            const long double R1 = V1, R2 = V2 / 2;
            const long double b1 = bias_t1d(fx.m, f1, f2, f3, c.m, R1), b2 = bias_t2d(fx.m, f1, f2, f3, c.q, c.gamma, R2);
            const long double scale = std::max({1.0L, std::fabs(b1), std::fabs(b2)});
            const double rs = sum_residual(h, beyond_double);
            const double ro = std::fabs(h.w[1] * c.m * R1 + h.w[2] * (c.q - c.gamma * R2) - fx.m.Kx);
            const double rb = std::fabs(h.w[1] * b1 + h.w[2] * b2) / scale;
            worst_sum2 = std::max(worst_sum2, rs);
            worst_opt2 = std::max(worst_opt2, ro);
            worst_bias2 = std::max(worst_bias2, rb);
        }
    }
    const double elapsed = seconds_since(t0);
    o.require(solved - beyond_double >= 100, "fewer than 100 fixtures within double resolution");
    o.require(worst_sum <= 1e-12 && worst_sum2 <= 1e-12, fmt("sum residual %.3g / %.3g", worst_sum, worst_sum2));
    o.require(worst_opt <= 1e-10 && worst_opt2 <= 1e-10, fmt("slope residual %.3g / %.3g", worst_opt, worst_opt2));
    o.require(worst_bias <= 1e-10 && worst_bias2 <= 1e-10, fmt("bias residual %.3g / %.3g", worst_bias, worst_bias2));
    o.require(elapsed < 1.0, fmt("runtime %.3f s", elapsed));
    if (o.pass) {
        o.detail = fmt("%.0f fixtures (%.0f with max|w| >= 2^14 at the representable limit), max residuals sum %.2g, slope %.2g", solved, beyond_double,
                       std::max(worst_sum, worst_sum2), std::max(worst_opt, worst_opt2)) +
                   fmt(", bias %.2g", std::max(worst_bias, worst_bias2)) +
                   fmt(", %.3f s", elapsed);
    }
    report(1, "weight constraints (single and two phase)", o);
}

void criterion_2() {
    Outcome o;
    double worst = 0, worst2 = 0;
    for (const auto& fx : random_fixtures(200, 101)) {
        const auto in = make_theory_input(fx.m, fx.f, fx.cfg);
        const long double Y2Cy2 = (long double)fx.m.Ybar * fx.m.Ybar * fx.m.Cy * fx.m.Cy;
        const long double rho2 = (long double)fx.m.rho * fx.m.rho;
        const long double target = Y2Cy2 * fx.f.f1() * (1 - rho2);
        const long double target2 = Y2Cy2 * (fx.f.f1() - fx.f.f3() * rho2);
        const double got = theory_tp(in, solve_weights(in)).mse;
        const double got2 = theory_tpd(in, solve_weights_two_phase(in)).mse;
        worst = std::max(worst, (double)std::fabs((got - target) / target));
        worst2 = std::max(worst2, (double)std::fabs((got2 - target2) / target2));
    }
    o.require(worst <= 1e-10, fmt("single-phase relative gap %.3g", worst));
    o.require(worst2 <= 1e-10, fmt("two-phase relative gap %.3g", worst2));
    if (o.pass) o.detail = fmt("max relative gap %.2g (tp), %.2g (tpd) over 200 fixtures", worst, worst2);
    report(2, "minimum-MSE identities at solved weights", o);
}

void criterion_3() {
    Outcome o;
    const double Cx = std::sqrt(3.0 / 7.0);
    const auto m = make_moments(4.0, 7.0 / 3.0, 0.5, Cx, 0.75 * Cx / 0.5);
    FamilyConfig cfg;
    cfg.beta = 1;
    cfg.lambda = 0;
    const auto w = solve_weights(make_theory_input(m, FiniteFactors(0.04, 0.2, 0.8), cfg));
    const double expect[3] = {0.25, 0.5625, 0.1875};
    double worst = 0;
    for (int k = 0; k < 3; ++k) worst = std::max(worst, std::fabs(w.w[k] - expect[k]));
    o.require(worst <= 1e-12, fmt("max |w - w*| = %.3g", worst));
    if (o.pass) o.detail = fmt("w = (%.15g, %.15g, %.15g)", w.w[0], w.w[1], w.w[2]);
    report(3, "hand-solved weight fixture", o);
}

void criterion_4() {
    Outcome o;
    std::size_t samples = 0;
    FamilyConfig ratio, product;
    product.alpha = -1;
    for (const char* name : {"fixture3.csv", "pop8.csv", "pop10.csv", "pop12.csv", "rho0.csv", "proportional.csv"}) {
        const auto pop = fixture(name);
        const double X = compute_moments(pop).Xbar;
        const int N = static_cast<int>(pop.size());
        for (std::uint32_t mask = 0; mask < (1u << N); ++mask) {
            const int k = __builtin_popcount(mask);
            if (k < 2) continue;
            std::vector<Unit> units;
            for (int i = 0; i < N; ++i) {
                if (mask & (1u << i)) units.push_back(pop[i]);
            }
            const Sample s(units);
            ++samples;
            const double classic_ratio = est_ratio(s, X);
            const double classic_product = s.ybar() * (s.xbar() / X);
            if (est_t1(s, X, ratio) != classic_ratio || est_t1(s, X, product) != classic_product) {
                o.require(false, std::string("reduction differs on a sample of ") + name);
            }
        }
    }
    double worst = 0;
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    FamilyConfig cfg;
    for (int i = 0; i < 100; ++i) {
        const auto m = make_moments(1 + 99 * u(rng), 1 + 49 * u(rng), 0.05 + 0.5 * u(rng), 0.05 + 0.5 * u(rng),
                                    -0.95 + 1.9 * u(rng));
        const double f1 = 0.001 + 0.3 * u(rng);
        const auto r = theory_t1(make_theory_input(m, FiniteFactors(f1, 0.1, 0.9), cfg));
        const long double bias = (long double)m.Ybar * f1 * (m.Cx * m.Cx - (long double)m.rho * m.Cy * m.Cx);
        const long double mse = (long double)m.Ybar * m.Ybar * f1 *
                                (m.Cy * m.Cy + (long double)m.Cx * m.Cx - 2.0L * m.rho * m.Cy * m.Cx);
        // Bias is checked relative to its own largest term so cancellation does not inflate the error.
        const long double bscale = (long double)m.Ybar * f1 * std::max((long double)m.Cx * m.Cx, (long double)std::fabs(m.rho * m.Cy * m.Cx));
        worst = std::max(worst, (double)(std::fabs(r.bias - bias) / bscale));
        worst = std::max(worst, (double)std::fabs((r.mse - mse) / mse));
    }
    o.require(worst <= 1e-12, fmt("classical ratio formulas differ by %.3g relative", worst));
    if (o.pass) o.detail = fmt("%.0f samples exact; theory max relative gap %.2g on 100 moment sets", (double)samples, worst);
    report(4, "reduction identities", o);
}

FamilyConfig linear_cfg() {
    FamilyConfig cfg;
    cfg.beta = 1;
    cfg.lambda = 0;
    return cfg;
}

// Exact bias and mse via the test-side bitmask enumerator, cross-checked against the library.
struct Truth {
    double bias, mse;
};

Truth exact_single(const FinitePopulation& pop, std::size_t n, const std::function<double(const Sample&)>& est,
                   Outcome& o) {
    const std::vector<Unit> units(pop.units().begin(), pop.units().end());
    const auto oracle_result = oracle::enumerate_bitmask(units, static_cast<int>(n), [&](double y, double x) {
        return est(Sample({{y, x}, {y, x}}));
    });
    const auto lib = enumerate_srswor(pop, n, est);
    const double mse = static_cast<double>(oracle_result.mse);
    o.require(std::fabs(lib.exact_mse - mse) <= 1e-10 * mse, "library enumeration disagrees with the oracle");
    o.require(lib.count == oracle_result.count, "library enumeration count differs");
    return {static_cast<double>(oracle_result.bias), mse};
}

void criterion_5_and_6() {
    Outcome o5, o6;
    const auto t0 = Clock::now();
    const auto pop = fixture("pop24.csv");
    const auto m = compute_moments(pop);
    const auto cfg = linear_cfg();
    const std::size_t grid[] = {3, 4, 6, 8};
    std::vector<double> gap[3];
    double worst = 0;
    double max_b1 = 0, max_bp = 0;
    std::string gaps_text;
    for (std::size_t n : grid) {
        const auto f = finite_factors(pop.size(), n);
        const auto in = make_theory_input(m, f, cfg);
        const auto w = solve_weights(in);
        const auto t1 = exact_single(pop, n, [&](const Sample& s) { return est_t1(s, m.Xbar, cfg); }, o5);
        const auto t2 = exact_single(pop, n, [&](const Sample& s) { return est_t2(s, m.Xbar, cfg); }, o5);
        const auto tp = exact_single(pop, n, [&](const Sample& s) { return est_tp(s, m.Xbar, cfg, w); }, o5);
        const double analytic[3] = {theory_t1(in).mse, theory_t2(in).mse, theory_tp(in, w).mse};
        const double exact[3] = {t1.mse, t2.mse, tp.mse};
        for (int k = 0; k < 3; ++k) {
            const double g = std::fabs(exact[k] - analytic[k]) / analytic[k];
            gap[k].push_back(g);
            worst = std::max(worst, g);
        }
        gaps_text += fmt(" n=%.0f:%.3f/%.3f/%.3f", (double)n, gap[0].back(), gap[1].back(), gap[2].back());
        max_b1 = std::max(max_b1, std::fabs(n * t1.bias));
        max_bp = std::max(max_bp, std::fabs(n * tp.bias));
    }
    o5.require(worst <= 0.15, fmt("worst relative MSE gap %.3f", worst));
    for (int k = 0; k < 3; ++k) {
        for (std::size_t i = 1; i < gap[k].size(); ++i) {
            o5.require(gap[k][i] <= 1.10 * gap[k][i - 1],
                       fmt("gap grows for estimator %.0f between grid points %.0f and %.0f", k, i - 1, i));
        }
    }
    const double elapsed = seconds_since(t0);
    o5.require(elapsed < 60, fmt("runtime %.1f s", elapsed));
    if (o5.pass) o5.detail = "relative MSE gaps t1/t2/tp" + gaps_text + fmt(", %.1f s", elapsed);
    report(5, "single-phase oracle agreement on N=24", o5);

    const auto t1 = Clock::now();
    o6.require(max_bp <= 0.2 * max_b1, fmt("max|n b_p| = %.3g vs 0.2 max|n b_1| = %.3g", max_bp, 0.2 * max_b1));
    const auto lib = bias_annihilation_check(pop, cfg, grid);
    o6.require(lib.pass, "library annihilation check reports failure");
    o6.require(std::fabs(lib.max_scaled_member - max_b1) <= 1e-9 * max_b1, "library n b_1 differs from the oracle");
    const double elapsed6 = seconds_since(t1) + elapsed;
    o6.require(elapsed6 < 60, fmt("runtime %.1f s", elapsed6));
    if (o6.pass) o6.detail = fmt("max|n b_p| = %.3g, max|n b_1| = %.3g, ratio %.4f", max_bp, max_b1, max_bp / max_b1);
    report(6, "bias annihilation on N=24", o6);
}

void criterion_7() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto pop = fixture("pop12.csv");
    const auto m = compute_moments(pop);
    FamilyConfig cfg;
    cfg.q = 1;
    cfg.gamma = 1;
    const std::vector<Unit> units(pop.units().begin(), pop.units().end());
    double worst = 0, max_b1 = 0, max_bp = 0;
    std::string text;
    for (std::size_t np : {6, 8}) {
        for (std::size_t n : {3, 4}) {
            const auto f = finite_factors(pop.size(), n, np);
            const auto in = make_theory_input(m, f, cfg);
            const auto h = solve_weights_two_phase(in);
            auto two = [&](const TwoPhaseEstimator& est) {
                const auto r = oracle::enumerate_two_phase_bitmask(units, (int)np, (int)n, [&](double y, double x, double xp) {
                    // Second phase of two identical units, first phase padded to mean xp.
                    return est(TwoPhaseSample({x, x, 2 * xp - x, 2 * xp - x}, Sample({{y, x}, {y, x}})));
                });
                const auto lib = enumerate_two_phase(pop, np, n, est);
                o.require(std::fabs(lib.exact_mse - (double)r.mse) <= 1e-10 * (double)r.mse,
                          "library two-phase enumeration disagrees with the oracle");
                return Truth{(double)r.bias, (double)r.mse};
            };
            const auto t1d = two([&](const TwoPhaseSample& s) { return est_t1d(s, cfg); });
            const auto t2d = two([&](const TwoPhaseSample& s) { return est_t2d(s, cfg); });
            const auto tpd = two([&](const TwoPhaseSample& s) { return est_tpd(s, cfg, h); });
            const double analytic[3] = {theory_t1d(in).mse, theory_t2d(in).mse, theory_tpd(in, h).mse};
            const double exact[3] = {t1d.mse, t2d.mse, tpd.mse};
            for (int k = 0; k < 3; ++k) worst = std::max(worst, std::fabs(exact[k] - analytic[k]) / analytic[k]);
            max_b1 = std::max(max_b1, std::fabs(n * t1d.bias));
            max_bp = std::max(max_bp, std::fabs(n * tpd.bias));
            text += fmt(" (%.0f,%.0f):%.3g/%.3g", (double)np, (double)n, t1d.bias, tpd.bias);
        }
    }
    o.require(worst <= 0.20, fmt("worst relative MSE gap %.3f", worst));
    o.require(max_bp <= 0.2 * max_b1, fmt("max|n b_pd| = %.3g vs 0.2 max|n b_1d| = %.3g", max_bp, 0.2 * max_b1));
    const double elapsed = seconds_since(t0);
    o.require(elapsed < 120, fmt("runtime %.1f s", elapsed));
    if (o.pass) {
        o.detail = fmt("worst MSE gap %.3f, bias ratio %.4f; exact b_1d/b_pd", worst, max_bp / max_b1) + text +
                   fmt(", %.1f s", elapsed);
    }
    report(7, "two-phase oracle on N=12", o);
}

void criterion_8() {
    Outcome o;
    const auto pop = fixture("pop10.csv");
    const auto m = compute_moments(pop);
    const auto cfg = linear_cfg();
    const std::size_t n = 4;
    const auto w = solve_weights(make_theory_input(m, finite_factors(10, n), cfg));
    const double X = m.Xbar;
    const double slope = m.Syx / m.Sx2;
    const std::vector<NamedEstimator> ests{
        {"mean", [](const Sample& s) { return est_mean(s); }},
        {"ratio", [&](const Sample& s) { return est_ratio(s, X); }},
        {"product", [&](const Sample& s) { return est_product(s, X); }},
        {"exp", [&](const Sample& s) { return est_exp_ratio(s, X); }},
        {"regression", [&](const Sample& s) { return est_regression(s, X, slope); }},
        {"t1", [&](const Sample& s) { return est_t1(s, X, cfg); }},
        {"t2", [&](const Sample& s) { return est_t2(s, X, cfg); }},
        {"tp", [&](const Sample& s) { return est_tp(s, X, cfg, w); }},
    };
    const std::uint64_t reps = 100'000, seed = 20240601;
    const auto exact = enumerate_srswor(pop, n, ests);
    const auto mc1 = monte_carlo(pop, n, ests, reps, seed, 1);
    const auto mc4 = monte_carlo(pop, n, ests, reps, seed, 4);
    const auto mc0 = monte_carlo(pop, n, ests, reps, seed, 0);
    o.require(mc1 == mc4 && mc1 == mc0, "Monte Carlo results depend on the thread count");

    double worst_z = 0;
    auto check = [&](const std::string& id, double emp_b, double se_b, double emp_m, double se_m, double b, double mse) {
        const double zb = std::fabs(emp_b - b) / se_b, zm = std::fabs(emp_m - mse) / se_m;
        worst_z = std::max({worst_z, zb, zm});
        o.require(zb <= 4 && zm <= 4, id + fmt(" outside 4 standard errors (z = %.2f, %.2f)", zb, zm));
    };
    for (std::size_t i = 0; i < ests.size(); ++i) {
        const auto o_truth = exact_single(pop, n, ests[i].fn, o);
        o.require(std::fabs(exact[i].exact_mse - o_truth.mse) <= 1e-10 * o_truth.mse, "enumeration mismatch");
        check(ests[i].id, mc1[i].emp_bias, mc1[i].stderr_bias, mc1[i].emp_mse, mc1[i].stderr_mse, o_truth.bias,
              o_truth.mse);
    }

    FamilyConfig two = cfg;
    two.q = 1;
    two.gamma = 1;
    const std::size_t np = 6, n2 = 3;
    const auto h = solve_weights_two_phase(make_theory_input(m, finite_factors(10, n2, np), two));
    const std::vector<NamedTwoPhaseEstimator> ests2{
        {"mean", [](const TwoPhaseSample& s) { return est_mean(s); }},
        {"t1d", [&](const TwoPhaseSample& s) { return est_t1d(s, two); }},
        {"t2d", [&](const TwoPhaseSample& s) { return est_t2d(s, two); }},
        {"tpd", [&](const TwoPhaseSample& s) { return est_tpd(s, two, h); }},
    };
    const auto exact2 = enumerate_two_phase(pop, np, n2, ests2);
    const auto mc2a = monte_carlo_two_phase(pop, np, n2, ests2, reps, seed, 1);
    const auto mc2b = monte_carlo_two_phase(pop, np, n2, ests2, reps, seed, 3);
    o.require(mc2a == mc2b, "two-phase Monte Carlo depends on the thread count");
    for (std::size_t i = 0; i < ests2.size(); ++i) {
        check(ests2[i].id + "(two-phase)", mc2a[i].emp_bias, mc2a[i].stderr_bias, mc2a[i].emp_mse,
              mc2a[i].stderr_mse, exact2[i].exact_bias, exact2[i].exact_mse);
    }
    if (o.pass) o.detail = fmt("12 estimators, 1e5 reps, max |z| = %.2f; identical across 1/4/all threads", worst_z);
    report(8, "Monte Carlo consistency on N=10", o);
}

void criterion_9() {
    Outcome o;
    {
        const auto pop = fixture("rho0.csv");
        const auto m = compute_moments(pop);
        const auto f = finite_factors(pop.size(), 3);
        const auto in = make_theory_input(m, f, linear_cfg());
        const auto w = solve_weights(in);
        o.require(std::fabs(w.w[0] - 1) <= 1e-12 && std::fabs(w.w[1]) <= 1e-12 && std::fabs(w.w[2]) <= 1e-12,
                  fmt("rho = 0 weights (%.3g, %.3g, %.3g)", w.w[0], w.w[1], w.w[2]));
        const long double base = (long double)m.Ybar * m.Ybar * f.f1() * m.Cy * m.Cy;
        const double pre = pre_percent((double)base, theory_tp(in, w).mse);
        o.require(std::fabs(pre - 100) <= 1e-9, fmt("PRE(tp) = %.15g", pre));
    }
    {
        const auto pop = fixture("proportional.csv");
        const double X = compute_moments(pop).Xbar;
        for (std::size_t n : {2, 3, 5, 8}) {
            const auto t = exact_single(pop, n, [&](const Sample& s) { return est_ratio(s, X); }, o);
            o.require(std::fabs(t.bias) <= 1e-14 && t.mse <= 1e-14,
                      fmt("ratio estimator bias %.3g mse %.3g on the proportional population", t.bias, t.mse));
        }
    }
    int singular = 0;
    auto expect_singular = [&](const std::function<WeightSolution()>& fn, const char* what) {
        try {
            const auto w = fn();
            o.require(false, std::string(what) + fmt(" returned weights (%.3g, %.3g, %.3g)", w.w[0], w.w[1], w.w[2]));
        } catch (const Error& e) {
            o.require(e.code() == ErrorCode::SingularSystem, std::string(what) + " raised " + e.what());
            ++singular;
        }
    };
    std::mt19937_64 rng(909);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const auto m = make_moments(1 + 99 * u(rng), 1 + 49 * u(rng), 0.05 + 0.5 * u(rng), 0.05 + 0.5 * u(rng),
                                    -0.95 + 1.9 * u(rng));
        const FiniteFactors f(0.05, 0.1, 0.9, 0.01, 0.04);
        FamilyConfig flat;
        flat.alpha = 0;
        flat.beta = 0;
        flat.lambda = 0;
        expect_singular([&] { return solve_weights(make_theory_input(m, f, flat)); }, "vanishing slope row");
        // V2 = 2, beta = -1, lambda = -2 matches t1's slope and bias coefficients exactly.
        FamilyConfig twin;
        twin.beta = -1;
        twin.lambda = -2;
        twin.K5 = -m.Xbar / 2;
        expect_singular([&] { return solve_weights(make_theory_input(m, f, twin)); }, "proportional rows");
        FamilyConfig two;
        two.m = 0;
        two.q = 0.5;
        two.gamma = 1;
        expect_singular([&] { return solve_weights_two_phase(make_theory_input(m, f, two)); }, "two-phase m = 0");
    }
    if (o.pass) o.detail = fmt("rho=0 gives (1,0,0) and PRE 100; ratio exact on y=x/2; %.0f singular systems rejected", singular);
    report(9, "degenerate inputs", o);
}

struct CliResult {
    int code;
    std::string out;
};

CliResult cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str()};
}

void criterion_10() {
    Outcome o;
    const std::string pop24 = oracle::data_dir + "/pop24.csv";
    // Row labels as listed in the published tables, duplicates removed.
    const std::vector<std::string> head{
        "unity,C_x", "unity,beta2_x", "beta2_x,C_x", "C_x,beta2_x", "unity,rho_yx", "N_Xbar,S_x", "N_Xbar,f",
        "beta2_x,K_x", "N,K_x", "N,unity", "N,C_x", "N,rho_yx", "N,S_x", "N,f", "N,g"};
    const std::vector<std::string> small{"n,rho_yx", "n,S_x", "n,f", "n,g", "n,K_x"};
    const std::vector<std::string> tail{"beta2_x,Xbar", "N_Xbar,Xbar", "N,Xbar", "n,Xbar"};
    for (const char* t : {"a", "b", "c"}) {
        const auto r = cli({"members", "--pop", pop24, "--n", "6", "--table", t, "--format", "csv"});
        o.require(r.code == 0, std::string("members --table ") + t + " failed");
        const auto golden = oracle::read_file(oracle::golden_dir + "/members_" + t + ".csv");
        o.require(!golden.empty() && r.out == golden, std::string("members table ") + t + " differs from golden");

        std::vector<std::string> expected = head;
        if (t[0] != 'a') expected.insert(expected.end(), small.begin(), small.end());
        expected.insert(expected.end(), tail.begin(), tail.end());
        std::istringstream lines(r.out);
        std::string header, line;
        std::getline(lines, header);
        const std::string want_header = t[0] == 'c' ? "K4,K5,\"PRE (beta=-1, lambda=-1)\"" : "K1,K3,PRE K2=+1,PRE K2=-1";
        o.require(header == want_header, std::string("unexpected header in table ") + t + ": " + header);
        std::size_t i = 0;
        for (; std::getline(lines, line); ++i) {
            const auto second_comma = line.find(',', line.find(',') + 1);
            o.require(i < expected.size() && line.substr(0, second_comma) == expected[i],
                      std::string("row ") + std::to_string(i) + " of table " + t + " is " + line);
        }
        o.require(i == expected.size(), std::string("row count of table ") + t);
    }

    // Exit status 4 exactly when some row fails.
    int runs = 0;
    const std::string pop8 = oracle::data_dir + "/pop8.csv";
    for (const char* tol : {"0", "0.01", "0.05", "0.15", "0.5"}) {
        for (const char* n : {"3", "5"}) {
            const auto r = cli({"verify", "--pop", pop8, "--n", n, "--beta", "1", "--lambda", "0", "--tol-bias", tol,
                                "--tol-mse", tol, "--format", "json"});
            bool any_fail = false;
            const auto parsed = nlohmann::json::parse(r.out);
            for (const auto& row : parsed["rows"]) any_fail |= !row["pass"].get<bool>();
            o.require(r.code == (any_fail ? 4 : 0), fmt("verify exit %.0f with any_fail=%.0f at tol %g n %.0f", r.code, any_fail, std::stod(tol), std::stod(n)));
            ++runs;
        }
    }
    const auto strict = cli({"verify", "--pop", pop8, "--n", "3", "--tol-bias", "0", "--tol-mse", "0"});
    o.require(strict.code == 4, "zero tolerance did not fail");
    const auto loose = cli({"verify", "--pop", pop8, "--n", "3"});
    o.require(loose.code == 0, "default tolerance failed on N=8, n=3");
    if (o.pass) o.detail = fmt("3 golden tables match with published row structure; %.0f verify runs agree", runs + 2);
    report(10, "CLI contract", o);
}

}  // namespace

int main() {
    const std::pair<const char*, void (*)()> steps[] = {
        {"1", criterion_1}, {"2", criterion_2}, {"3", criterion_3}, {"4", criterion_4},
        {"5-6", criterion_5_and_6}, {"7", criterion_7}, {"8", criterion_8}, {"9", criterion_9}, {"10", criterion_10},
    };
    for (const auto& [id, fn] : steps) {
        try {
            fn();
        } catch (const std::exception& e) {
            std::printf("criterion %s FAIL  unexpected exception: %s\n", id, e.what());
            ++failures;
        }
    }
    std::printf("%s: %d criterion failure(s)\n", failures ? "FAILED" : "ALL PASSED", failures);
    return failures ? 1 : 0;
}
