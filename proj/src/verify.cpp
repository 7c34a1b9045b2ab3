#include "surveykit/verify.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

#include "surveykit/error.hpp"
#include "surveykit/numeric.hpp"
#include "surveykit/weights.hpp"

namespace surveykit {

namespace {

double population_ybar(const FinitePopulation& pop) {
    CompensatedSum acc;
    for (const auto& u : pop.units()) acc.add(u.y);
    return acc.value() / static_cast<double>(pop.size());
}

// Advances idx to the next k-subset of {0..n-1} in lexicographic order.
bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
    const std::size_t k = idx.size();
    for (std::size_t i = k; i-- > 0;) {
        if (idx[i] < n - k + i) {
            ++idx[i];
            for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
            return true;
        }
    }
    return false;
}

std::vector<std::size_t> first_combination(std::size_t k) {
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

std::string format_indices(std::span<const std::size_t> idx) {
    std::ostringstream out;
    out << '{';
    for (std::size_t i = 0; i < idx.size(); ++i) out << (i ? "," : "") << idx[i];
    out << '}';
    return out.str();
}

[[noreturn]] void rethrow_estimator_error(const std::string& id, const std::string& where, const Error& e,
                                          std::size_t ordinal) {
    throw Error(ErrorCode::EstimatorError, "estimator '" + id + "' failed on " + where + ": " + e.what(), ordinal);
}

void check_sizes(std::size_t N, std::size_t n, std::optional<std::size_t> n_prime = std::nullopt) {
    if (n < 2 || n > N) {
        throw Error(ErrorCode::InvalidSizes,
                    "need 2 <= n <= N, got n=" + std::to_string(n) + ", N=" + std::to_string(N));
    }
    if (n_prime && (*n_prime < n || *n_prime > N)) {
        throw Error(ErrorCode::InvalidSizes, "need n <= n' <= N, got n'=" + std::to_string(*n_prime));
    }
}

ExactDistribution summarize_exact(std::string id, std::vector<double> estimates, double ybar) {
    ExactDistribution d;
    d.estimator_id = std::move(id);
    d.count = estimates.size();
    d.probability = 1.0 / static_cast<double>(d.count);
    CompensatedSum sum, sq;
    for (double t : estimates) {
        sum.add(t);
        sq.add((t - ybar) * (t - ybar));
    }
    const double count = static_cast<double>(d.count);
    d.mean_estimate = sum.value() / count;
    d.exact_bias = d.mean_estimate - ybar;
    d.exact_mse = sq.value() / count;
    d.estimates = std::move(estimates);
    return d;
}

EmpiricalStats summarize_empirical(std::string id, std::span<const double> estimates, std::size_t stride,
                                   std::size_t offset, std::uint64_t reps, std::uint64_t seed, double ybar) {
    CompensatedSum sum, sq;
    for (std::uint64_t r = 0; r < reps; ++r) {
        const double t = estimates[r * stride + offset];
        sum.add(t);
        sq.add((t - ybar) * (t - ybar));
    }
    const double R = static_cast<double>(reps);
    EmpiricalStats s;
    s.estimator_id = std::move(id);
    s.reps = reps;
    s.seed = seed;
    s.mean_estimate = sum.value() / R;
    s.emp_bias = s.mean_estimate - ybar;
    s.emp_mse = sq.value() / R;
    CompensatedSum var_t, var_d2;
    for (std::uint64_t r = 0; r < reps; ++r) {
        const double t = estimates[r * stride + offset];
        const double d2 = (t - ybar) * (t - ybar);
        var_t.add((t - s.mean_estimate) * (t - s.mean_estimate));
        var_d2.add((d2 - s.emp_mse) * (d2 - s.emp_mse));
    }
    s.stderr_bias = std::sqrt(var_t.value() / (R - 1.0) / R);
    s.stderr_mse = std::sqrt(var_d2.value() / (R - 1.0) / R);
    return s;
}

// Runs `body(r, out)` for r in [0, reps), writing `width` doubles per
// replicate. Failures are rethrown for the lowest failing replicate so the
// reported error does not depend on scheduling.
template <class Body>
std::vector<double> run_replicates(std::uint64_t reps, std::size_t width, unsigned threads, Body body) {
    std::vector<double> out(reps * width);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, reps));

    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::uint64_t> failed_at(threads, reps);
    auto worker = [&](unsigned t) {
        const std::uint64_t begin = reps * t / threads;
        const std::uint64_t end = reps * (t + 1) / threads;
        for (std::uint64_t r = begin; r < end; ++r) {
            try {
                body(r, std::span<double>(out.data() + r * width, width));
            } catch (...) {
                errors[t] = std::current_exception();
                failed_at[t] = r;
                return;
            }
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    const auto first = std::min_element(failed_at.begin(), failed_at.end());
    if (*first < reps) std::rethrow_exception(errors[static_cast<std::size_t>(first - failed_at.begin())]);
    return out;
}

// Partial Fisher-Yates: the first k entries of `pool` become a uniform
// k-subset, returned sorted.
template <class Engine>
void draw_subset(Engine& rng, std::vector<std::size_t>& pool, std::size_t k) {
    const std::size_t n = pool.size();
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
        std::swap(pool[i], pool[j]);
    }
    std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
}

void check_reps(std::uint64_t reps) {
    if (reps < 1000) throw Error(ErrorCode::InvalidConfig, "Monte Carlo needs at least 1000 replicates");
}

bool same_double(double a, double b) noexcept { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

std::vector<ExactDistribution> enumerate_srswor(const FinitePopulation& pop, std::size_t n,
                                                std::span<const NamedEstimator> ests) {
    const std::size_t N = pop.size();
    check_sizes(N, n);
    const std::uint64_t total = binomial(N, n);
    if (total > kMaxEnumeratedSamples) {
        throw Error(ErrorCode::TooManySubsets,
                    "C(" + std::to_string(N) + "," + std::to_string(n) + ") exceeds the enumeration limit");
    }

    std::vector<std::vector<double>> values(ests.size());
    for (auto& v : values) v.reserve(total);
    auto idx = first_combination(n);
    std::vector<Unit> units(n);
    std::size_t ordinal = 0;
    do {
        for (std::size_t i = 0; i < n; ++i) units[i] = pop[idx[i]];
        const Sample s(units);
        for (std::size_t e = 0; e < ests.size(); ++e) {
            try {
                values[e].push_back(ests[e].fn(s));
            } catch (const Error& err) {
                rethrow_estimator_error(ests[e].id, "sample " + format_indices(idx), err, ordinal);
            }
        }
        ++ordinal;
    } while (next_combination(idx, N));

    const double ybar = population_ybar(pop);
    std::vector<ExactDistribution> out;
    out.reserve(ests.size());
    for (std::size_t e = 0; e < ests.size(); ++e) {
        out.push_back(summarize_exact(ests[e].id, std::move(values[e]), ybar));
    }
    return out;
}

ExactDistribution enumerate_srswor(const FinitePopulation& pop, std::size_t n, const SampleEstimator& est,
                                   std::string id) {
    const NamedEstimator named{std::move(id), est};
    return std::move(enumerate_srswor(pop, n, std::span(&named, 1)).front());
}

std::vector<ExactDistribution> enumerate_two_phase(const FinitePopulation& pop, std::size_t n_prime,
                                                   std::size_t n, std::span<const NamedTwoPhaseEstimator> ests) {
    const std::size_t N = pop.size();
    check_sizes(N, n, n_prime);
    const std::uint64_t outer = binomial(N, n_prime);
    const std::uint64_t inner = binomial(n_prime, n);
    if (outer > kMaxEnumeratedSamples || inner > kMaxEnumeratedSamples / outer) {
        throw Error(ErrorCode::TooManySubsets, "C(N,n')*C(n',n) exceeds the enumeration limit");
    }
    const std::uint64_t total = outer * inner;

    std::vector<std::vector<double>> values(ests.size());
    for (auto& v : values) v.reserve(total);
    auto first = first_combination(n_prime);
    std::vector<double> first_x(n_prime);
    std::vector<Unit> units(n);
    std::vector<std::size_t> chosen(n);
    std::size_t ordinal = 0;
    do {
        for (std::size_t i = 0; i < n_prime; ++i) first_x[i] = pop[first[i]].x;
        auto second = first_combination(n);
        do {
            for (std::size_t i = 0; i < n; ++i) {
                chosen[i] = first[second[i]];
                units[i] = pop[chosen[i]];
            }
            const TwoPhaseSample s(first_x, Sample(units));
            for (std::size_t e = 0; e < ests.size(); ++e) {
                try {
                    values[e].push_back(ests[e].fn(s));
                } catch (const Error& err) {
                    rethrow_estimator_error(ests[e].id,
                                            "first phase " + format_indices(first) + ", second phase " +
                                                format_indices(chosen),
                                            err, ordinal);
                }
            }
            ++ordinal;
        } while (next_combination(second, n_prime));
    } while (next_combination(first, N));

    const double ybar = population_ybar(pop);
    std::vector<ExactDistribution> out;
    out.reserve(ests.size());
    for (std::size_t e = 0; e < ests.size(); ++e) {
        out.push_back(summarize_exact(ests[e].id, std::move(values[e]), ybar));
    }
    return out;
}

ExactDistribution enumerate_two_phase(const FinitePopulation& pop, std::size_t n_prime, std::size_t n,
                                      const TwoPhaseEstimator& est, std::string id) {
    const NamedTwoPhaseEstimator named{std::move(id), est};
    return std::move(enumerate_two_phase(pop, n_prime, n, std::span(&named, 1)).front());
}

std::vector<EmpiricalStats> monte_carlo(const FinitePopulation& pop, std::size_t n,
                                        std::span<const NamedEstimator> ests, std::uint64_t reps,
                                        std::uint64_t seed, unsigned threads) {
    const std::size_t N = pop.size();
    check_sizes(N, n);
    check_reps(reps);
    const std::size_t width = ests.size();
    const auto values = run_replicates(reps, width, threads, [&](std::uint64_t r, std::span<double> out) {
        SplitMix64 rng(substream_seed(seed, r));
        std::vector<std::size_t> pool(N);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        draw_subset(rng, pool, n);
        std::vector<Unit> units(n);
        for (std::size_t i = 0; i < n; ++i) units[i] = pop[pool[i]];
        const Sample s(std::move(units));
        for (std::size_t e = 0; e < width; ++e) {
            try {
                out[e] = ests[e].fn(s);
            } catch (const Error& err) {
                rethrow_estimator_error(ests[e].id, "replicate " + std::to_string(r), err, r);
            }
        }
    });

    const double ybar = population_ybar(pop);
    std::vector<EmpiricalStats> out;
    for (std::size_t e = 0; e < width; ++e) {
        out.push_back(summarize_empirical(ests[e].id, values, width, e, reps, seed, ybar));
    }
    return out;
}

EmpiricalStats monte_carlo(const FinitePopulation& pop, std::size_t n, const SampleEstimator& est,
                           std::uint64_t reps, std::uint64_t seed, unsigned threads, std::string id) {
    const NamedEstimator named{std::move(id), est};
    return std::move(monte_carlo(pop, n, std::span(&named, 1), reps, seed, threads).front());
}

std::vector<EmpiricalStats> monte_carlo_two_phase(const FinitePopulation& pop, std::size_t n_prime,
                                                  std::size_t n, std::span<const NamedTwoPhaseEstimator> ests,
                                                  std::uint64_t reps, std::uint64_t seed, unsigned threads) {
    const std::size_t N = pop.size();
    check_sizes(N, n, n_prime);
    check_reps(reps);
    const std::size_t width = ests.size();
    const auto values = run_replicates(reps, width, threads, [&](std::uint64_t r, std::span<double> out) {
        SplitMix64 rng(substream_seed(seed, r));
        std::vector<std::size_t> pool(N);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        draw_subset(rng, pool, n_prime);
        std::vector<std::size_t> first(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_prime));
        std::vector<double> first_x(n_prime);
        for (std::size_t i = 0; i < n_prime; ++i) first_x[i] = pop[first[i]].x;
        draw_subset(rng, first, n);
        std::vector<Unit> units(n);
        for (std::size_t i = 0; i < n; ++i) units[i] = pop[first[i]];
        const TwoPhaseSample s(std::move(first_x), Sample(std::move(units)));
        for (std::size_t e = 0; e < width; ++e) {
            try {
                out[e] = ests[e].fn(s);
            } catch (const Error& err) {
                rethrow_estimator_error(ests[e].id, "replicate " + std::to_string(r), err, r);
            }
        }
    });

    const double ybar = population_ybar(pop);
    std::vector<EmpiricalStats> out;
    for (std::size_t e = 0; e < width; ++e) {
        out.push_back(summarize_empirical(ests[e].id, values, width, e, reps, seed, ybar));
    }
    return out;
}

namespace {

ReportRow make_row(const std::string& id, const BiasMse& analytic, double truth_bias, double truth_mse,
                   double se_bias, double se_mse, const Tolerance& tol) {
    ReportRow row;
    row.estimator_id = id;
    row.analytic_bias = analytic.bias;
    row.analytic_mse = analytic.mse;
    row.truth_bias = truth_bias;
    row.truth_mse = truth_mse;
    row.stderr_bias = se_bias;
    row.stderr_mse = se_mse;
    row.diff_bias = analytic.bias - truth_bias;
    row.diff_mse = analytic.mse - truth_mse;
    row.pass_bias = std::abs(row.diff_bias) <= tol.bias * std::sqrt(truth_mse) + 4.0 * se_bias;
    row.pass_mse = std::abs(row.diff_mse) <= tol.mse * truth_mse + 4.0 * se_mse;
    row.pass = row.pass_bias && row.pass_mse;
    row.pre_analytic = std::nan("");
    row.pre_empirical = std::nan("");
    return row;
}

}  // namespace

ReportRow compare(const BiasMse& analytic, const ExactDistribution& truth, const Tolerance& tol) {
    return make_row(truth.estimator_id, analytic, truth.exact_bias, truth.exact_mse, 0.0, 0.0, tol);
}

ReportRow compare(const BiasMse& analytic, const EmpiricalStats& truth, const Tolerance& tol) {
    return make_row(truth.estimator_id, analytic, truth.emp_bias, truth.emp_mse, truth.stderr_bias,
                    truth.stderr_mse, tol);
}

bool same_row(const ReportRow& a, const ReportRow& b) noexcept {
    return a.estimator_id == b.estimator_id && same_double(a.analytic_bias, b.analytic_bias) &&
           same_double(a.analytic_mse, b.analytic_mse) && same_double(a.truth_bias, b.truth_bias) &&
           same_double(a.truth_mse, b.truth_mse) && same_double(a.stderr_bias, b.stderr_bias) &&
           same_double(a.stderr_mse, b.stderr_mse) && same_double(a.diff_bias, b.diff_bias) &&
           same_double(a.diff_mse, b.diff_mse) && same_double(a.pre_analytic, b.pre_analytic) &&
           same_double(a.pre_empirical, b.pre_empirical) && a.pass_bias == b.pass_bias &&
           a.pass_mse == b.pass_mse && a.pass == b.pass;
}

bool VerificationReport::all_pass() const noexcept {
    return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
}

bool operator==(const VerificationReport& a, const VerificationReport& b) {
    if (a.mode != b.mode || a.N != b.N || a.n != b.n || a.n_prime != b.n_prime || a.reps != b.reps ||
        a.seed != b.seed || a.tol.bias != b.tol.bias || a.tol.mse != b.tol.mse || a.weights != b.weights ||
        a.rows.size() != b.rows.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        if (!same_row(a.rows[i], b.rows[i])) return false;
    }
    return true;
}

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Mean: return "mean";
        case EstimatorKind::Ratio: return "ratio";
        case EstimatorKind::ExpRatio: return "exp";
        case EstimatorKind::T1: return "t1";
        case EstimatorKind::T2: return "t2";
        case EstimatorKind::Tp: return "tp";
        case EstimatorKind::T1d: return "t1d";
        case EstimatorKind::T2d: return "t2d";
        case EstimatorKind::Tpd: return "tpd";
    }
    return "unknown";
}

std::optional<EstimatorKind> parse_estimator_kind(std::string_view name) {
    for (auto kind : {EstimatorKind::Mean, EstimatorKind::Ratio, EstimatorKind::ExpRatio, EstimatorKind::T1,
                      EstimatorKind::T2, EstimatorKind::Tp, EstimatorKind::T1d, EstimatorKind::T2d,
                      EstimatorKind::Tpd}) {
        if (to_string(kind) == name) return kind;
    }
    return std::nullopt;
}

bool is_two_phase(EstimatorKind kind) noexcept {
    return kind == EstimatorKind::T1d || kind == EstimatorKind::T2d || kind == EstimatorKind::Tpd;
}

namespace {

FamilyConfig ratio_config() {
    FamilyConfig c;
    c.K1 = 1.0;
    c.K2 = 1;
    c.K3 = 0.0;
    c.alpha = 1.0;
    return c;
}

struct PlannedEstimator {
    EstimatorKind kind;
    BiasMse analytic;
};

}  // namespace

VerificationReport run_verification(const FinitePopulation& pop, const VerificationPlan& plan) {
    if (plan.estimators.empty()) throw Error(ErrorCode::InvalidConfig, "no estimators requested");
    const bool two_phase = plan.n_prime.has_value();
    for (auto kind : plan.estimators) {
        if (kind != EstimatorKind::Mean && is_two_phase(kind) != two_phase) {
            throw Error(ErrorCode::InvalidConfig,
                        "estimator '" + to_string(kind) +
                            (two_phase ? "' is single-phase but n' was given" : "' needs a first-phase size n'"));
        }
    }

    const auto moments = compute_moments(pop);
    const auto factors = finite_factors(pop.size(), plan.n, plan.n_prime);
    const auto in = make_theory_input(moments, factors, plan.cfg);
    const bool combined = std::any_of(plan.estimators.begin(), plan.estimators.end(), [](EstimatorKind k) {
        return k == EstimatorKind::Tp || k == EstimatorKind::Tpd;
    });
    WeightSolution weights;
    if (combined) weights = two_phase ? solve_weights_two_phase(in) : solve_weights(in);

    // The sample mean always goes first: it is the PRE baseline.
    std::vector<EstimatorKind> kinds{EstimatorKind::Mean};
    for (auto kind : plan.estimators) {
        if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) kinds.push_back(kind);
    }
    const bool mean_requested =
        std::find(plan.estimators.begin(), plan.estimators.end(), EstimatorKind::Mean) != plan.estimators.end();

    const double Xbar = moments.Xbar;
    const FamilyConfig cfg = plan.cfg;
    std::vector<BiasMse> analytic;
    std::vector<NamedEstimator> single;
    std::vector<NamedTwoPhaseEstimator> nested;
    for (auto kind : kinds) {
        const auto id = to_string(kind);
        switch (kind) {
            case EstimatorKind::Mean:
                analytic.push_back(theory_mean(moments, factors));
                single.push_back({id, [](const Sample& s) { return est_mean(s); }});
                nested.push_back({id, [](const TwoPhaseSample& s) { return est_mean(s); }});
                break;
            case EstimatorKind::Ratio:
                analytic.push_back(theory_t1(make_theory_input(moments, factors, ratio_config())));
                single.push_back({id, [Xbar](const Sample& s) { return est_ratio(s, Xbar); }});
                break;
            case EstimatorKind::ExpRatio:
                analytic.push_back(theory_exp_ratio(moments, factors));
                single.push_back({id, [Xbar](const Sample& s) { return est_exp_ratio(s, Xbar); }});
                break;
            case EstimatorKind::T1:
                analytic.push_back(theory_t1(in));
                single.push_back({id, [Xbar, cfg](const Sample& s) { return est_t1(s, Xbar, cfg); }});
                break;
            case EstimatorKind::T2:
                analytic.push_back(theory_t2(in));
                single.push_back({id, [Xbar, cfg](const Sample& s) { return est_t2(s, Xbar, cfg); }});
                break;
            case EstimatorKind::Tp:
                analytic.push_back(theory_tp(in, weights));
                single.push_back(
                    {id, [Xbar, cfg, weights](const Sample& s) { return est_tp(s, Xbar, cfg, weights); }});
                break;
            case EstimatorKind::T1d:
                analytic.push_back(theory_t1d(in));
                nested.push_back({id, [cfg](const TwoPhaseSample& s) { return est_t1d(s, cfg); }});
                break;
            case EstimatorKind::T2d:
                analytic.push_back(theory_t2d(in));
                nested.push_back({id, [cfg](const TwoPhaseSample& s) { return est_t2d(s, cfg); }});
                break;
            case EstimatorKind::Tpd:
                analytic.push_back(theory_tpd(in, weights));
                nested.push_back({id, [cfg, weights](const TwoPhaseSample& s) { return est_tpd(s, cfg, weights); }});
                break;
        }
    }

    VerificationReport report;
    report.mode = plan.mode == TruthMode::Enumerate ? "enumerate" : "mc";
    report.N = pop.size();
    report.n = plan.n;
    report.n_prime = plan.n_prime;
    report.tol = plan.tol;
    if (combined) report.weights.assign(weights.w.begin(), weights.w.end());

    std::vector<ReportRow> rows;
    if (plan.mode == TruthMode::Enumerate) {
        const auto truth = two_phase ? enumerate_two_phase(pop, *plan.n_prime, plan.n, nested)
                                     : enumerate_srswor(pop, plan.n, single);
        for (std::size_t i = 0; i < truth.size(); ++i) rows.push_back(compare(analytic[i], truth[i], plan.tol));
    } else {
        report.reps = plan.reps;
        report.seed = plan.seed;
        const auto truth = two_phase
                               ? monte_carlo_two_phase(pop, *plan.n_prime, plan.n, nested, plan.reps, plan.seed,
                                                       plan.threads)
                               : monte_carlo(pop, plan.n, single, plan.reps, plan.seed, plan.threads);
        for (std::size_t i = 0; i < truth.size(); ++i) rows.push_back(compare(analytic[i], truth[i], plan.tol));
    }

    const double base_analytic = rows.front().analytic_mse;
    const double base_truth = rows.front().truth_mse;
    for (auto& row : rows) {
        if (row.analytic_mse > 0.0) row.pre_analytic = pre_percent(base_analytic, row.analytic_mse);
        if (row.truth_mse > 0.0) row.pre_empirical = pre_percent(base_truth, row.truth_mse);
    }
    if (!mean_requested) rows.erase(rows.begin());

    // Report rows follow the requested order.
    for (auto kind : plan.estimators) {
        const auto id = to_string(kind);
        auto it = std::find_if(rows.begin(), rows.end(), [&](const ReportRow& r) { return r.estimator_id == id; });
        if (it != rows.end() &&
            std::none_of(report.rows.begin(), report.rows.end(),
                         [&](const ReportRow& r) { return r.estimator_id == id; })) {
            report.rows.push_back(*it);
        }
    }
    return report;
}

namespace {

AnnihilationReport assess(std::vector<AnnihilationRow> rows, double ybar) {
    AnnihilationReport rep;
    double max_n = 0.0;
    for (const auto& r : rows) {
        rep.max_scaled_member = std::max(rep.max_scaled_member, std::abs(r.scaled_member));
        rep.max_scaled_combined = std::max(rep.max_scaled_combined, std::abs(r.scaled_combined));
        max_n = std::max(max_n, static_cast<double>(r.n));
    }
    const double rounding_floor = 1e-12 * std::abs(ybar) * max_n;
    rep.ratio_ok = rep.max_scaled_combined <= 0.2 * rep.max_scaled_member ||
                   (rep.max_scaled_combined <= rounding_floor && rep.max_scaled_member <= rounding_floor);
    rep.trend_ok = true;
    const double noise = 0.05 * rep.max_scaled_member + rounding_floor;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (std::abs(rows[k].scaled_combined) > 1.1 * std::abs(rows[k - 1].scaled_combined) + noise) {
            rep.trend_ok = false;
        }
    }
    rep.pass = rep.ratio_ok && rep.trend_ok;
    rep.rows = std::move(rows);
    return rep;
}

void check_grid(std::span<const std::size_t> grid, std::size_t min_points) {
    if (grid.size() < min_points) {
        throw Error(ErrorCode::InvalidSizes, "n grid needs at least " + std::to_string(min_points) + " points");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (grid[i] <= grid[i - 1]) throw Error(ErrorCode::InvalidSizes, "n grid must be strictly increasing");
    }
}

}  // namespace

AnnihilationReport bias_annihilation_check(const FinitePopulation& pop, const FamilyConfig& cfg,
                                           std::span<const std::size_t> n_grid) {
    check_grid(n_grid, 3);
    const auto moments = compute_moments(pop);
    const double Xbar = moments.Xbar;
    std::vector<AnnihilationRow> rows;
    for (std::size_t n : n_grid) {
        const auto in = make_theory_input(moments, finite_factors(pop.size(), n), cfg);
        AnnihilationRow row;
        row.n = n;
        row.weights = solve_weights(in);
        const auto w = row.weights;
        const std::vector<NamedEstimator> ests{
            {"t1", [Xbar, cfg](const Sample& s) { return est_t1(s, Xbar, cfg); }},
            {"tp", [Xbar, cfg, w](const Sample& s) { return est_tp(s, Xbar, cfg, w); }},
        };
        const auto truth = enumerate_srswor(pop, n, ests);
        row.bias_member = truth[0].exact_bias;
        row.bias_combined = truth[1].exact_bias;
        row.scaled_member = static_cast<double>(n) * row.bias_member;
        row.scaled_combined = static_cast<double>(n) * row.bias_combined;
        rows.push_back(row);
    }
    return assess(std::move(rows), moments.Ybar);
}

AnnihilationReport bias_annihilation_check_two_phase(const FinitePopulation& pop, const FamilyConfig& cfg,
                                                     std::size_t n_prime, std::span<const std::size_t> n_grid) {
    check_grid(n_grid, 2);
    const auto moments = compute_moments(pop);
    std::vector<AnnihilationRow> rows;
    for (std::size_t n : n_grid) {
        const auto in = make_theory_input(moments, finite_factors(pop.size(), n, n_prime), cfg);
        AnnihilationRow row;
        row.n = n;
        row.weights = solve_weights_two_phase(in);
        const auto h = row.weights;
        const std::vector<NamedTwoPhaseEstimator> ests{
            {"t1d", [cfg](const TwoPhaseSample& s) { return est_t1d(s, cfg); }},
            {"tpd", [cfg, h](const TwoPhaseSample& s) { return est_tpd(s, cfg, h); }},
        };
        const auto truth = enumerate_two_phase(pop, n_prime, n, ests);
        row.bias_member = truth[0].exact_bias;
        row.bias_combined = truth[1].exact_bias;
        row.scaled_member = static_cast<double>(n) * row.bias_member;
        row.scaled_combined = static_cast<double>(n) * row.bias_combined;
        rows.push_back(row);
    }
    return assess(std::move(rows), moments.Ybar);
}

}  // namespace surveykit
