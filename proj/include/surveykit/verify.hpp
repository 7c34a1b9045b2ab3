#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surveykit/estimators.hpp"
#include "surveykit/population.hpp"
#include "surveykit/theory.hpp"

namespace surveykit {

using SampleEstimator = std::function<double(const Sample&)>;
using TwoPhaseEstimator = std::function<double(const TwoPhaseSample&)>;

struct NamedEstimator {
    std::string id;
    SampleEstimator fn;
};

struct NamedTwoPhaseEstimator {
    std::string id;
    TwoPhaseEstimator fn;
};

inline constexpr std::uint64_t kMaxEnumeratedSamples = 10'000'000;

/// Exact sampling distribution of an estimator under SRSWOR (or nested
/// two-phase SRSWOR). Every sample has probability 1 / count.
struct ExactDistribution {
    std::string estimator_id;
    std::vector<double> estimates;
    std::uint64_t count = 0;
    double probability = 0.0;
    double mean_estimate = 0.0;
    double exact_bias = 0.0;
    double exact_mse = 0.0;
};

struct EmpiricalStats {
    std::string estimator_id;
    std::uint64_t reps = 0;
    double mean_estimate = 0.0;
    double emp_bias = 0.0;
    double emp_mse = 0.0;
    double stderr_bias = 0.0;
    double stderr_mse = 0.0;
    std::uint64_t seed = 0;

    friend bool operator==(const EmpiricalStats&, const EmpiricalStats&) = default;
};

// Enumeration visits subsets in lexicographic order of unit indices; an
// estimator failure is rethrown as EstimatorError naming the index set, with
// the sample's ordinal as the error index.

[[nodiscard]] ExactDistribution enumerate_srswor(const FinitePopulation& pop, std::size_t n,
                                                 const SampleEstimator& est, std::string id = {});
[[nodiscard]] std::vector<ExactDistribution> enumerate_srswor(const FinitePopulation& pop, std::size_t n,
                                                              std::span<const NamedEstimator> ests);

[[nodiscard]] ExactDistribution enumerate_two_phase(const FinitePopulation& pop, std::size_t n_prime,
                                                    std::size_t n, const TwoPhaseEstimator& est,
                                                    std::string id = {});
[[nodiscard]] std::vector<ExactDistribution> enumerate_two_phase(const FinitePopulation& pop,
                                                                 std::size_t n_prime, std::size_t n,
                                                                 std::span<const NamedTwoPhaseEstimator> ests);

/// Seeded Monte Carlo. Replicate r draws its sample from a generator seeded
/// by (seed, r) and results are reduced in replicate order, so the output is
/// bit-identical for any `threads` (0 = hardware concurrency).
[[nodiscard]] EmpiricalStats monte_carlo(const FinitePopulation& pop, std::size_t n, const SampleEstimator& est,
                                         std::uint64_t reps, std::uint64_t seed, unsigned threads = 0,
                                         std::string id = {});
[[nodiscard]] std::vector<EmpiricalStats> monte_carlo(const FinitePopulation& pop, std::size_t n,
                                                      std::span<const NamedEstimator> ests, std::uint64_t reps,
                                                      std::uint64_t seed, unsigned threads = 0);
[[nodiscard]] std::vector<EmpiricalStats> monte_carlo_two_phase(const FinitePopulation& pop,
                                                                std::size_t n_prime, std::size_t n,
                                                                std::span<const NamedTwoPhaseEstimator> ests,
                                                                std::uint64_t reps, std::uint64_t seed,
                                                                unsigned threads = 0);

/// Bias tolerance is measured against the root MSE of the ground truth, MSE
/// tolerance relative to the ground-truth MSE. Monte Carlo comparisons add
/// four standard errors to both bands.
struct Tolerance {
    double bias = 0.15;
    double mse = 0.15;
};

struct ReportRow {
    std::string estimator_id;
    double analytic_bias = 0.0;
    double analytic_mse = 0.0;
    double truth_bias = 0.0;
    double truth_mse = 0.0;
    double stderr_bias = 0.0;
    double stderr_mse = 0.0;
    double diff_bias = 0.0;
    double diff_mse = 0.0;
    double pre_analytic = 0.0;
    double pre_empirical = 0.0;
    bool pass_bias = false;
    bool pass_mse = false;
    bool pass = false;
};

/// Field-wise equality that treats two NaNs as equal (undefined PREs are NaN).
[[nodiscard]] bool same_row(const ReportRow& a, const ReportRow& b) noexcept;

[[nodiscard]] ReportRow compare(const BiasMse& analytic, const ExactDistribution& truth, const Tolerance& tol);
[[nodiscard]] ReportRow compare(const BiasMse& analytic, const EmpiricalStats& truth, const Tolerance& tol);

enum class EstimatorKind { Mean, Ratio, ExpRatio, T1, T2, Tp, T1d, T2d, Tpd };

[[nodiscard]] std::string to_string(EstimatorKind kind);
[[nodiscard]] std::optional<EstimatorKind> parse_estimator_kind(std::string_view name);
[[nodiscard]] bool is_two_phase(EstimatorKind kind) noexcept;

enum class TruthMode { Enumerate, MonteCarlo };

struct VerificationPlan {
    std::size_t n = 0;
    std::optional<std::size_t> n_prime;
    FamilyConfig cfg;
    std::vector<EstimatorKind> estimators;
    TruthMode mode = TruthMode::Enumerate;
    std::uint64_t reps = 100'000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    Tolerance tol;
};

struct VerificationReport {
    std::string mode;
    std::size_t N = 0;
    std::size_t n = 0;
    std::optional<std::size_t> n_prime;
    std::uint64_t reps = 0;
    std::uint64_t seed = 0;
    Tolerance tol;
    std::vector<double> weights;
    std::vector<ReportRow> rows;

    [[nodiscard]] bool all_pass() const noexcept;
    friend bool operator==(const VerificationReport&, const VerificationReport&);
};

/// Analytic vs ground truth for each requested estimator. Combined
/// estimators use weights from the bias-cancelling solver. Two-phase kinds
/// require plan.n_prime; the sample mean is always evaluated as the PRE
/// baseline.
[[nodiscard]] VerificationReport run_verification(const FinitePopulation& pop, const VerificationPlan& plan);

struct AnnihilationRow {
    std::size_t n = 0;
    WeightSolution weights;
    double bias_member = 0.0;    // exact bias of t1 (t1d)
    double bias_combined = 0.0;  // exact bias of tp (tpd)
    double scaled_member = 0.0;  // n * bias_member
    double scaled_combined = 0.0;
};

struct AnnihilationReport {
    std::vector<AnnihilationRow> rows;
    double max_scaled_member = 0.0;
    double max_scaled_combined = 0.0;
    bool ratio_ok = false;
    bool trend_ok = false;
    bool pass = false;
};

/// Exact-enumeration check that the solved weights remove the O(1/n) bias:
/// passes iff max |n b_p| <= 0.2 max |n b_1| and |n b_p| does not grow along
/// the grid beyond 10% plus a noise floor of 5% of max |n b_1|. When both
/// sequences are at rounding level (below 1e-12 |Ybar| max n) the ratio test
/// is vacuous and counts as passed.
/// n_grid must be strictly increasing with at least 3 points.
[[nodiscard]] AnnihilationReport bias_annihilation_check(const FinitePopulation& pop, const FamilyConfig& cfg,
                                                         std::span<const std::size_t> n_grid);

/// Two-phase analog over second-phase sizes at a fixed n' (>= 2 grid points).
[[nodiscard]] AnnihilationReport bias_annihilation_check_two_phase(const FinitePopulation& pop,
                                                                   const FamilyConfig& cfg, std::size_t n_prime,
                                                                   std::span<const std::size_t> n_grid);

}  // namespace surveykit
