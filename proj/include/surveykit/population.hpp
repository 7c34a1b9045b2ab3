#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace surveykit {

/// One population (or sample) unit: study value y and auxiliary value x.
struct Unit {
    double y = 0.0;
    double x = 0.0;

    friend bool operator==(const Unit&, const Unit&) = default;
};

/// The N paired (y, x) values of a finite population. Immutable once built;
/// construction enforces N >= 3 and finite values.
class FinitePopulation {
public:
    explicit FinitePopulation(std::vector<Unit> units);

    [[nodiscard]] std::span<const Unit> units() const noexcept { return units_; }
    [[nodiscard]] std::size_t size() const noexcept { return units_.size(); }
    [[nodiscard]] const Unit& operator[](std::size_t i) const { return units_[i]; }

    friend bool operator==(const FinitePopulation&, const FinitePopulation&) = default;

private:
    std::vector<Unit> units_;
};

/// Population parameters. Second moments use divisor N - 1; beta2x uses the
/// divisor-N central moments m4 / m2^2.
struct PopulationMoments {
    double Ybar = 0.0;
    double Xbar = 0.0;
    double Sy2 = 0.0;
    double Sx2 = 0.0;
    double Syx = 0.0;
    double Cy = 0.0;
    double Cx = 0.0;
    double rho = 0.0;
    double Kx = 0.0;
    double beta2x = 0.0;
    std::size_t N = 0;

    [[nodiscard]] double Sy() const;
    [[nodiscard]] double Sx() const;
};

/// Finite-population correction factors for SRSWOR with sample size n and,
/// for two-phase designs, first-phase size n'. f2 and f3 exist only when n'
/// was supplied; asking for them otherwise throws InvalidSizes.
class FiniteFactors {
public:
    FiniteFactors(double f1, double f, double g,
                  std::optional<double> f2 = std::nullopt,
                  std::optional<double> f3 = std::nullopt);

    [[nodiscard]] double f1() const noexcept { return f1_; }
    [[nodiscard]] double f() const noexcept { return f_; }
    [[nodiscard]] double g() const noexcept { return g_; }
    [[nodiscard]] bool two_phase() const noexcept { return f2_.has_value(); }
    [[nodiscard]] double f2() const;
    [[nodiscard]] double f3() const;

private:
    double f1_;
    double f_;
    double g_;
    std::optional<double> f2_;
    std::optional<double> f3_;
};

struct SyntheticSpec {
    std::size_t N = 0;
    double target_rho = 0.0;
    double mean_y = 0.0;
    double mean_x = 0.0;
    double cv_y = 0.0;
    double cv_x = 0.0;
    std::uint64_t seed = 0;
};

/// Parses a CSV population. The header must name columns `y` and `x`
/// (case-insensitive, any order); other columns are ignored. Row indices in
/// errors count data rows from 1 (the header is row 0).
[[nodiscard]] FinitePopulation load_population(std::istream& in);
[[nodiscard]] FinitePopulation load_population(std::string_view csv);
[[nodiscard]] FinitePopulation load_population_file(const std::string& path);

/// Writes `y,x` with 17 significant digits so that loading reproduces every value.
void save_population(std::ostream& out, const FinitePopulation& pop);

[[nodiscard]] PopulationMoments compute_moments(const FinitePopulation& pop);

[[nodiscard]] FiniteFactors finite_factors(std::size_t N, std::size_t n,
                                           std::optional<std::size_t> n_prime = std::nullopt);

/// Bivariate-normal-style population with all x > 0 and realized correlation
/// within 0.1 of the target. Deterministic in the seed.
[[nodiscard]] FinitePopulation generate_synthetic(const SyntheticSpec& spec);

}  // namespace surveykit
