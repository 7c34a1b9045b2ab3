#include "surveykit/population.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "surveykit/error.hpp"
#include "surveykit/numeric.hpp"

namespace surveykit {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::optional<double> parse_number(std::string_view cell) {
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

bool all_equal(std::span<const Unit> units, double Unit::*field) {
    return std::all_of(units.begin(), units.end(),
                       [&](const Unit& u) { return u.*field == units.front().*field; });
}

}  // namespace

FinitePopulation::FinitePopulation(std::vector<Unit> units) : units_(std::move(units)) {
    if (units_.size() < 3) {
        throw Error(ErrorCode::TooFewRows,
                    "a population needs at least 3 units, got " + std::to_string(units_.size()));
    }
    for (std::size_t i = 0; i < units_.size(); ++i) {
        if (!std::isfinite(units_[i].y) || !std::isfinite(units_[i].x)) {
            throw Error(ErrorCode::NonNumericCell, "non-finite value in unit " + std::to_string(i), i);
        }
    }
}

double PopulationMoments::Sy() const { return std::sqrt(Sy2); }
double PopulationMoments::Sx() const { return std::sqrt(Sx2); }

FiniteFactors::FiniteFactors(double f1, double f, double g, std::optional<double> f2,
                             std::optional<double> f3)
    : f1_(f1), f_(f), g_(g), f2_(f2), f3_(f3) {
    if (f2_.has_value() != f3_.has_value()) {
        throw Error(ErrorCode::InvalidSizes, "f2 and f3 must be given together");
    }
}

double FiniteFactors::f2() const {
    if (!f2_) throw Error(ErrorCode::InvalidSizes, "f2 requires a first-phase size n'");
    return *f2_;
}

double FiniteFactors::f3() const {
    if (!f3_) throw Error(ErrorCode::InvalidSizes, "f3 requires a first-phase size n'");
    return *f3_;
}

FinitePopulation load_population(std::istream& in) {
    std::string line;
    std::size_t y_col = 0;
    std::size_t x_col = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        std::string_view view = line;
        if (view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
        if (trim(view).empty()) continue;
        const auto cells = split_commas(view);
        std::optional<std::size_t> y, x;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto name = lower(cells[i]);
            if (name == "y" && !y) y = i;
            if (name == "x" && !x) x = i;
        }
        if (!y || !x) {
            throw Error(ErrorCode::MissingColumn,
                        std::string("header must name columns y and x, missing ") + (!y ? "y" : "x"));
        }
        y_col = *y;
        x_col = *x;
        have_header = true;
        break;
    }
    if (!have_header) throw Error(ErrorCode::MissingColumn, "empty input, no header row");

    std::vector<Unit> units;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto cells = split_commas(line);
        const auto need = std::max(y_col, x_col);
        if (cells.size() <= need) {
            throw Error(ErrorCode::NonNumericCell, "row " + std::to_string(row) + " has too few cells", row);
        }
        const auto y = parse_number(cells[y_col]);
        const auto x = parse_number(cells[x_col]);
        if (!y || !x) {
            throw Error(ErrorCode::NonNumericCell,
                        "row " + std::to_string(row) + ": '" + std::string(!y ? cells[y_col] : cells[x_col]) +
                            "' is not a finite number",
                        row);
        }
        units.push_back({*y, *x});
    }
    if (units.size() < 3) {
        throw Error(ErrorCode::TooFewRows, "need at least 3 data rows, got " + std::to_string(units.size()));
    }
    return FinitePopulation(std::move(units));
}

FinitePopulation load_population(std::string_view csv) {
    std::istringstream in{std::string(csv)};
    return load_population(in);
}

FinitePopulation load_population_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open population file '" + path + "'");
    return load_population(in);
}

void save_population(std::ostream& out, const FinitePopulation& pop) {
    const auto old_precision = out.precision(17);
    out << "y,x\n";
    for (const auto& u : pop.units()) out << u.y << ',' << u.x << '\n';
    out.precision(old_precision);
}

PopulationMoments compute_moments(const FinitePopulation& pop) {
    const auto units = pop.units();
    if (all_equal(units, &Unit::x)) throw Error(ErrorCode::DegenerateVariance, "all x values are identical");
    if (all_equal(units, &Unit::y)) throw Error(ErrorCode::DegenerateVariance, "all y values are identical");

    const auto N = units.size();
    const double dN = static_cast<double>(N);
    CompensatedSum sy, sx;
    for (const auto& u : units) {
        sy.add(u.y);
        sx.add(u.x);
    }
    PopulationMoments m;
    m.N = N;
    m.Ybar = sy.value() / dN;
    m.Xbar = sx.value() / dN;
    if (m.Ybar == 0.0 || m.Xbar == 0.0) {
        throw Error(ErrorCode::ZeroMean, "population mean of y or x is zero");
    }

    CompensatedSum syy, sxx, syx, m4;
    for (const auto& u : units) {
        const double dy = u.y - m.Ybar;
        const double dx = u.x - m.Xbar;
        syy.add(dy * dy);
        sxx.add(dx * dx);
        syx.add(dy * dx);
        m4.add(dx * dx * dx * dx);
    }
    m.Sy2 = syy.value() / (dN - 1.0);
    m.Sx2 = sxx.value() / (dN - 1.0);
    m.Syx = syx.value() / (dN - 1.0);
    m.Cy = std::sqrt(m.Sy2) / m.Ybar;
    m.Cx = std::sqrt(m.Sx2) / m.Xbar;
    m.rho = m.Syx / std::sqrt(m.Sy2 * m.Sx2);
    m.Kx = m.rho * m.Cy / m.Cx;
    const double central2 = sxx.value() / dN;
    m.beta2x = (m4.value() / dN) / (central2 * central2);
    return m;
}

FiniteFactors finite_factors(std::size_t N, std::size_t n, std::optional<std::size_t> n_prime) {
    if (n < 2 || n > N) {
        throw Error(ErrorCode::InvalidSizes,
                    "need 2 <= n <= N, got n=" + std::to_string(n) + ", N=" + std::to_string(N));
    }
    const double dN = static_cast<double>(N);
    const double dn = static_cast<double>(n);
    const double f = dn / dN;
    if (!n_prime) return FiniteFactors(1.0 / dn - 1.0 / dN, f, 1.0 - f);

    if (*n_prime < n || *n_prime > N) {
        throw Error(ErrorCode::InvalidSizes, "need n <= n' <= N, got n=" + std::to_string(n) +
                                                 ", n'=" + std::to_string(*n_prime) + ", N=" + std::to_string(N));
    }
    const double dnp = static_cast<double>(*n_prime);
    const double f2 = 1.0 / dnp - 1.0 / dN;
    const double f3 = 1.0 / dn - 1.0 / dnp;
    return FiniteFactors(f2 + f3, f, 1.0 - f, f2, f3);
}

FinitePopulation generate_synthetic(const SyntheticSpec& spec) {
    if (spec.N < 10) throw Error(ErrorCode::InvalidSpec, "synthetic populations need N >= 10");
    if (!(std::abs(spec.target_rho) < 1.0)) throw Error(ErrorCode::InvalidSpec, "target_rho must lie in (-1, 1)");
    if (!(spec.mean_y > 0.0) || !(spec.mean_x > 0.0)) {
        throw Error(ErrorCode::InvalidSpec, "mean_y and mean_x must be positive");
    }
    // x = mean_x (1 + cv_x z): keeping cv_x <= 1/4 puts x <= 0 four sigma out.
    if (!(spec.cv_y > 0.0 && spec.cv_y <= 0.25) || !(spec.cv_x > 0.0 && spec.cv_x <= 0.25)) {
        throw Error(ErrorCode::InvalidSpec, "cv_y and cv_x must lie in (0, 0.25]");
    }

    constexpr int kMaxAttempts = 100;
    const double resid = std::sqrt(1.0 - spec.target_rho * spec.target_rho);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        std::mt19937_64 eng(substream_seed(spec.seed, static_cast<std::uint64_t>(attempt)));
        auto normal_pair = [&eng]() {
            const double u1 = 1.0 - uniform01(eng);  // (0, 1]
            const double u2 = uniform01(eng);
            const double r = std::sqrt(-2.0 * std::log(u1));
            constexpr double two_pi = 6.283185307179586;
            return std::pair{r * std::cos(two_pi * u2), r * std::sin(two_pi * u2)};
        };
        std::vector<Unit> units(spec.N);
        bool positive = true;
        for (auto& u : units) {
            const auto [z1, z2] = normal_pair();
            u.x = spec.mean_x * (1.0 + spec.cv_x * z1);
            u.y = spec.mean_y * (1.0 + spec.cv_y * (spec.target_rho * z1 + resid * z2));
            positive = positive && u.x > 0.0;
        }
        if (!positive) continue;
        FinitePopulation pop(std::move(units));
        const auto m = compute_moments(pop);
        if (std::abs(m.rho - spec.target_rho) <= 0.1) return pop;
    }
    throw Error(ErrorCode::TargetUnreachable,
                "no population within 0.1 of target correlation after " + std::to_string(kMaxAttempts) + " draws");
}

}  // namespace surveykit
