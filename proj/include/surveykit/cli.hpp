#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "surveykit/error.hpp"
#include "surveykit/population.hpp"
#include "surveykit/verify.hpp"

namespace surveykit::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitIo = 2,
    kExitNumerical = 3,
    kExitVerifyFailed = 4,
};

[[nodiscard]] int exit_code_for(ErrorCode code) noexcept;

/// Known population parameters usable as K constants.
enum class Atom { Unity, Cx, Beta2x, Rho, Sx, F, G, Kx, N, SmallN, Xbar, NXbar };

[[nodiscard]] std::optional<Atom> parse_atom(std::string_view name);
[[nodiscard]] std::string atom_name(Atom atom);

struct AtomContext {
    PopulationMoments moments;
    FiniteFactors factors;
    std::size_t n = 0;
};

[[nodiscard]] double resolve_atom(Atom atom, const AtomContext& ctx);

/// A K constant as given on the command line: an atom name or a literal.
using KValue = std::variant<Atom, double>;

/// Throws InvalidConfig for text that is neither an atom nor a number.
[[nodiscard]] KValue parse_k_value(std::string_view text);
[[nodiscard]] std::string k_value_label(const KValue& k);
[[nodiscard]] double resolve_k_value(const KValue& k, const AtomContext& ctx);

enum class Family { T1, T2 };

/// Family-member grid: rows of (K1, K3) pairs for t1 or (K4, K5) for t2,
/// one column per (exponent, K2) combination.
struct GridSpec {
    Family family = Family::T1;
    std::vector<std::pair<KValue, KValue>> rows;
    std::vector<int> k2_values{1, -1};
    std::vector<double> alpha{1.0};
    std::vector<double> beta{-1.0};
    std::vector<double> lambda{-1.0};
};

/// Row structure of the published member tables: 'a' ratio-type t1
/// (alpha = 1), 'b' product-type t1 (alpha = -1), 'c' t2 with beta = lambda = -1.
/// Repeated rows are dropped.
[[nodiscard]] GridSpec appendix_grid(char table);

/// Cartesian product of first-constant and second-constant atom lists.
[[nodiscard]] std::vector<std::pair<KValue, KValue>> cartesian_rows(const std::vector<KValue>& first,
                                                                    const std::vector<KValue>& second);

struct TableCell {
    std::optional<double> number;
    std::string text;

    static TableCell num(double v) { return {v, {}}; }
    static TableCell str(std::string s) { return {std::nullopt, std::move(s)}; }
};

struct Table {
    std::vector<std::string> headers;
    std::vector<std::vector<TableCell>> rows;
};

enum class Format { Csv, Markdown, Json };

[[nodiscard]] std::optional<Format> parse_format(std::string_view name);

/// csv/markdown print numbers with 6 significant digits; json keeps full
/// precision and renders the table as an array of header-keyed objects.
void render(std::ostream& out, const Table& table, Format format);
[[nodiscard]] nlohmann::json table_to_json(const Table& table);

/// Analytic PRE of every grid member against the sample mean. Cells that
/// violate a denominator or base precondition hold "n/a(degenerate)" or
/// "n/a(nonpositive)" instead of a number. Throws EmptyGrid.
[[nodiscard]] Table members_table(const AtomContext& ctx, const GridSpec& grid);

[[nodiscard]] nlohmann::json report_to_json(const VerificationReport& report);
[[nodiscard]] VerificationReport report_from_json(const nlohmann::json& j);
[[nodiscard]] Table report_table(const VerificationReport& report);

/// Entry point shared by the executable and the tests. args excludes argv[0].
[[nodiscard]] int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace surveykit::cli
