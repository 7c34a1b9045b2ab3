#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "surveykit/cli.hpp"
#include "surveykit/theory.hpp"

namespace surveykit::cli {

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Io:
        case ErrorCode::MissingColumn:
        case ErrorCode::NonNumericCell:
        case ErrorCode::TooFewRows:
            return kExitIo;
        case ErrorCode::DegenerateVariance:
        case ErrorCode::ZeroMean:
        case ErrorCode::TargetUnreachable:
        case ErrorCode::ZeroSampleMeanX:
        case ErrorCode::DegenerateDenominator:
        case ErrorCode::NonPositiveBase:
        case ErrorCode::SingularSystem:
        case ErrorCode::ZeroMse:
        case ErrorCode::EstimatorError:
            return kExitNumerical;
        case ErrorCode::InvalidSizes:
        case ErrorCode::InvalidSpec:
        case ErrorCode::InvalidConfig:
        case ErrorCode::WeightsNotNormalized:
        case ErrorCode::TooManySubsets:
        case ErrorCode::EmptyGrid:
            return kExitUsage;
    }
    return kExitUsage;
}

namespace {

struct AtomName {
    Atom atom;
    const char* name;
};

constexpr AtomName kAtoms[] = {
    {Atom::Unity, "unity"}, {Atom::Cx, "C_x"},   {Atom::Beta2x, "beta2_x"}, {Atom::Rho, "rho_yx"},
    {Atom::Sx, "S_x"},      {Atom::F, "f"},      {Atom::G, "g"},            {Atom::Kx, "K_x"},
    {Atom::N, "N"},         {Atom::SmallN, "n"}, {Atom::Xbar, "Xbar"},      {Atom::NXbar, "N_Xbar"},
};

std::string format6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string cell_text(const TableCell& c) { return c.number ? format6(*c.number) : c.text; }

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string signed_int(int v) { return v > 0 ? "+" + std::to_string(v) : std::to_string(v); }

}  // namespace

std::optional<Atom> parse_atom(std::string_view name) {
    for (const auto& a : kAtoms) {
        if (name == a.name) return a.atom;
    }
    if (name == "1") return Atom::Unity;
    return std::nullopt;
}

std::string atom_name(Atom atom) {
    for (const auto& a : kAtoms) {
        if (a.atom == atom) return a.name;
    }
    return "?";
}

double resolve_atom(Atom atom, const AtomContext& ctx) {
    const auto& m = ctx.moments;
    switch (atom) {
        case Atom::Unity: return 1.0;
        case Atom::Cx: return m.Cx;
        case Atom::Beta2x: return m.beta2x;
        case Atom::Rho: return m.rho;
        case Atom::Sx: return m.Sx();
        case Atom::F: return ctx.factors.f();
        case Atom::G: return ctx.factors.g();
        case Atom::Kx: return m.Kx;
        case Atom::N: return static_cast<double>(m.N);
        case Atom::SmallN: return static_cast<double>(ctx.n);
        case Atom::Xbar: return m.Xbar;
        case Atom::NXbar: return static_cast<double>(m.N) * m.Xbar;
    }
    return 0.0;
}

KValue parse_k_value(std::string_view text) {
    if (auto atom = parse_atom(text)) return *atom;
    try {
        std::size_t used = 0;
        const std::string s(text);
        const double v = std::stod(s, &used);
        if (used == s.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::InvalidConfig, "'" + std::string(text) + "' is neither a parameter atom nor a number");
}

std::string k_value_label(const KValue& k) {
    if (const auto* atom = std::get_if<Atom>(&k)) return atom_name(*atom);
    return format6(std::get<double>(k));
}

double resolve_k_value(const KValue& k, const AtomContext& ctx) {
    if (const auto* atom = std::get_if<Atom>(&k)) return resolve_atom(*atom, ctx);
    return std::get<double>(k);
}

GridSpec appendix_grid(char table) {
    using A = Atom;
    // Published row order; the t1 ratio-type table repeats its N rows where
    // the other two tables switch to n, and repeats are dropped.
    const std::vector<std::pair<A, A>> common_head{
        {A::Unity, A::Cx}, {A::Unity, A::Beta2x}, {A::Beta2x, A::Cx}, {A::Cx, A::Beta2x}, {A::Unity, A::Rho},
        {A::NXbar, A::Sx}, {A::NXbar, A::F},      {A::Beta2x, A::Kx}, {A::N, A::Kx},      {A::N, A::Unity},
        {A::N, A::Cx},     {A::N, A::Rho},        {A::N, A::Sx},      {A::N, A::F},       {A::N, A::G},
    };
    const std::vector<std::pair<A, A>> small_n_rows{
        {A::SmallN, A::Rho}, {A::SmallN, A::Sx}, {A::SmallN, A::F}, {A::SmallN, A::G}, {A::SmallN, A::Kx},
    };
    const std::vector<std::pair<A, A>> tail{
        {A::Beta2x, A::Xbar}, {A::NXbar, A::Xbar}, {A::N, A::Xbar}, {A::SmallN, A::Xbar}};

    GridSpec grid;
    std::vector<std::pair<A, A>> pairs = common_head;
    switch (table) {
        case 'a':
        case 'A':
            grid.family = Family::T1;
            grid.alpha = {1.0};
            break;
        case 'b':
        case 'B':
            grid.family = Family::T1;
            grid.alpha = {-1.0};
            pairs.insert(pairs.end(), small_n_rows.begin(), small_n_rows.end());
            break;
        case 'c':
        case 'C':
            grid.family = Family::T2;
            grid.beta = {-1.0};
            grid.lambda = {-1.0};
            grid.k2_values = {1};
            pairs.insert(pairs.end(), small_n_rows.begin(), small_n_rows.end());
            break;
        default:
            throw Error(ErrorCode::InvalidConfig, std::string("unknown member table '") + table + "'");
    }
    pairs.insert(pairs.end(), tail.begin(), tail.end());
    for (const auto& [first, second] : pairs) grid.rows.emplace_back(first, second);
    return grid;
}

std::vector<std::pair<KValue, KValue>> cartesian_rows(const std::vector<KValue>& first,
                                                      const std::vector<KValue>& second) {
    std::vector<std::pair<KValue, KValue>> rows;
    for (const auto& a : first) {
        for (const auto& b : second) rows.emplace_back(a, b);
    }
    return rows;
}

std::optional<Format> parse_format(std::string_view name) {
    if (name == "csv") return Format::Csv;
    if (name == "markdown" || name == "md") return Format::Markdown;
    if (name == "json") return Format::Json;
    return std::nullopt;
}

nlohmann::json table_to_json(const Table& table) {
    auto rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t i = 0; i < row.size() && i < table.headers.size(); ++i) {
            if (row[i].number) {
                obj[table.headers[i]] = *row[i].number;
            } else {
                obj[table.headers[i]] = row[i].text;
            }
        }
        rows.push_back(std::move(obj));
    }
    return rows;
}

void render(std::ostream& out, const Table& table, Format format) {
    switch (format) {
        case Format::Json:
            out << table_to_json(table).dump(2) << '\n';
            return;
        case Format::Csv:
            for (std::size_t i = 0; i < table.headers.size(); ++i) {
                out << (i ? "," : "") << csv_escape(table.headers[i]);
            }
            out << '\n';
            for (const auto& row : table.rows) {
                for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(cell_text(row[i]));
                out << '\n';
            }
            return;
        case Format::Markdown:
            out << '|';
            for (const auto& h : table.headers) out << ' ' << h << " |";
            out << "\n|";
            for (std::size_t i = 0; i < table.headers.size(); ++i) out << " --- |";
            out << '\n';
            for (const auto& row : table.rows) {
                out << '|';
                for (const auto& c : row) out << ' ' << cell_text(c) << " |";
                out << '\n';
            }
            return;
    }
}

Table members_table(const AtomContext& ctx, const GridSpec& grid) {
    const bool t1 = grid.family == Family::T1;
    if (grid.rows.empty() || (t1 && (grid.alpha.empty() || grid.k2_values.empty())) ||
        (!t1 && (grid.beta.empty() || grid.lambda.empty()))) {
        throw Error(ErrorCode::EmptyGrid, "member grid has no rows or no columns");
    }

    struct Column {
        double e1;  // alpha, or beta
        double e2;  // unused, or lambda
        int k2;
    };
    std::vector<Column> columns;
    Table table;
    table.headers = t1 ? std::vector<std::string>{"K1", "K3"} : std::vector<std::string>{"K4", "K5"};
    if (t1) {
        for (double a : grid.alpha) {
            for (int k2 : grid.k2_values) {
                columns.push_back({a, 0.0, k2});
                table.headers.push_back(grid.alpha.size() == 1 ? "PRE K2=" + signed_int(k2)
                                                               : "PRE alpha=" + format6(a) + " K2=" + signed_int(k2));
            }
        }
    } else {
        for (double b : grid.beta) {
            for (double l : grid.lambda) {
                columns.push_back({b, l, 1});
                table.headers.push_back("PRE (beta=" + format6(b) + ", lambda=" + format6(l) + ")");
            }
        }
    }

    const auto& m = ctx.moments;
    const double base = theory_mean(m, ctx.factors).mse;
    for (const auto& [first, second] : grid.rows) {
        std::vector<TableCell> row{TableCell::str(k_value_label(first)), TableCell::str(k_value_label(second))};
        const double c1 = resolve_k_value(first, ctx);
        const double c2 = resolve_k_value(second, ctx);
        for (const auto& col : columns) {
            FamilyConfig cfg;
            double bracket;
            if (t1) {
                cfg.K1 = c1;
                cfg.K3 = c2;
                cfg.K2 = col.k2;
                cfg.alpha = col.e1;
                bracket = c1 * m.Xbar + col.k2 * c2;
            } else {
                cfg.K4 = c1;
                cfg.K5 = c2;
                cfg.beta = col.e1;
                cfg.lambda = col.e2;
                bracket = c1 * m.Xbar + c2;
            }
            if (bracket == 0.0) {
                row.push_back(TableCell::str("n/a(degenerate)"));
                continue;
            }
            if (bracket < 0.0) {
                row.push_back(TableCell::str("n/a(nonpositive)"));
                continue;
            }
            const auto in = make_theory_input(m, ctx.factors, cfg);
            const double mse = t1 ? theory_t1(in).mse : theory_t2(in).mse;
            if (!(mse > 0.0)) {
                row.push_back(TableCell::str("n/a(zero-mse)"));
                continue;
            }
            row.push_back(TableCell::num(pre_percent(base, mse)));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace surveykit::cli
