#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "surveykit/cli.hpp"
#include "surveykit/theory.hpp"
#include "surveykit/weights.hpp"

namespace surveykit::cli {

namespace {

using nlohmann::json;

struct RunConfig {
    std::string pop_path;
    std::string synthetic;
    std::size_t n = 0;
    std::size_t n_prime = 0;
    double alpha = 1.0, beta = 1.0, lambda = 0.0;
    double m = 1.0, q = 1.0, gamma = 0.0;
    std::string k1 = "unity", k2 = "+1", k3 = "0", k4 = "unity", k5 = "0";
    std::string mode = "analytic";
    std::uint64_t reps = 100'000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string format = "markdown";
    double tol_bias = 0.15, tol_mse = 0.15;
    std::string out;
    std::string config;
    std::vector<std::string> estimators;
    // members
    std::string table;
    std::string family = "t1";
    std::vector<std::string> k1_atoms, k3_atoms, k4_atoms, k5_atoms, k2_values;
    // generate
    std::size_t gen_N = 0;
    double rho = 0.0, mean_y = 0.0, mean_x = 0.0, cv_y = 0.0, cv_x = 0.0;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Parsed {
    CLI::App* sub = nullptr;
    std::set<std::string> given;  // long names without dashes
};

// One option registry per parse. Subcommands share the RunConfig.
class Parser {
public:
    explicit Parser(RunConfig& cfg) : app_("surveykit", "surveykit") {
        app_.require_subcommand(1);
        app_.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

        auto* params = app_.add_subcommand("params", "Print population parameters and correction factors");
        auto* members = app_.add_subcommand("members", "Analytic PRE table of family members over a K-constant grid");
        auto* weights = app_.add_subcommand("weights", "Solve the bias-cancelling minimum-MSE weights");
        auto* verify = app_.add_subcommand("verify", "Compare first-order theory with enumeration or Monte Carlo");
        auto* generate = app_.add_subcommand("generate", "Write a synthetic population as CSV");

        for (auto* sub : {params, members, weights, verify}) {
            sub->add_option("--pop", cfg.pop_path, "Population CSV file (columns y and x)");
            sub->add_option("--synthetic", cfg.synthetic, "Synthetic population spec: inline JSON or JSON file");
            sub->add_option("--n", cfg.n, "Sample size");
            sub->add_option("--n-prime", cfg.n_prime, "First-phase sample size (two-phase designs)");
            sub->add_option("--alpha", cfg.alpha);
            sub->add_option("--beta", cfg.beta);
            sub->add_option("--lambda", cfg.lambda);
            sub->add_option("--m", cfg.m);
            sub->add_option("--q", cfg.q);
            sub->add_option("--gamma", cfg.gamma);
            sub->add_option("--k1", cfg.k1, "Atom name or literal");
            sub->add_option("--k2", cfg.k2, "+1 or -1");
            sub->add_option("--k3", cfg.k3, "Atom name or literal");
            sub->add_option("--k4", cfg.k4, "Atom name or literal");
            sub->add_option("--k5", cfg.k5, "Atom name or literal");
            sub->add_option("--mode", cfg.mode, "analytic | enumerate | mc");
            sub->add_option("--reps", cfg.reps, "Monte Carlo replicates");
            sub->add_option("--seed", cfg.seed, "Monte Carlo seed (default: $SURVEYKIT_SEED)");
            sub->add_option("--threads", cfg.threads, "Monte Carlo worker threads (0 = all cores)");
            sub->add_option("--format", cfg.format, "csv | markdown | json");
            sub->add_option("--tol-bias", cfg.tol_bias, "Bias tolerance as a fraction of the true root MSE");
            sub->add_option("--tol-mse", cfg.tol_mse, "Relative MSE tolerance");
            sub->add_option("--out", cfg.out, "Write output here instead of stdout");
            sub->add_option("--config", cfg.config, "JSON file of option values; flags override it");
        }
        members->add_option("--table", cfg.table, "Published member grid: a | b | c");
        members->add_option("--family", cfg.family, "t1 | t2 for a custom grid");
        members->add_option("--k1-atoms", cfg.k1_atoms)->expected(1, -1)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
        members->add_option("--k3-atoms", cfg.k3_atoms)->expected(1, -1)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
        members->add_option("--k4-atoms", cfg.k4_atoms)->expected(1, -1)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
        members->add_option("--k5-atoms", cfg.k5_atoms)->expected(1, -1)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
        members->add_option("--k2-values", cfg.k2_values)->expected(1, -1)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
        verify->add_option("--estimators", cfg.estimators, "mean ratio exp t1 t2 tp | mean t1d t2d tpd")
            ->expected(1, -1)
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

        generate->add_option("--synthetic", cfg.synthetic, "Synthetic population spec: inline JSON or JSON file");
        generate->add_option("--N", cfg.gen_N, "Population size");
        generate->add_option("--rho", cfg.rho, "Target correlation");
        generate->add_option("--mean-y", cfg.mean_y);
        generate->add_option("--mean-x", cfg.mean_x);
        generate->add_option("--cv-y", cfg.cv_y);
        generate->add_option("--cv-x", cfg.cv_x);
        generate->add_option("--seed", cfg.seed);
        generate->add_option("--out", cfg.out);
        generate->add_option("--config", cfg.config);
    }

    CLI::App& app() { return app_; }

    Parsed parse(std::vector<std::string> args) {
        std::reverse(args.begin(), args.end());
        app_.parse(args);
        Parsed p;
        for (auto* sub : app_.get_subcommands()) {
            p.sub = sub;
            for (const auto* opt : sub->get_options()) {
                if (opt->count() > 0) p.given.insert(opt->get_name(false, true).substr(2));
            }
        }
        return p;
    }

private:
    CLI::App app_;
};

std::string json_scalar_token(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number()) {
        std::ostringstream o;
        o.precision(17);
        o << v.get<double>();
        return o.str();
    }
    return v.dump();
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open JSON file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Io, "malformed JSON in '" + path + "': " + e.what());
    }
}

// Config-file values become flags placed before the user's own flags, for
// options the user did not give.
std::vector<std::string> config_tokens(const json& j, const std::set<std::string>& given) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config file must hold a JSON object");
    std::vector<std::string> tokens;
    for (const auto& [raw_key, value] : j.items()) {
        std::string key = raw_key;
        std::replace(key.begin(), key.end(), '_', '-');
        if (key == "config" || given.count(key)) continue;
        tokens.push_back("--" + key);
        if (value.is_array()) {
            for (const auto& v : value) tokens.push_back(json_scalar_token(v));
        } else if (value.is_object()) {
            tokens.push_back(value.dump());
        } else {
            tokens.push_back(json_scalar_token(value));
        }
    }
    return tokens;
}

json parse_synthetic_json(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            return json::parse(text);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::InvalidSpec, std::string("malformed synthetic spec: ") + e.what());
        }
    }
    return read_json_file(text);
}

SyntheticSpec synthetic_from_json(const json& j) {
    SyntheticSpec s;
    try {
        s.N = j.at("N").get<std::size_t>();
        s.target_rho = j.at(j.contains("target_rho") ? "target_rho" : "rho").get<double>();
        s.mean_y = j.at("mean_y").get<double>();
        s.mean_x = j.at("mean_x").get<double>();
        s.cv_y = j.at("cv_y").get<double>();
        s.cv_x = j.at("cv_x").get<double>();
        s.seed = j.value("seed", std::uint64_t{0});
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("synthetic spec: ") + e.what());
    }
    return s;
}

FinitePopulation load_input_population(const RunConfig& cfg) {
    if (!cfg.pop_path.empty() && !cfg.synthetic.empty()) throw UsageError("give either --pop or --synthetic, not both");
    if (!cfg.pop_path.empty()) return load_population_file(cfg.pop_path);
    if (!cfg.synthetic.empty()) return generate_synthetic(synthetic_from_json(parse_synthetic_json(cfg.synthetic)));
    throw UsageError("a population is required: --pop <csv> or --synthetic <json>");
}

Format output_format(const RunConfig& cfg) {
    if (auto f = parse_format(cfg.format)) return *f;
    throw UsageError("unknown --format '" + cfg.format + "'");
}

int parse_k2(const std::string& text) {
    if (text == "1" || text == "+1") return 1;
    if (text == "-1") return -1;
    throw UsageError("K2 must be +1 or -1, got '" + text + "'");
}

std::optional<std::size_t> n_prime_of(const RunConfig& cfg) {
    return cfg.n_prime ? std::optional<std::size_t>(cfg.n_prime) : std::nullopt;
}

std::size_t require_n(const RunConfig& cfg) {
    if (cfg.n == 0) throw UsageError("--n is required");
    return cfg.n;
}

AtomContext atom_context(const FinitePopulation& pop, const RunConfig& cfg, std::size_t n) {
    return AtomContext{compute_moments(pop), finite_factors(pop.size(), n, n_prime_of(cfg)), n};
}

FamilyConfig family_config(const RunConfig& cfg, const AtomContext& ctx) {
    FamilyConfig fc;
    fc.K1 = resolve_k_value(parse_k_value(cfg.k1), ctx);
    fc.K2 = parse_k2(cfg.k2);
    fc.K3 = resolve_k_value(parse_k_value(cfg.k3), ctx);
    fc.K4 = resolve_k_value(parse_k_value(cfg.k4), ctx);
    fc.K5 = resolve_k_value(parse_k_value(cfg.k5), ctx);
    fc.alpha = cfg.alpha;
    fc.beta = cfg.beta;
    fc.lambda = cfg.lambda;
    fc.m = cfg.m;
    fc.q = cfg.q;
    fc.gamma = cfg.gamma;
    return fc;
}

Table name_value_table(const std::vector<std::pair<std::string, double>>& entries) {
    Table t;
    t.headers = {"parameter", "value"};
    for (const auto& [name, value] : entries) t.rows.push_back({TableCell::str(name), TableCell::num(value)});
    return t;
}

int cmd_params(const RunConfig& cfg, std::ostream& out) {
    const auto pop = load_input_population(cfg);
    const auto m = compute_moments(pop);
    std::vector<std::pair<std::string, double>> rows{
        {"Ybar", m.Ybar}, {"Xbar", m.Xbar}, {"S_y", m.Sy()},     {"S_x", m.Sx()},          {"S_yx", m.Syx},
        {"C_y", m.Cy},    {"C_x", m.Cx},    {"rho_yx", m.rho},   {"K_x", m.Kx},            {"beta2_x", m.beta2x},
        {"N", static_cast<double>(m.N)},
    };
    if (cfg.n_prime && !cfg.n) throw UsageError("--n-prime needs --n");
    if (cfg.n) {
        const auto f = finite_factors(pop.size(), cfg.n, n_prime_of(cfg));
        rows.insert(rows.end(), {{"n", static_cast<double>(cfg.n)}, {"f1", f.f1()}, {"f", f.f()}, {"g", f.g()}});
        if (f.two_phase()) {
            rows.insert(rows.end(), {{"n_prime", static_cast<double>(cfg.n_prime)}, {"f2", f.f2()}, {"f3", f.f3()}});
        }
    }
    render(out, name_value_table(rows), output_format(cfg));
    return kExitOk;
}

std::vector<KValue> parse_k_list(const std::vector<std::string>& items) {
    std::vector<KValue> out;
    for (const auto& s : items) out.push_back(parse_k_value(s));
    return out;
}

int cmd_members(const RunConfig& cfg, const std::set<std::string>& given, std::ostream& out) {
    const auto pop = load_input_population(cfg);
    const auto n = require_n(cfg);
    const auto ctx = atom_context(pop, cfg, n);

    GridSpec grid;
    if (!cfg.table.empty()) {
        if (cfg.table.size() != 1) throw UsageError("--table takes a, b or c");
        grid = appendix_grid(cfg.table[0]);
    } else if (cfg.family == "t1") {
        grid.family = Family::T1;
        grid.rows = cartesian_rows(parse_k_list(cfg.k1_atoms), parse_k_list(cfg.k3_atoms));
    } else if (cfg.family == "t2") {
        grid.family = Family::T2;
        grid.k2_values = {1};
        grid.rows = cartesian_rows(parse_k_list(cfg.k4_atoms), parse_k_list(cfg.k5_atoms));
    } else {
        throw UsageError("--family must be t1 or t2");
    }
    if (!cfg.k2_values.empty()) {
        grid.k2_values.clear();
        for (const auto& k : cfg.k2_values) grid.k2_values.push_back(parse_k2(k));
    }
    if (given.count("alpha")) grid.alpha = {cfg.alpha};
    if (given.count("beta")) grid.beta = {cfg.beta};
    if (given.count("lambda")) grid.lambda = {cfg.lambda};

    render(out, members_table(ctx, grid), output_format(cfg));
    return kExitOk;
}

int cmd_weights(const RunConfig& cfg, std::ostream& out) {
    const auto pop = load_input_population(cfg);
    const auto n = require_n(cfg);
    const auto ctx = atom_context(pop, cfg, n);
    const auto fc = family_config(cfg, ctx);
    const auto in = make_theory_input(ctx.moments, ctx.factors, fc);
    const bool two_phase = ctx.factors.two_phase();

    const auto sol = two_phase ? solve_weights_two_phase(in) : solve_weights(in);
    const auto combined = two_phase ? theory_tpd(in, sol) : theory_tp(in, sol);
    const double min_mse = two_phase ? min_mse_tpd(ctx.moments, ctx.factors) : min_mse_tp(ctx.moments, ctx.factors);
    const double base = theory_mean(ctx.moments, ctx.factors).mse;
    const char* w = two_phase ? "h" : "w";

    std::vector<std::pair<std::string, double>> rows{
        {std::string(w) + "0", sol.w[0]},
        {std::string(w) + "1", sol.w[1]},
        {std::string(w) + "2", sol.w[2]},
        {"residual_sum", sol.residual_sum},
        {"residual_opt", sol.residual_opt},
        {"residual_bias", sol.residual_bias},
        {"condition_estimate", sol.condition_estimate},
        {two_phase ? "bias_tpd" : "bias_tp", combined.bias},
        {two_phase ? "mse_tpd" : "mse_tp", combined.mse},
        {"min_mse", min_mse},
        {"mse_mean", base},
    };
    if (combined.mse > 0.0) rows.emplace_back("pre", pre_percent(base, combined.mse));
    render(out, name_value_table(rows), output_format(cfg));
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg, const std::set<std::string>& given, std::ostream& out) {
    const auto pop = load_input_population(cfg);
    const auto n = require_n(cfg);
    const auto ctx = atom_context(pop, cfg, n);

    VerificationPlan plan;
    plan.n = n;
    plan.n_prime = n_prime_of(cfg);
    plan.cfg = family_config(cfg, ctx);
    plan.reps = cfg.reps;
    plan.seed = cfg.seed;
    plan.threads = cfg.threads;
    plan.tol = Tolerance{cfg.tol_bias, cfg.tol_mse};
    const std::string mode = given.count("mode") ? cfg.mode : "enumerate";
    if (mode == "enumerate") {
        plan.mode = TruthMode::Enumerate;
    } else if (mode == "mc") {
        plan.mode = TruthMode::MonteCarlo;
    } else {
        throw UsageError("verify needs --mode enumerate or --mode mc");
    }
    if (cfg.estimators.empty()) {
        plan.estimators = plan.n_prime
                              ? std::vector{EstimatorKind::Mean, EstimatorKind::T1d, EstimatorKind::T2d,
                                            EstimatorKind::Tpd}
                              : std::vector{EstimatorKind::Mean, EstimatorKind::Ratio, EstimatorKind::T1,
                                            EstimatorKind::T2, EstimatorKind::Tp};
    } else {
        for (const auto& name : cfg.estimators) {
            const auto kind = parse_estimator_kind(name);
            if (!kind) throw UsageError("unknown estimator '" + name + "'");
            plan.estimators.push_back(*kind);
        }
    }

    const auto report = run_verification(pop, plan);
    const auto format = output_format(cfg);
    if (format == Format::Json) {
        out << report_to_json(report).dump(2) << '\n';
    } else {
        render(out, report_table(report), format);
    }
    return report.all_pass() ? kExitOk : kExitVerifyFailed;
}

int cmd_generate(const RunConfig& cfg, const std::set<std::string>& given, std::ostream& out) {
    SyntheticSpec spec;
    if (!cfg.synthetic.empty()) spec = synthetic_from_json(parse_synthetic_json(cfg.synthetic));
    if (given.count("N")) spec.N = cfg.gen_N;
    if (given.count("rho")) spec.target_rho = cfg.rho;
    if (given.count("mean-y")) spec.mean_y = cfg.mean_y;
    if (given.count("mean-x")) spec.mean_x = cfg.mean_x;
    if (given.count("cv-y")) spec.cv_y = cfg.cv_y;
    if (given.count("cv-x")) spec.cv_x = cfg.cv_x;
    if (given.count("seed")) spec.seed = cfg.seed;
    save_population(out, generate_synthetic(spec));
    return kExitOk;
}

int dispatch(const std::string& name, const RunConfig& cfg, const std::set<std::string>& given,
             std::ostream& out) {
    if (name == "params") return cmd_params(cfg, out);
    if (name == "members") return cmd_members(cfg, given, out);
    if (name == "weights") return cmd_weights(cfg, out);
    if (name == "verify") return cmd_verify(cfg, given, out);
    return cmd_generate(cfg, given, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    std::string sub_name;
    std::set<std::string> given;
    try {
        {
            Parser first(cfg);
            try {
                auto parsed = first.parse(args);
                sub_name = parsed.sub->get_name();
                given = parsed.given;
            } catch (const CLI::ParseError& e) {
                return first.app().exit(e, out, err) == 0 ? kExitOk : kExitUsage;
            }
        }
        if (!cfg.config.empty()) {
            const auto tokens = config_tokens(read_json_file(cfg.config), given);
            std::vector<std::string> merged;
            auto it = std::find(args.begin(), args.end(), sub_name);
            merged.insert(merged.end(), args.begin(), it + 1);
            merged.insert(merged.end(), tokens.begin(), tokens.end());
            merged.insert(merged.end(), it + 1, args.end());
            cfg = RunConfig{};
            Parser second(cfg);
            try {
                given = second.parse(merged).given;
            } catch (const CLI::ParseError& e) {
                err << "config file: " << e.what() << '\n';
                return kExitUsage;
            }
        }
        if (std::getenv("SURVEYKIT_SEED") && !given.count("seed")) {
            try {
                cfg.seed = std::stoull(std::getenv("SURVEYKIT_SEED"));
                given.insert("seed");
            } catch (const std::exception&) {
                throw UsageError("SURVEYKIT_SEED is not an unsigned integer");
            }
        }
        if (sub_name == "verify" && cfg.mode == "mc" && !given.count("seed")) {
            throw UsageError("Monte Carlo mode needs --seed or SURVEYKIT_SEED");
        }

        if (cfg.out.empty()) return dispatch(sub_name, cfg, given, out);
        std::ostringstream buffer;
        const int code = dispatch(sub_name, cfg, given, buffer);
        std::ofstream file(cfg.out);
        if (!file) throw Error(ErrorCode::Io, "cannot write '" + cfg.out + "'");
        file << buffer.str();
        return code;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    }
}

}  // namespace surveykit::cli
