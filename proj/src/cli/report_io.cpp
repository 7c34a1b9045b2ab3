#include <cmath>
#include <limits>

#include "surveykit/cli.hpp"

namespace surveykit::cli {

namespace {

using nlohmann::json;

// NaN (an undefined PRE) is stored as null.
json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double number_from(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

json report_to_json(const VerificationReport& report) {
    json j;
    j["mode"] = report.mode;
    j["N"] = report.N;
    j["n"] = report.n;
    j["n_prime"] = report.n_prime ? json(*report.n_prime) : json(nullptr);
    j["reps"] = report.reps;
    j["seed"] = report.seed;
    j["tol_bias"] = report.tol.bias;
    j["tol_mse"] = report.tol.mse;
    j["weights"] = report.weights;
    j["all_pass"] = report.all_pass();
    auto rows = json::array();
    for (const auto& r : report.rows) {
        rows.push_back({
            {"estimator", r.estimator_id},
            {"analytic_bias", r.analytic_bias},
            {"analytic_mse", r.analytic_mse},
            {"truth_bias", r.truth_bias},
            {"truth_mse", r.truth_mse},
            {"stderr_bias", r.stderr_bias},
            {"stderr_mse", r.stderr_mse},
            {"diff_bias", r.diff_bias},
            {"diff_mse", r.diff_mse},
            {"pre_analytic", number_or_null(r.pre_analytic)},
            {"pre_empirical", number_or_null(r.pre_empirical)},
            {"pass_bias", r.pass_bias},
            {"pass_mse", r.pass_mse},
            {"pass", r.pass},
        });
    }
    j["rows"] = std::move(rows);
    return j;
}

VerificationReport report_from_json(const json& j) {
    VerificationReport report;
    report.mode = j.at("mode").get<std::string>();
    report.N = j.at("N").get<std::size_t>();
    report.n = j.at("n").get<std::size_t>();
    if (!j.at("n_prime").is_null()) report.n_prime = j.at("n_prime").get<std::size_t>();
    report.reps = j.at("reps").get<std::uint64_t>();
    report.seed = j.at("seed").get<std::uint64_t>();
    report.tol.bias = j.at("tol_bias").get<double>();
    report.tol.mse = j.at("tol_mse").get<double>();
    report.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& r : j.at("rows")) {
        ReportRow row;
        row.estimator_id = r.at("estimator").get<std::string>();
        row.analytic_bias = r.at("analytic_bias").get<double>();
        row.analytic_mse = r.at("analytic_mse").get<double>();
        row.truth_bias = r.at("truth_bias").get<double>();
        row.truth_mse = r.at("truth_mse").get<double>();
        row.stderr_bias = r.at("stderr_bias").get<double>();
        row.stderr_mse = r.at("stderr_mse").get<double>();
        row.diff_bias = r.at("diff_bias").get<double>();
        row.diff_mse = r.at("diff_mse").get<double>();
        row.pre_analytic = number_from(r.at("pre_analytic"));
        row.pre_empirical = number_from(r.at("pre_empirical"));
        row.pass_bias = r.at("pass_bias").get<bool>();
        row.pass_mse = r.at("pass_mse").get<bool>();
        row.pass = r.at("pass").get<bool>();
        report.rows.push_back(std::move(row));
    }
    return report;
}

Table report_table(const VerificationReport& report) {
    Table t;
    t.headers = {"estimator", "analytic_bias", "truth_bias", "analytic_mse", "truth_mse",
                 "pre_analytic", "pre_empirical", "result"};
    auto pre_cell = [](double v) { return std::isnan(v) ? TableCell::str("n/a") : TableCell::num(v); };
    for (const auto& r : report.rows) {
        t.rows.push_back({TableCell::str(r.estimator_id), TableCell::num(r.analytic_bias),
                          TableCell::num(r.truth_bias), TableCell::num(r.analytic_mse), TableCell::num(r.truth_mse),
                          pre_cell(r.pre_analytic), pre_cell(r.pre_empirical),
                          TableCell::str(r.pass ? "pass" : (r.pass_bias ? "FAIL(mse)" : "FAIL(bias)"))});
    }
    return t;
}

}  // namespace surveykit::cli
