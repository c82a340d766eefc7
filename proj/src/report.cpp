#include "rlab/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "rlab/errors.hpp"

namespace rlab {

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::Inconclusive: return "inconclusive";
        case CheckStatus::Error: return "error";
    }
    return "error";
}

CheckStatus check_status_from_string(const std::string& s) {
    if (s == "pass") return CheckStatus::Pass;
    if (s == "fail") return CheckStatus::Fail;
    if (s == "inconclusive") return CheckStatus::Inconclusive;
    if (s == "error") return CheckStatus::Error;
    throw ValidationError("unknown check status '" + s + "'");
}

void Series::add(std::vector<double> row) {
    if (row.size() != columns.size()) throw ValidationError("series row width mismatch");
    rows.push_back(std::move(row));
}

void Series::write_csv(std::ostream& os) const {
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    std::ostringstream cell;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            cell.str({});
            cell << std::setprecision(17) << row[i];
            os << (i ? "," : "") << cell.str();
        }
        os << '\n';
    }
}

namespace {

Json number(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

double parse_number(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return INFINITY;
        if (s == "-inf") return -INFINITY;
        if (s == "nan") return NAN;
    }
    throw ValidationError("expected a number");
}

}  // namespace

Json to_json(const CheckReport& r, bool include_timing) {
    Json j;
    j["checkId"] = r.check_id;
    j["operation"] = r.operation;
    j["parameters"] = r.parameters;
    j["estimate"] = number(r.estimate);
    j["bound"] = r.bound ? number(*r.bound) : Json(nullptr);
    j["tolerance"] = number(r.tolerance);
    j["pass"] = r.pass();
    j["status"] = to_string(r.status);
    j["witnesses"] = r.witnesses;
    j["notes"] = r.notes;
    Json series = Json::object();
    for (const auto& [name, s] : r.series) {
        Json rows = Json::array();
        for (const auto& row : s.rows) {
            Json jr = Json::array();
            for (double x : row) jr.push_back(number(x));
            rows.push_back(std::move(jr));
        }
        series[name] = {{"columns", s.columns}, {"rows", std::move(rows)}};
    }
    j["series"] = std::move(series);
    if (include_timing) j["timingMs"] = r.timing_ms;
    return j;
}

CheckReport report_from_json(const Json& j) {
    CheckReport r;
    r.check_id = j.at("checkId").get<std::string>();
    r.operation = j.value("operation", std::string{});
    r.parameters = j.value("parameters", Json::object());
    r.estimate = parse_number(j.at("estimate"));
    if (j.contains("bound") && !j["bound"].is_null()) r.bound = parse_number(j["bound"]);
    r.tolerance = j.contains("tolerance") ? parse_number(j["tolerance"]) : 0.0;
    r.status = check_status_from_string(j.at("status").get<std::string>());
    r.witnesses = j.value("witnesses", Json::array());
    if (j.contains("notes")) r.notes = j["notes"].get<std::vector<std::string>>();
    if (j.contains("series"))
        for (const auto& [name, js] : j["series"].items()) {
            Series s;
            s.columns = js.at("columns").get<std::vector<std::string>>();
            for (const auto& row : js.at("rows")) {
                std::vector<double> v;
                for (const auto& x : row) v.push_back(parse_number(x));
                s.rows.push_back(std::move(v));
            }
            r.series.emplace(name, std::move(s));
        }
    if (j.contains("timingMs")) r.timing_ms = j["timingMs"].get<double>();
    return r;
}

}  // namespace rlab
