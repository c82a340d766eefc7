#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace rlab {

using Json = nlohmann::ordered_json;

enum class CheckStatus { Pass, Fail, Inconclusive, Error };

std::string to_string(CheckStatus s);
CheckStatus check_status_from_string(const std::string& s);

// Named numeric table; one CSV file per table, header row = columns.
struct Series {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row);
    void write_csv(std::ostream& os) const;
};

// One verified identity or inequality.
struct CheckReport {
    std::string check_id;
    std::string operation;
    Json parameters = Json::object();
    double estimate = 0.0;
    std::optional<double> bound;
    double tolerance = 0.0;
    CheckStatus status = CheckStatus::Inconclusive;
    Json witnesses = Json::array();
    std::vector<std::string> notes;
    std::map<std::string, Series> series;
    double timing_ms = 0.0;

    bool pass() const { return status == CheckStatus::Pass; }
    void set_pass(bool ok) { status = ok ? CheckStatus::Pass : CheckStatus::Fail; }
    void note(std::string s) { notes.push_back(std::move(s)); }
    // Marks the report passed iff `ok`, and records the bound it was held to.
    void decide(bool ok, double bound_value) {
        bound = bound_value;
        set_pass(ok);
    }
};

// Timing is wall-clock and therefore excluded unless asked for; reports are
// otherwise a pure function of config and seed.
Json to_json(const CheckReport& r, bool include_timing = false);
CheckReport report_from_json(const Json& j);

}  // namespace rlab
