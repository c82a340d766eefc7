#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rlab/curve.hpp"
#include "rlab/report.hpp"

namespace rlab {

std::string version();

struct CheckDescriptor {
    std::string id;
    std::string module;
    std::string operation;
    Json parameters = Json::object();
    std::uint64_t seed = 0;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    // raw curve specs; a check refers to one by index, by "name", or inline
    std::vector<Json> curves;
    std::map<std::string, double> tolerances;
    std::string output;
    std::vector<CheckDescriptor> checks;
};

// Validates against the schema and resolves ids, modules and per-check seeds.
// Throws ConfigError naming the offending path.
ExperimentConfig parse_config(const Json& j, std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt);
Json to_json(const ExperimentConfig& cfg);

class CheckContext {
public:
    CheckContext(const ExperimentConfig& cfg, const CheckDescriptor& check);

    const Json& params() const noexcept { return check_.parameters; }
    std::uint64_t seed() const noexcept { return check_.seed; }
    bool has(const std::string& key) const { return check_.parameters.contains(key); }

    template <class T>
    T get(const std::string& key) const;
    template <class T>
    T get(const std::string& key, T fallback) const {
        return has(key) ? get<T>(key) : fallback;
    }
    // explicit parameter, then config tolerances[operation], then fallback
    double tolerance(double fallback) const;

    AnyCurve curve(const std::string& key = "curve") const;
    SimpleCurve simple_curve(const std::string& key = "curve") const;
    std::string path(const std::string& key) const;

private:
    AnyCurve resolve_curve(const Json& ref, const std::string& path) const;

    const ExperimentConfig& cfg_;
    const CheckDescriptor& check_;
    friend AnyCurve resolve_curve_ref(const CheckContext&, const Json&, const std::string&);
};

struct OperationInfo {
    std::string module;
    std::string name;
    std::string summary;
    std::vector<std::string> required;
    std::vector<std::string> optional;
    std::function<CheckReport(const CheckContext&)> run;
};

const std::vector<OperationInfo>& operations();
const OperationInfo* find_operation(const std::string& name);

struct RunOptions {
    int jobs = 1;
};

struct RunResult {
    std::vector<CheckReport> reports;
    Json report;
    bool all_passed = true;
};

// Executes every check on a pool of `jobs` workers. A check that throws is
// recorded with status "error". Report order follows the config.
RunResult run(const ExperimentConfig& cfg, const RunOptions& opts = {});

// report.json plus one CSV per series under the config output prefix; returns
// the written paths.
std::vector<std::string> write_outputs(const RunResult& result, const std::string& prefix);

enum class PlotKind { RatioVsParameter, MeasureVsScale };
PlotKind plot_kind_from_string(const std::string& s);

// Two-column CSVs from the series each kind understands; throws Error when a
// nonempty report list has none of them.
std::vector<std::string> emit_plot_data(const Json& report, PlotKind kind, const std::string& prefix);

}  // namespace rlab
