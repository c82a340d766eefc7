#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "rlab/errors.hpp"
#include "rlab/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Numerical checks for restriction estimates on degenerate curves"};
    app.set_version_flag("--version", rlab::version());
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::optional<std::string> output;
    auto* run = app.add_subcommand("run", "run the checks of an experiment config");
    run->add_option("config", config_path, "config JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "override the config seed");
    run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    run->add_option("--output", output, "override the output prefix");

    auto* list = app.add_subcommand("list-checks", "list the available operations");

    std::string report_path, kind, out_prefix;
    auto* plots = app.add_subcommand("emit-plots", "write plot-ready CSVs from a report");
    plots->add_option("report", report_path, "report JSON")->required()->check(CLI::ExistingFile);
    plots->add_option("--kind", kind, "ratio-vs-parameter or measure-vs-scale")
        ->required()
        ->check(CLI::IsMember({"ratio-vs-parameter", "measure-vs-scale"}));
    plots->add_option("--out", out_prefix, "output prefix");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list) {
            for (const auto& op : rlab::operations()) {
                std::cout << op.module << "  " << op.name << "  - " << op.summary << "\n    required:";
                for (const auto& k : op.required) std::cout << ' ' << k;
                if (!op.optional.empty()) {
                    std::cout << "\n    optional:";
                    for (const auto& k : op.optional) std::cout << ' ' << k;
                }
                std::cout << '\n';
            }
            return 0;
        }
        if (*run) {
            auto cfg = rlab::load_config(config_path, seed);
            if (output) cfg.output = *output;
            const auto result = rlab::run(cfg, {jobs});
            for (const auto& r : result.reports) {
                std::cout << rlab::to_string(r.status) << "  " << r.check_id << "  estimate=" << r.estimate;
                if (r.bound) std::cout << " bound=" << *r.bound;
                std::cout << '\n';
                for (const auto& n : r.notes) std::cout << "    " << n << '\n';
            }
            if (!cfg.output.empty()) {
                for (const auto& p : rlab::write_outputs(result, cfg.output)) std::cout << "wrote " << p << '\n';
            }
            return result.all_passed ? 0 : 1;
        }
        if (*plots) {
            std::ifstream in(report_path);
            const auto doc = rlab::Json::parse(in);
            const auto files = rlab::emit_plot_data(doc, rlab::plot_kind_from_string(kind), out_prefix);
            for (const auto& f : files) std::cout << "wrote " << f << '\n';
            return 0;
        }
    } catch (const rlab::ConfigError& e) {
        std::cerr << "config error at " << e.path() << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
