#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sys/wait.h>
#include <unistd.h>
#include <sstream>

#include "doctest.h"
#include "rlab/errors.hpp"
#include "rlab/runner.hpp"

using namespace rlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("rlab-test-" + std::to_string(::getpid())) / name;
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string config_error_path(const Json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<none>";
}

const Json psi_d2 = {{"seed", 7}, {"checks", {{{"id", "psi"}, {"operation", "psi_lower_bound"}, {"parameters", {{"d", 2}, {"samples", 50}}}}}}};

}  // namespace

TEST_CASE("empty config runs clean") {
    const auto cfg = parse_config(Json::object());
    const auto res = run(cfg);
    CHECK(res.all_passed);
    CHECK(res.reports.empty());
    CHECK(res.report["reports"].empty());
    CHECK(res.report["version"] == version());
}

TEST_CASE("d = 2 psi check reports one half") {
    const auto res = run(parse_config(psi_d2));
    REQUIRE(res.reports.size() == 1);
    CHECK(res.all_passed);
    CHECK(res.reports[0].estimate == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(res.reports[0].check_id == "psi");
    CHECK(res.report["config"]["checks"][0]["module"] == "vandermonde-psi");
}

TEST_CASE("config errors name the offending path") {
    CHECK(config_error_path({{"checks", {{{"operation", "no_such_op"}}}}}) == "checks[0].operation");
    CHECK(config_error_path({{"colour", 1}}) == "colour");
    CHECK(config_error_path({{"seed", -1}}) == "seed");
    CHECK(config_error_path({{"checks", {{{"operation", "psi_lower_bound"}, {"parameters", {{"d", 2}, {"bogus", 1}}}}}}}) ==
          "checks[0].parameters.bogus");
    CHECK(config_error_path({{"checks", {{{"operation", "psi_lower_bound"}, {"parameters", Json::object()}}}}}) ==
          "checks[0].parameters.d");
    CHECK(config_error_path({{"checks", {{{"id", "x"}, {"operation", "exponents"}, {"parameters", {{"d", 3}}}},
                                         {{"id", "x"}, {"operation", "exponents"}, {"parameters", {{"d", 3}}}}}}}) ==
          "checks[1].id");
    CHECK(config_error_path({{"checks", {{{"id", 3}, {"operation", "exponents"}}}}}) == "checks[0].id");
    CHECK(config_error_path({{"checks", {{{"operation", "exponents"}, {"module", "curve-core"}, {"parameters", {{"d", 3}}}}}}}) ==
          "checks[0].module");
    CHECK(config_error_path({{"curves", {{{"kind", "monomial"}, {"d", 3}}}}}) .rfind("curves[0]", 0) == 0);
}

TEST_CASE("curve references resolve by name, index and inline") {
    const Json j = {{"curves", {{{"name", "q"}, {"kind", "monomial"}, {"d", 3}, {"beta", 4}}}},
                    {"checks",
                     {{{"id", "by-name"}, {"operation", "validate_monotone"}, {"parameters", {{"curve", "q"}}}},
                      {{"id", "by-index"}, {"operation", "validate_monotone"}, {"parameters", {{"curve", 0}}}},
                      {{"id", "inline"},
                       {"operation", "validate_monotone"},
                       {"parameters", {{"curve", {{"kind", "monomial"}, {"d", 3}, {"beta", 4}}}}}},
                      {{"id", "missing"}, {"operation", "validate_monotone"}, {"parameters", {{"curve", "nope"}}}}}}};
    const auto res = run(parse_config(j));
    REQUIRE(res.reports.size() == 4);
    for (int i = 0; i < 3; ++i) CHECK(res.reports[i].status == CheckStatus::Pass);
    // a check that throws is recorded, the run continues
    CHECK(res.reports[3].status == CheckStatus::Error);
    CHECK_FALSE(res.all_passed);
}

TEST_CASE("seeds derive from the config seed and the check id") {
    const auto a = parse_config(psi_d2);
    const auto b = parse_config(psi_d2, 8);
    CHECK(a.checks[0].seed != b.checks[0].seed);
    CHECK(parse_config(psi_d2).checks[0].seed == a.checks[0].seed);
}

TEST_CASE("every operation is listed once") {
    std::set<std::string> names;
    for (const auto& op : operations()) {
        CHECK(names.insert(op.name).second);
        CHECK(find_operation(op.name) == &op);
        CHECK_FALSE(op.module.empty());
    }
    CHECK(find_operation("nope") == nullptr);
}

TEST_CASE("default config is reproducible across job counts") {
    const auto cfg = load_config(RLAB_SOURCE_DIR "/configs/default.json");
    const auto r1 = run(cfg, {1});
    const auto r4 = run(cfg, {4});
    CHECK(r1.all_passed);
    CHECK(r1.report.dump() == r4.report.dump());
    for (const auto& r : r1.reports) {
        CAPTURE(r.check_id);
        CHECK(r.status == CheckStatus::Pass);
    }

    const auto dir = scratch("default");
    const auto files = write_outputs(r1, (dir / "run-").string());
    CHECK(fs::exists(dir / "run-report.json"));
    CHECK(files.size() > 1);
    for (const auto& f : files) {
        if (f.size() < 4 || f.substr(f.size() - 4) != ".csv") continue;
        const std::string body = slurp(f);
        CHECK(body.find('\n') != std::string::npos);  // header row
    }
    // reload and compare
    const Json back = Json::parse(slurp(dir / "run-report.json"));
    CHECK(back.dump() == r1.report.dump());
}

TEST_CASE("plot data") {
    const auto dir = scratch("plots");
    SUBCASE("empty report list writes nothing") {
        const Json rep = {{"reports", Json::array()}};
        CHECK(emit_plot_data(rep, PlotKind::RatioVsParameter, (dir / "e-").string()).empty());
    }
    SUBCASE("missing series is an error") {
        const auto res = run(parse_config(psi_d2));
        CHECK_THROWS_AS(emit_plot_data(res.report, PlotKind::MeasureVsScale, (dir / "m-").string()), Error);
        CHECK_THROWS_AS(emit_plot_data(Json::array(), PlotKind::MeasureVsScale, (dir / "m-").string()), Error);
    }
    SUBCASE("measure against scale recovers the exponent") {
        const Json j = {{"curves", {{{"kind", "monomial"}, {"d", 3}, {"beta", 3}, {"coefficient", 1.0 / 6.0}}}},
                        {"checks",
                         {{{"id", "shrink"},
                           {"operation", "alpha_B"},
                           {"parameters",
                            {{"curve", 0},
                             {"alpha", 1.0 / 6.0},
                             {"family", {{"kind", "adapted"}, {"t0", 0.5}, {"r0", 0.2}, {"levels", 6}}}}}}}}};
        const auto res = run(parse_config(j));
        const auto files = emit_plot_data(res.report, PlotKind::MeasureVsScale, (dir / "s-").string());
        REQUIRE(files.size() == 1);
        std::istringstream in(slurp(files[0]));
        std::string line;
        std::getline(in, line);
        CHECK(line == "measure,lambda");
        std::vector<double> lx, ly;
        while (std::getline(in, line)) {
            const auto comma = line.find(',');
            lx.push_back(std::log(std::stod(line.substr(0, comma))));
            ly.push_back(std::log(std::stod(line.substr(comma + 1))));
        }
        REQUIRE(lx.size() == 6);
        const double n = static_cast<double>(lx.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) sx += lx[i], sy += ly[i], sxx += lx[i] * lx[i], sxy += lx[i] * ly[i];
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        CHECK(slope == doctest::Approx(1.0 / 6.0).epsilon(0.02));
    }
    SUBCASE("family ratios") {
        const auto cfg = load_config(RLAB_SOURCE_DIR "/configs/default.json");
        const auto res = run(cfg, {2});
        const auto files = emit_plot_data(res.report, PlotKind::RatioVsParameter, (dir / "r-").string());
        bool family = false;
        for (const auto& f : files) {
            if (f.find("ratio-flat") == std::string::npos) continue;
            family = true;
            CHECK(slurp(f).rfind("curve,maxRatio\n", 0) == 0);
        }
        CHECK(family);
    }
    CHECK(plot_kind_from_string("measure-vs-scale") == PlotKind::MeasureVsScale);
    CHECK_THROWS(plot_kind_from_string("histogram"));
}

TEST_CASE("command line") {
    const auto dir = scratch("cli");
    const std::string cli = RLAB_CLI;
    auto status = [](const std::string& cmd) {
        const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };
    {
        std::ofstream(dir / "ok.json") << psi_d2.dump();
        std::ofstream(dir / "bad.json") << Json{{"checks", {{{"operation", "no_such_op"}}}}}.dump();
        std::ofstream(dir / "fail.json")
            << Json{{"checks", {{{"operation", "validate_monotone"},
                                 {"parameters", {{"curve", {{"kind", "poly-phi"}, {"d", 2}, {"coeffs", {0, -1}}}}}}}}}}.dump();
    }
    const std::string out = (dir / "o-").string();
    CHECK(status(cli + " run " + (dir / "ok.json").string() + " --jobs 2 --output " + out) == 0);
    CHECK(fs::exists(out + "report.json"));
    CHECK(status(cli + " run " + (dir / "fail.json").string() + " --output " + out + "f-") == 1);
    CHECK(status(cli + " run " + (dir / "bad.json").string()) == 2);
    CHECK(status(cli + " list-checks") == 0);
    CHECK(status(cli + " emit-plots " + out + "report.json --kind ratio-vs-parameter --out " + out + "p-") == 0);
    CHECK(status(cli + " emit-plots " + out + "report.json --kind measure-vs-scale --out " + out + "p-") == 2);
}
