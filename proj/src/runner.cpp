#include "rlab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "rlab/conditions.hpp"
#include "rlab/curve_spec.hpp"
#include "rlab/errors.hpp"
#include "rlab/geometry.hpp"
#include "rlab/offspring.hpp"
#include "rlab/sampling.hpp"
#include "rlab/spectral.hpp"
#include "rlab/vandermonde.hpp"

namespace rlab {

std::string version() { return RLAB_VERSION; }

// ---------------------------------------------------------------- context

CheckContext::CheckContext(const ExperimentConfig& cfg, const CheckDescriptor& check) : cfg_(cfg), check_(check) {}

std::string CheckContext::path(const std::string& key) const { return "checks[" + check_.id + "].parameters." + key; }

template <class T>
T CheckContext::get(const std::string& key) const {
    if (!has(key)) throw ConfigError(path(key), "missing");
    try {
        return check_.parameters.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(path(key), "has the wrong type");
    }
}

template double CheckContext::get<double>(const std::string&) const;
template int CheckContext::get<int>(const std::string&) const;
template bool CheckContext::get<bool>(const std::string&) const;
template std::string CheckContext::get<std::string>(const std::string&) const;
template Vec CheckContext::get<Vec>(const std::string&) const;
template std::size_t CheckContext::get<std::size_t>(const std::string&) const;

double CheckContext::tolerance(double fallback) const {
    if (has("tolerance")) return get<double>("tolerance");
    auto it = cfg_.tolerances.find(check_.operation);
    return it != cfg_.tolerances.end() ? it->second : fallback;
}

AnyCurve CheckContext::resolve_curve(const Json& ref, const std::string& p) const {
    if (ref.is_number_integer()) {
        const auto i = ref.get<long>();
        if (i < 0 || i >= static_cast<long>(cfg_.curves.size())) throw ConfigError(p, "curve index out of range");
        return curve_from_json(cfg_.curves[i], "curves[" + std::to_string(i) + "]");
    }
    if (ref.is_string()) {
        const auto name = ref.get<std::string>();
        for (std::size_t i = 0; i < cfg_.curves.size(); ++i)
            if (cfg_.curves[i].value("name", "") == name)
                return curve_from_json(cfg_.curves[i], "curves[" + std::to_string(i) + "]");
        throw ConfigError(p, "no curve named '" + name + "'");
    }
    if (ref.is_object()) return curve_from_json(ref, p);
    throw ConfigError(p, "curve reference must be an index, a name or a spec");
}

AnyCurve CheckContext::curve(const std::string& key) const {
    if (!has(key)) throw ConfigError(path(key), "missing");
    return resolve_curve(check_.parameters.at(key), path(key));
}

SimpleCurve CheckContext::simple_curve(const std::string& key) const {
    AnyCurve c = curve(key);
    if (auto* s = std::get_if<SimpleCurve>(&c)) return *s;
    throw ConfigError(path(key), "a simple curve is required here");
}

AnyCurve resolve_curve_ref(const CheckContext& ctx, const Json& ref, const std::string& p) {
    return ctx.resolve_curve(ref, p);
}

// ---------------------------------------------------------------- operations

namespace {

std::vector<OffspringSample> offspring_sample_set(const CheckContext& c, const SimpleCurve& curve,
                                                  std::size_t fallback) {
    SigmaSweepOptions o;
    o.samples = c.get<std::size_t>("samples", fallback);
    o.h_lo = c.get<double>("hLo", o.h_lo);
    o.h_hi = c.get<double>("hHi", o.h_hi);
    o.seed = c.seed();
    return offspring_samples(curve, o);
}

std::vector<OperationInfo> build_registry() {
    std::vector<OperationInfo> ops;
    auto add = [&](std::string module, std::string name, std::string summary, std::vector<std::string> req,
                   std::vector<std::string> opt, std::function<CheckReport(const CheckContext&)> fn) {
        ops.push_back({std::move(module), std::move(name), std::move(summary), std::move(req), std::move(opt),
                       std::move(fn)});
    };

    // curve-core
    add("curve-core", "validate_monotone", "phi^(j) >= 0 and nondecreasing on a grid", {"curve"},
        {"grid", "tolerance"}, [](const CheckContext& c) {
            return validate_monotone(c.simple_curve(), c.get<int>("grid", 256), c.tolerance(1e-12));
        });
    add("curve-core", "validate_oracle", "derivative oracle against five-point differences", {"curve"},
        {"samples", "tolerance"}, [](const CheckContext& c) {
            return validate_oracle(c.simple_curve().oracle(), c.get<int>("samples", 20), c.tolerance(1e-4));
        });

    // vandermonde-psi
    add("vandermonde-psi", "psi_lower_bound", "inf of int_{mean kappa}^{kappa_d} Psi / v over sampled gaps", {"d"},
        {"samples", "hLo", "hHi", "refine"}, [](const CheckContext& c) {
            PsiSweepOptions o;
            o.samples = c.get<std::size_t>("samples", o.samples);
            o.h_lo = c.get<double>("hLo", o.h_lo);
            o.h_hi = c.get<double>("hHi", o.h_hi);
            o.refine = c.get<bool>("refine", o.refine);
            o.seed = c.seed();
            return psi_lower_bound_sweep(c.get<int>("d"), o);
        });
    add("vandermonde-psi", "vandermonde_integration", "nested integral of V_{n-1} against V_n", {"n", "s"},
        {"relTol"}, [](const CheckContext& c) {
            QuadratureOptions q;
            q.rel_tol = c.get<double>("relTol", 1e-9);
            const Vec s = c.get<Vec>("s");
            return check_vandermonde_integration(c.get<int>("n"), s, q);
        });
    add("vandermonde-psi", "tail_inequalities", "tail ratios of the Vandermonde integral", {"n", "t", "delta"},
        {"floor"}, [](const CheckContext& c) {
            const Vec t = c.get<Vec>("t");
            return check_tail_inequalities(c.get<int>("n"), t, c.get<double>("delta"), c.get<double>("floor", 1e-6));
        });
    add("vandermonde-psi", "lin_lemma", "shrunk-box integral of a product of linear factors", {"instance"}, {},
        [](const CheckContext& c) {
            LinInstance inst;
            try {
                inst = lin_instance_from_json(c.params().at("instance"));
            } catch (const ValidationError& e) {
                throw ConfigError(c.path("instance"), e.what());
            }
            return check_lin_lemma(inst);
        });

    // offspring-jacobian
    add("offspring-jacobian", "jacobian_identity", "determinant Jacobian against its iterated-integral form",
        {"curve"}, {"samples", "hLo", "hHi", "tolerance"}, [](const CheckContext& c) {
            const SimpleCurve curve = c.simple_curve();
            const auto s = offspring_sample_set(c, curve, 50);
            auto r = check_jacobian_identity(curve, s, c.tolerance(1e-8));
            r.parameters["seed"] = c.seed();
            return r;
        });
    add("offspring-jacobian", "monomial_jacobian", "J prod j! = v(h) for phi = t^d/d!", {"d"},
        {"samples", "tolerance"}, [](const CheckContext& c) {
            const int d = c.get<int>("d");
            const SimpleCurve curve(d, monomial_oracle(d, 0.0, 1.0, 1.0 / factorial(d)));
            const auto s = offspring_sample_set(c, curve, 200);
            return check_monomial_jacobian(d, s, 0.0, 1.0, c.tolerance(1e-10));
        });
    add("offspring-jacobian", "estimate_sigma", "inf of J / (v prod phi^(d)(s_j)^(1/d))", {"curve"},
        {"samples", "hLo", "hHi", "A"}, [](const CheckContext& c) {
            const SimpleCurve curve = c.simple_curve();
            const auto s = offspring_sample_set(c, curve, 1000);
            std::optional<double> A;
            if (c.has("A")) A = c.get<double>("A");
            return estimate_sigma(curve, s, A);
        });
    add("offspring-jacobian", "offspring_closure", "offspring constant against sigma/d", {"curve", "h"},
        {"samples", "hLo", "hHi", "tolerance"}, [](const CheckContext& c) {
            SigmaSweepOptions o;
            o.samples = c.get<std::size_t>("samples", 200);
            o.h_lo = c.get<double>("hLo", o.h_lo);
            o.h_hi = c.get<double>("hHi", o.h_hi);
            o.seed = c.seed();
            return check_offspring_closure(c.simple_curve(), GapVector(c.get<Vec>("h")), o, c.tolerance(1e-9));
        });
    add("offspring-jacobian", "weight_product_bound", "J against sigma v prod w(s_j)^(d(d+1)/2d)", {"curve"},
        {"samples", "hLo", "hHi", "sigma"}, [](const CheckContext& c) {
            const SimpleCurve curve = c.simple_curve();
            const auto s = offspring_sample_set(c, curve, 500);
            std::optional<double> sigma;
            if (c.has("sigma")) sigma = c.get<double>("sigma");
            return weight_product_bound(curve, s, sigma);
        });

    // condition-lab
    add("condition-lab", "estimate_A", "mean-value condition constant", {"curve"}, {"variant", "grid"},
        [](const CheckContext& c) {
            return estimate_A(c.simple_curve(), mean_variant_from_string(c.get<std::string>("variant", "GM")),
                              c.get<int>("grid", 24))
                .report;
        });
    add("condition-lab", "phicond", "Hoelder-type growth of phi^(d-1)", {"curve", "alpha"}, {"grid"},
        [](const CheckContext& c) {
            return check_phicond(c.simple_curve(), c.get<double>("alpha"), c.get<int>("grid", 24)).report;
        });
    add("condition-lab", "exponents", "exponent bookkeeping", {"d"}, {"p", "P", "alpha", "lorentzS", "D", "tolerance"},
        [](const CheckContext& c) {
            ExponentQuery q;
            q.d = c.get<int>("d");
            if (c.has("p")) q.p = c.get<double>("p");
            if (c.has("P")) q.P = c.get<double>("P");
            if (c.has("alpha")) q.alpha = c.get<double>("alpha");
            if (c.has("lorentzS")) q.lorentz_s = c.get<double>("lorentzS");
            if (c.has("D")) q.D = c.get<double>("D");
            const auto rec = exponent_calculator(q);
            CheckReport r;
            r.check_id = "exponents";
            r.operation = "exponent_calculator";
            r.parameters = rec.to_json();
            r.tolerance = c.tolerance(1e-14);
            double residual = 0.0;
            if (rec.theta) residual = std::max(std::abs(rec.theta->eta_residual), rec.theta->s_residual);
            r.estimate = residual;
            r.decide(residual <= r.tolerance, r.tolerance);
            return r;
        });

    // measure-geometry
    add("measure-geometry", "alpha_B", "sup of lambda(E) / m(E)^alpha over a family", {"curve", "alpha", "family"},
        {}, [](const CheckContext& c) {
            const AnyCurve curve = c.curve();
            const Json& fam = c.params().at("family");
            const std::string fp = c.path("family");
            std::vector<Parallelepiped> family;
            try {
                const std::string kind = fam.at("kind").get<std::string>();
                Vec radii;
                if (fam.contains("radii")) {
                    radii = fam.at("radii").get<Vec>();
                } else {
                    const double r0 = fam.value("r0", 0.25);
                    const int levels = fam.value("levels", 6);
                    for (int i = 0; i < levels; ++i) radii.push_back(std::ldexp(r0, -i));
                }
                if (kind == "adapted") {
                    family = adapted_frame_family(curve, fam.at("t0").get<double>(), radii, fam.value("c", 1.0));
                } else if (kind == "boxes") {
                    const Vec center = fam.at("center").get<Vec>();
                    const Vec ex = fam.at("exponents").get<Vec>();
                    family = anisotropic_box_family(center, radii, ex);
                } else if (kind == "explicit") {
                    for (const auto& e : fam.at("parallelepipeds")) family.push_back(Parallelepiped::from_json(e));
                } else {
                    throw ConfigError(fp + ".kind", "unknown family kind '" + kind + "'");
                }
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError(fp, e.what());
            } catch (const ValidationError& e) {
                throw ConfigError(fp, e.what());
            }
            return estimate_alpha_B(curve, family, c.get<double>("alpha"));
        });
    add("measure-geometry", "lemma1_chain", "nested parallelepipeds around derivative arcs", {"curve", "t", "h"},
        {"containmentSamples", "tolerance"}, [](const CheckContext& c) {
            return lemma1_chain(c.simple_curve(), c.get<double>("t"), c.get<double>("h"),
                                c.get<int>("containmentSamples", 1000), c.tolerance(1e-9))
                .report;
        });
    add("measure-geometry", "lemma1_conclusion", "growth of phi^(d-1) from the E_0 family", {"curve", "alpha"},
        {"samples", "B", "tolerance"}, [](const CheckContext& c) {
            const SimpleCurve curve = c.simple_curve();
            Rng rng(c.seed());
            std::vector<Lemma1Sample> s;
            const std::size_t n = c.get<std::size_t>("samples", 40);
            const double lo = curve.clamp(curve.a()), hi = curve.clamp(curve.b());
            while (s.size() < n) {
                double t = rng.uniform(lo, hi), u = rng.uniform(lo, hi);
                if (t > u) std::swap(t, u);
                if (u - t > 1e-3 * (hi - lo)) s.push_back({t, u});
            }
            std::optional<double> B;
            if (c.has("B")) B = c.get<double>("B");
            return lemma1_conclusion(curve, s, c.get<double>("alpha"), B, c.tolerance(1e-9));
        });
    add("measure-geometry", "K_u_geometry", "homogeneity of K", {"h", "alpha"}, {"lambdas"},
        [](const CheckContext& c) {
            const Vec h = c.get<Vec>("h");
            const Vec l = c.get<Vec>("lambdas", Vec{});
            return K_u_geometry(h, c.get<double>("alpha"), l);
        });
    add("measure-geometry", "sm_measure", "Monte Carlo measure of the K shells", {"d", "alpha"},
        {"mMin", "mMax", "samples", "halfWidth", "ratioTol"}, [](const CheckContext& c) {
            ShellOptions o;
            o.m_min = c.get<int>("mMin", o.m_min);
            o.m_max = c.get<int>("mMax", o.m_max);
            o.samples = c.get<std::size_t>("samples", o.samples);
            o.half_width = c.get<double>("halfWidth", o.half_width);
            o.ratio_tol = c.get<double>("ratioTol", o.ratio_tol);
            o.seed = c.seed();
            return sm_measure(c.get<int>("d"), c.get<double>("alpha"), o);
        });
    add("measure-geometry", "J_geq_K", "Jacobian of the sum map against sigma^(-1/alpha) K",
        {"curve", "sigma", "alpha"}, {"samples", "minGapRel"}, [](const CheckContext& c) {
            JKOptions o;
            o.samples = c.get<std::size_t>("samples", o.samples);
            o.min_gap_rel = c.get<double>("minGapRel", o.min_gap_rel);
            o.seed = c.seed();
            return check_J_geq_K(c.simple_curve(), c.get<double>("sigma"), c.get<double>("alpha"), o);
        });

    // spectral-probe
    auto tests_of = [](const CheckContext& c, const std::string& key) {
        std::vector<TestFunction> out;
        const Json& j = c.params().at(key);
        const Json arr = j.is_array() ? j : Json::array({j});
        for (std::size_t i = 0; i < arr.size(); ++i) {
            try {
                out.push_back(TestFunction::from_json(arr[i]));
            } catch (const ValidationError& e) {
                throw ConfigError(c.path(key) + "[" + std::to_string(i) + "]", e.what());
            }
        }
        return out;
    };
    add("spectral-probe", "empirical_ratio", "||ghat o gamma||_Q / ||g||_P across a curve family (exploratory)",
        {"curves", "tests"}, {"P", "Q", "weighted", "panels", "order"}, [tests_of](const CheckContext& c) {
            std::vector<NamedCurve> curves;
            const Json& refs = c.params().at("curves");
            if (!refs.is_array() || refs.empty()) throw ConfigError(c.path("curves"), "must be a nonempty array");
            for (std::size_t i = 0; i < refs.size(); ++i) {
                AnyCurve cv = resolve_curve_ref(c, refs[i], c.path("curves") + "[" + std::to_string(i) + "]");
                curves.push_back({curve_label(cv), std::move(cv)});
            }
            RatioOptions o;
            o.P = c.get<double>("P", o.P);
            o.Q = c.get<double>("Q", o.Q);
            o.weighted = c.get<bool>("weighted", o.weighted);
            o.panels = c.get<int>("panels", o.panels);
            o.order = c.get<int>("order", o.order);
            return empirical_ratio(curves, tests_of(c, "tests"), o);
        });
    add("spectral-probe", "dilation_sweep", "ratio drift under the curve's dilations", {"curve", "test", "factors"},
        {"P", "Q", "tolerance"}, [tests_of](const CheckContext& c) {
            const AnyCurve cv = c.curve();
            const auto* h = std::get_if<HomogeneousCurve>(&cv);
            if (!h) throw ConfigError(c.path("curve"), "a homogeneous curve is required here");
            const Vec f = c.get<Vec>("factors");
            return dilation_sweep(*h, tests_of(c, "test").front(), c.get<double>("P", 9.0 / 8.0),
                                  c.get<double>("Q", 1.5), f, c.tolerance(0.01));
        });
    add("spectral-probe", "homogeneous_rescale", "change of variables under the curve's dilations",
        {"curve", "k", "test"}, {"p", "tolerance"}, [tests_of](const CheckContext& c) {
            const AnyCurve cv = c.curve();
            const auto* h = std::get_if<HomogeneousCurve>(&cv);
            if (!h) throw ConfigError(c.path("curve"), "a homogeneous curve is required here");
            return homogeneous_rescale_check(*h, c.get<int>("k"), tests_of(c, "test").front(), c.get<double>("p", 2.0),
                                             c.tolerance(1e-9));
        });
    add("spectral-probe", "converse_scaling", "L^P norm of the pulled-back test function", {"E", "f", "P", "Q", "alpha"},
        {"curve", "tolerance"}, [tests_of](const CheckContext& c) {
            Parallelepiped E = [&] {
                try {
                    return Parallelepiped::from_json(c.params().at("E"));
                } catch (const ValidationError& e) {
                    throw ConfigError(c.path("E"), e.what());
                }
            }();
            ConverseOptions o;
            o.alpha = c.get<double>("alpha");
            o.tolerance = c.tolerance(1e-6);
            if (c.has("curve")) o.curve = c.curve();
            return converse_scaling_check(E, tests_of(c, "f").front(), c.get<double>("P"), c.get<double>("Q"), o);
        });
    return ops;
}

}  // namespace

const std::vector<OperationInfo>& operations() {
    static const std::vector<OperationInfo> ops = build_registry();
    return ops;
}

const OperationInfo* find_operation(const std::string& name) {
    for (const auto& op : operations())
        if (op.name == name) return &op;
    return nullptr;
}

// ---------------------------------------------------------------- config

ExperimentConfig parse_config(const Json& j, std::optional<std::uint64_t> seed_override) {
    if (!j.is_object()) throw ConfigError("$", "config must be an object");
    static const std::set<std::string> top = {"seed", "curves", "tolerances", "output", "checks"};
    for (const auto& [k, v] : j.items())
        if (!top.count(k)) throw ConfigError(k, "unknown key");

    ExperimentConfig cfg;
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw ConfigError("seed", "must be a nonnegative integer");
        if (j["seed"].is_number_integer() && j["seed"].get<long long>() < 0)
            throw ConfigError("seed", "must be a nonnegative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (seed_override) cfg.seed = *seed_override;

    if (j.contains("curves")) {
        if (!j["curves"].is_array()) throw ConfigError("curves", "must be an array");
        for (std::size_t i = 0; i < j["curves"].size(); ++i) {
            const Json& c = j["curves"][i];
            const std::string p = "curves[" + std::to_string(i) + "]";
            Json spec = c;
            if (spec.is_object()) spec.erase("name");
            curve_from_json(spec, p);  // validates
            cfg.curves.push_back(c);
        }
    }
    if (j.contains("tolerances")) {
        if (!j["tolerances"].is_object()) throw ConfigError("tolerances", "must be an object");
        for (const auto& [k, v] : j["tolerances"].items()) {
            if (!v.is_number()) throw ConfigError("tolerances." + k, "must be a number");
            cfg.tolerances[k] = v.get<double>();
        }
    }
    if (j.contains("output")) {
        if (!j["output"].is_string()) throw ConfigError("output", "must be a string");
        cfg.output = j["output"].get<std::string>();
    }
    if (j.contains("checks")) {
        if (!j["checks"].is_array()) throw ConfigError("checks", "must be an array");
        std::set<std::string> ids;
        for (std::size_t i = 0; i < j["checks"].size(); ++i) {
            const Json& c = j["checks"][i];
            const std::string p = "checks[" + std::to_string(i) + "]";
            if (!c.is_object()) throw ConfigError(p, "must be an object");
            for (const auto& [k, v] : c.items())
                if (k != "id" && k != "module" && k != "operation" && k != "parameters" && k != "seed")
                    throw ConfigError(p + "." + k, "unknown key");
            if (!c.contains("operation") || !c["operation"].is_string())
                throw ConfigError(p + ".operation", "missing or not a string");
            if (c.contains("id") && !c["id"].is_string()) throw ConfigError(p + ".id", "must be a string");
            if (c.contains("seed") && !c["seed"].is_number_unsigned())
                throw ConfigError(p + ".seed", "must be a nonnegative integer");
            CheckDescriptor d;
            d.operation = c["operation"].get<std::string>();
            const OperationInfo* op = find_operation(d.operation);
            if (!op) throw ConfigError(p + ".operation", "unknown operation '" + d.operation + "'");
            d.module = op->module;
            if (c.contains("module") && c["module"] != op->module)
                throw ConfigError(p + ".module", "operation '" + d.operation + "' belongs to " + op->module);
            d.id = c.contains("id") ? c["id"].get<std::string>() : d.operation + "-" + std::to_string(i);
            if (!ids.insert(d.id).second) throw ConfigError(p + ".id", "duplicate check id '" + d.id + "'");
            if (c.contains("parameters")) {
                if (!c["parameters"].is_object()) throw ConfigError(p + ".parameters", "must be an object");
                d.parameters = c["parameters"];
            }
            for (const auto& key : op->required)
                if (!d.parameters.contains(key)) throw ConfigError(p + ".parameters." + key, "missing");
            for (const auto& [k, v] : d.parameters.items()) {
                const bool known = std::find(op->required.begin(), op->required.end(), k) != op->required.end() ||
                                   std::find(op->optional.begin(), op->optional.end(), k) != op->optional.end();
                if (!known) throw ConfigError(p + ".parameters." + k, "unknown parameter");
            }
            d.seed = c.contains("seed") ? c["seed"].get<std::uint64_t>() : derive_seed(cfg.seed, d.id);
            cfg.checks.push_back(std::move(d));
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError("$", "cannot open config '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("$", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j, seed_override);
}

Json to_json(const ExperimentConfig& cfg) {
    Json j;
    j["seed"] = cfg.seed;
    j["curves"] = cfg.curves;
    j["tolerances"] = Json::object();
    for (const auto& [k, v] : cfg.tolerances) j["tolerances"][k] = v;
    j["output"] = cfg.output;
    j["checks"] = Json::array();
    for (const auto& c : cfg.checks)
        j["checks"].push_back(
            {{"id", c.id}, {"module", c.module}, {"operation", c.operation}, {"seed", c.seed}, {"parameters", c.parameters}});
    return j;
}

// ---------------------------------------------------------------- run

RunResult run(const ExperimentConfig& cfg, const RunOptions& opts) {
    const std::size_t n = cfg.checks.size();
    std::vector<CheckReport> reports(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            const auto& check = cfg.checks[i];
            const auto start = std::chrono::steady_clock::now();
            CheckReport r;
            try {
                r = find_operation(check.operation)->run(CheckContext(cfg, check));
            } catch (const std::exception& e) {
                r = CheckReport{};
                r.operation = check.operation;
                r.status = CheckStatus::Error;
                r.estimate = std::numeric_limits<double>::quiet_NaN();
                r.note(e.what());
            }
            r.check_id = check.id;
            r.timing_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            reports[i] = std::move(r);
        }
    };
    const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(std::max<std::size_t>(n, 1))));
    std::vector<std::thread> pool;
    for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    RunResult out;
    out.report["version"] = version();
    out.report["config"] = to_json(cfg);
    out.report["reports"] = Json::array();
    std::size_t passed = 0;
    for (const auto& r : reports) {
        out.report["reports"].push_back(to_json(r));
        passed += r.pass();
    }
    out.all_passed = passed == n;
    out.report["summary"] = {{"checks", n}, {"passed", passed}, {"failed", n - passed}};
    out.reports = std::move(reports);
    return out;
}

namespace {

std::string file_safe(const std::string& s) {
    std::string out;
    for (char ch : s) out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_') ? ch : '_';
    return out;
}

void ensure_parent(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

void write_text(const std::string& path, const std::string& text) {
    ensure_parent(path);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write '" + path + "'");
    os << text;
}

}  // namespace

std::vector<std::string> write_outputs(const RunResult& result, const std::string& prefix) {
    std::vector<std::string> written;
    const std::string report_path = prefix + "report.json";
    write_text(report_path, result.report.dump(2) + "\n");
    written.push_back(report_path);
    for (const auto& r : result.reports)
        for (const auto& [name, s] : r.series) {
            const std::string p = prefix + file_safe(r.check_id) + "." + file_safe(name) + ".csv";
            std::ostringstream os;
            s.write_csv(os);
            write_text(p, os.str());
            written.push_back(p);
        }
    return written;
}

PlotKind plot_kind_from_string(const std::string& s) {
    if (s == "ratio-vs-parameter") return PlotKind::RatioVsParameter;
    if (s == "measure-vs-scale") return PlotKind::MeasureVsScale;
    throw ValidationError("unknown plot kind '" + s + "'");
}

std::vector<std::string> emit_plot_data(const Json& report, PlotKind kind, const std::string& prefix) {
    struct Pick {
        const char* series;
        const char* x;
        const char* y;
    };
    static const std::vector<Pick> ratio_picks = {
        {"family", "curve", "maxRatio"}, {"dilation", "factor", "ratio"}, {"ratios", "t", "ratio"},
        {"ratios", "sample", "ratio"},   {"shells", "m", "ratio"},
    };
    static const std::vector<Pick> measure_picks = {
        {"measure", "measure", "lambda"}, {"shells", "m", "measure"}, {"chain", "k", "measure"}};
    const auto& picks = kind == PlotKind::RatioVsParameter ? ratio_picks : measure_picks;
    const std::string suffix = kind == PlotKind::RatioVsParameter ? "ratio-vs-parameter" : "measure-vs-scale";

    if (!report.is_object() || !report.contains("reports") || !report["reports"].is_array())
        throw Error("emit-plots: input is not a report document");
    std::vector<std::string> written;
    for (const auto& r : report["reports"]) {
        const CheckReport rep = report_from_json(r);
        for (const auto& p : picks) {
            auto it = rep.series.find(p.series);
            if (it == rep.series.end()) continue;
            const auto& cols = it->second.columns;
            const auto xi = std::find(cols.begin(), cols.end(), p.x);
            const auto yi = std::find(cols.begin(), cols.end(), p.y);
            if (xi == cols.end() || yi == cols.end()) continue;
            Series out;
            out.columns = {p.x, p.y};
            for (const auto& row : it->second.rows) out.add({row[xi - cols.begin()], row[yi - cols.begin()]});
            const std::string path = prefix + file_safe(rep.check_id) + "." + suffix + ".csv";
            std::ostringstream os;
            out.write_csv(os);
            write_text(path, os.str());
            written.push_back(path);
            break;
        }
    }
    if (!report["reports"].empty() && written.empty())
        throw Error("emit-plots: no report carries a series for " + suffix);
    return written;
}

}  // namespace rlab
