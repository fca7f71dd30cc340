// config.hpp — JSON run configuration: schema validation, parsing and
// canonical serialization.
//
// Unknown keys are rejected at every level so typos fail loudly.  The
// canonical form round-trips: parse(serialize(parse(j))) == parse(j).
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mendel/integrate.hpp"
#include "mendel/models.hpp"
#include "mendel/rates.hpp"

namespace mendel {

using json = nlohmann::json;

// Schema or semantic error in a config file; `field` names the offender.
struct ConfigError : std::runtime_error {
    std::string field;
    ConfigError(std::string field_, const std::string& what)
        : std::runtime_error(field_ + ": " + what), field(std::move(field_)) {}
};

namespace cfgdetail {

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                       const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError(where + "." + it.key(), "unknown key");
    }
}

inline double get_number(const json& obj, const std::string& where) {
    if (!obj.is_number()) throw ConfigError(where, "expected a number");
    return obj.get<double>();
}

inline Vec3 get_vec3(const json& obj, const std::string& where) {
    if (!obj.is_array() || obj.size() != 3)
        throw ConfigError(where, "expected an array of 3 numbers");
    return {get_number(obj[0], where + "[0]"), get_number(obj[1], where + "[1]"),
            get_number(obj[2], where + "[2]")};
}

inline std::vector<double> get_numbers(const json& obj, const std::string& where) {
    if (!obj.is_array()) throw ConfigError(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < obj.size(); ++i)
        out.push_back(get_number(obj[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

}  // namespace cfgdetail

inline RateFunction rate_from_json(const json& j, const std::string& where) {
    using cfgdetail::check_keys;
    using cfgdetail::get_number;
    using cfgdetail::get_numbers;
    if (!j.is_object() || !j.contains("family"))
        throw ConfigError(where, "expected an object with a \"family\" key");
    const std::string fam = j["family"].is_string()
                                ? j["family"].get<std::string>()
                                : throw ConfigError(where + ".family",
                                                    "expected a string");
    try {
        if (fam == "tabulated") {
            check_keys(j, {"family", "z", "f", "increasing"}, where);
            if (!j.contains("z") || !j.contains("f") || !j.contains("increasing"))
                throw ConfigError(where, "tabulated needs z, f and increasing");
            if (!j["increasing"].is_boolean())
                throw ConfigError(where + ".increasing", "expected a boolean");
            return RateFunction::tabulated(get_numbers(j["z"], where + ".z"),
                                           get_numbers(j["f"], where + ".f"),
                                           j["increasing"].get<bool>());
        }
        if (fam == "scaled_reciprocal") {
            check_keys(j, {"family", "scale", "inner"}, where);
            if (!j.contains("scale") || !j.contains("inner"))
                throw ConfigError(where, "scaled_reciprocal needs scale and inner");
            return RateFunction::scaled_reciprocal(
                get_number(j["scale"], where + ".scale"),
                rate_from_json(j["inner"], where + ".inner"));
        }
        if (fam == "shifted") {
            check_keys(j, {"family", "offset", "inner"}, where);
            if (!j.contains("offset") || !j.contains("inner"))
                throw ConfigError(where, "shifted needs offset and inner");
            return RateFunction::shifted(get_number(j["offset"], where + ".offset"),
                                         rate_from_json(j["inner"], where + ".inner"));
        }
        check_keys(j, {"family", "params"}, where);
        if (!j.contains("params"))
            throw ConfigError(where, "missing \"params\" array");
        const std::vector<double> p = get_numbers(j["params"], where + ".params");
        auto need = [&](std::size_t n) {
            if (p.size() != n)
                throw ConfigError(where + ".params",
                                  "expected " + std::to_string(n) + " parameters");
        };
        if (fam == "rational_decay") {
            need(2);
            return RateFunction::rational_decay(p[0], p[1]);
        }
        if (fam == "exp_decay") {
            need(2);
            return RateFunction::exp_decay(p[0], p[1]);
        }
        if (fam == "affine_growth") {
            need(2);
            return RateFunction::affine_growth(p[0], p[1]);
        }
        if (fam == "power_growth") {
            need(3);
            return RateFunction::power_growth(p[0], p[1], p[2]);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where, e.what());
    }
    throw ConfigError(where + ".family", "unknown rate family \"" + fam + "\"");
}

inline json rate_to_json(const RateFunction& r) {
    json j;
    switch (r.family()) {
        case RateFunction::Family::RationalDecay:
            j["family"] = "rational_decay";
            j["params"] = r.params();
            break;
        case RateFunction::Family::ExpDecay:
            j["family"] = "exp_decay";
            j["params"] = r.params();
            break;
        case RateFunction::Family::AffineGrowth:
            j["family"] = "affine_growth";
            j["params"] = r.params();
            break;
        case RateFunction::Family::PowerGrowth:
            j["family"] = "power_growth";
            j["params"] = r.params();
            break;
        case RateFunction::Family::Tabulated:
            j["family"] = "tabulated";
            j["z"] = r.knots_z();
            j["f"] = r.knots_f();
            j["increasing"] = r.tab_increasing();
            break;
        case RateFunction::Family::ScaledReciprocal:
            j["family"] = "scaled_reciprocal";
            j["scale"] = r.params()[0];
            j["inner"] = rate_to_json(*r.inner());
            break;
        case RateFunction::Family::Shifted:
            j["family"] = "shifted";
            j["offset"] = r.params()[0];
            j["inner"] = rate_to_json(*r.inner());
            break;
    }
    return j;
}

struct RunConfig {
    std::uint64_t seed = 42;
    std::string kind;  // "fast", "slow" or "full"
    std::optional<ReducedModel> reduced;
    std::optional<TwoPhaseParams> full;
    std::optional<GenotypeVector> x0;
    std::optional<TwoPhaseState> state0;
    SimConfig sim;
    std::string csv_path;
    std::string report_path;
    std::vector<std::string> checks;
    std::map<std::string, double> tolerances;
    std::vector<double> eps;          // slow-manifold epsilon ladder
    double manifold_horizon = 50.0;
    int samples = 1000;               // sampling-based checks
    std::optional<std::string> sweep_path;  // JSON pointer into the raw config
    std::vector<double> sweep_values;
};

inline RunConfig parse_config(const json& j) {
    using namespace cfgdetail;
    RunConfig cfg;
    check_keys(j, {"seed", "model", "initial", "sim", "output", "verify", "sweep"},
               "config");

    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
            throw ConfigError("config.seed", "expected a nonnegative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }

    if (!j.contains("model")) throw ConfigError("config.model", "missing section");
    const json& m = j["model"];
    if (!m.is_object() || !m.contains("kind") || !m["kind"].is_string())
        throw ConfigError("config.model.kind", "missing or non-string");
    cfg.kind = m["kind"].get<std::string>();

    auto rate_triple = [&](const json& arr, const std::string& where) {
        if (!arr.is_array() || arr.size() != 3)
            throw ConfigError(where, "expected an array of 3 rate functions");
        return std::array<RateFunction, 3>{rate_from_json(arr[0], where + "[0]"),
                                           rate_from_json(arr[1], where + "[1]"),
                                           rate_from_json(arr[2], where + "[2]")};
    };
    auto weights = [&](const char* key, const std::string& where) -> Vec3 {
        if (!m.contains(key)) return {1.0, 1.0, 1.0};
        const Vec3 out = get_vec3(m[key], where);
        for (double c : out)
            if (!(c > 0.0)) throw ConfigError(where, "weights must be positive");
        return out;
    };

    try {
        if (cfg.kind == "fast" || cfg.kind == "slow") {
            check_keys(m, {"kind", "m", "mu", "v", "w"}, "config.model");
            if (!m.contains("m") || !m.contains("mu"))
                throw ConfigError("config.model", "reduced models need m and mu");
            cfg.reduced = ReducedModel{
                cfg.kind == "fast" ? ReductionKind::Fast : ReductionKind::Slow,
                RateModel(rate_triple(m["m"], "config.model.m"),
                          rate_triple(m["mu"], "config.model.mu"),
                          weights("v", "config.model.v"),
                          weights("w", "config.model.w"))};
        } else if (cfg.kind == "full") {
            check_keys(m,
                       {"kind", "omega", "nu", "mu_larva", "mu_adult", "v", "w",
                        "epsilon", "scaling"},
                       "config.model");
            if (!m.contains("mu_larva") || !m.contains("mu_adult"))
                throw ConfigError("config.model",
                                  "full models need mu_larva and mu_adult");
            Vec3 omega{1.0, 1.0, 1.0}, nu{1.0, 1.0, 1.0};
            if (m.contains("omega")) omega = get_vec3(m["omega"], "config.model.omega");
            if (m.contains("nu")) nu = get_vec3(m["nu"], "config.model.nu");
            double eps = 1.0;
            if (m.contains("epsilon"))
                eps = get_number(m["epsilon"], "config.model.epsilon");
            PhaseScaling scaling = PhaseScaling::None;
            if (m.contains("scaling")) {
                const std::string s = m["scaling"].is_string()
                                          ? m["scaling"].get<std::string>()
                                          : throw ConfigError("config.model.scaling",
                                                              "expected a string");
                if (s == "none")
                    scaling = PhaseScaling::None;
                else if (s == "adult_fast")
                    scaling = PhaseScaling::AdultFast;
                else if (s == "larva_fast")
                    scaling = PhaseScaling::LarvaFast;
                else
                    throw ConfigError("config.model.scaling",
                                      "expected none, adult_fast or larva_fast");
            }
            cfg.full = TwoPhaseParams(
                omega, nu, rate_triple(m["mu_larva"], "config.model.mu_larva"),
                rate_triple(m["mu_adult"], "config.model.mu_adult"),
                weights("v", "config.model.v"), weights("w", "config.model.w"), eps,
                scaling);
        } else {
            throw ConfigError("config.model.kind",
                              "expected \"fast\", \"slow\" or \"full\"");
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config.model", e.what());
    }

    if (j.contains("initial")) {
        const json& init = j["initial"];
        check_keys(init, {"x0", "L0", "A0"}, "config.initial");
        if (init.contains("x0")) {
            if (init.contains("L0") || init.contains("A0"))
                throw ConfigError("config.initial", "give either x0 or (L0, A0)");
            cfg.x0 = GenotypeVector(get_vec3(init["x0"], "config.initial.x0"));
        } else if (init.contains("L0") && init.contains("A0")) {
            cfg.state0 = TwoPhaseState{
                GenotypeVector(get_vec3(init["L0"], "config.initial.L0")),
                GenotypeVector(get_vec3(init["A0"], "config.initial.A0"))};
        } else if (init.contains("L0") || init.contains("A0")) {
            throw ConfigError("config.initial", "L0 and A0 must come together");
        }
    }
    if (cfg.kind == "full" && cfg.x0 && !cfg.state0)
        throw ConfigError("config.initial", "full models need (L0, A0)");
    if (cfg.kind != "full" && cfg.state0)
        throw ConfigError("config.initial", "reduced models take x0, not (L0, A0)");

    if (j.contains("sim")) {
        const json& s = j["sim"];
        check_keys(s,
                   {"t_end", "dt", "method", "abs_tol", "rel_tol", "record_every",
                    "equilibrium_tol"},
                   "config.sim");
        if (s.contains("t_end")) cfg.sim.t_end = get_number(s["t_end"], "config.sim.t_end");
        if (s.contains("dt")) cfg.sim.dt = get_number(s["dt"], "config.sim.dt");
        if (s.contains("abs_tol"))
            cfg.sim.abs_tol = get_number(s["abs_tol"], "config.sim.abs_tol");
        if (s.contains("rel_tol"))
            cfg.sim.rel_tol = get_number(s["rel_tol"], "config.sim.rel_tol");
        if (s.contains("record_every"))
            cfg.sim.record_every = get_number(s["record_every"], "config.sim.record_every");
        if (s.contains("equilibrium_tol"))
            cfg.sim.equilibrium_tol =
                get_number(s["equilibrium_tol"], "config.sim.equilibrium_tol");
        if (s.contains("method")) {
            const std::string meth = s["method"].is_string()
                                         ? s["method"].get<std::string>()
                                         : throw ConfigError("config.sim.method",
                                                             "expected a string");
            if (meth == "rk4")
                cfg.sim.method = IntegrationMethod::RK4Fixed;
            else if (meth == "rk45")
                cfg.sim.method = IntegrationMethod::RK45Adaptive;
            else
                throw ConfigError("config.sim.method", "expected \"rk4\" or \"rk45\"");
        }
        try {
            cfg.sim.check();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("config.sim", e.what());
        }
    }

    if (j.contains("output")) {
        const json& o = j["output"];
        check_keys(o, {"csv", "report"}, "config.output");
        if (o.contains("csv")) {
            if (!o["csv"].is_string())
                throw ConfigError("config.output.csv", "expected a string");
            cfg.csv_path = o["csv"].get<std::string>();
        }
        if (o.contains("report")) {
            if (!o["report"].is_string())
                throw ConfigError("config.output.report", "expected a string");
            cfg.report_path = o["report"].get<std::string>();
        }
    }

    if (j.contains("verify")) {
        const json& v = j["verify"];
        check_keys(v, {"checks", "tolerances", "eps", "horizon", "samples"},
                   "config.verify");
        if (v.contains("checks")) {
            if (!v["checks"].is_array())
                throw ConfigError("config.verify.checks", "expected an array");
            for (const auto& c : v["checks"]) {
                if (!c.is_string())
                    throw ConfigError("config.verify.checks", "expected strings");
                const std::string name = c.get<std::string>();
                static const char* known[] = {"hardy_weinberg", "selection_convergence",
                                              "rate_ordering", "slow_manifold",
                                              "boundedness"};
                bool ok = false;
                for (const char* k : known)
                    if (name == k) ok = true;
                if (!ok)
                    throw ConfigError("config.verify.checks",
                                      "unknown check \"" + name + "\"");
                cfg.checks.push_back(name);
            }
        }
        if (v.contains("tolerances")) {
            if (!v["tolerances"].is_object())
                throw ConfigError("config.verify.tolerances", "expected an object");
            for (auto it = v["tolerances"].begin(); it != v["tolerances"].end(); ++it)
                cfg.tolerances[it.key()] = get_number(
                    it.value(), "config.verify.tolerances." + it.key());
        }
        if (v.contains("eps"))
            cfg.eps = get_numbers(v["eps"], "config.verify.eps");
        if (v.contains("horizon"))
            cfg.manifold_horizon = get_number(v["horizon"], "config.verify.horizon");
        if (v.contains("samples")) {
            if (!v["samples"].is_number_integer() || v["samples"].get<int>() <= 0)
                throw ConfigError("config.verify.samples", "expected a positive integer");
            cfg.samples = v["samples"].get<int>();
        }
    }

    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        check_keys(s, {"path", "values"}, "config.sweep");
        if (!s.contains("path") || !s["path"].is_string())
            throw ConfigError("config.sweep.path", "missing or non-string");
        if (!s.contains("values"))
            throw ConfigError("config.sweep.values", "missing value list");
        cfg.sweep_path = s["path"].get<std::string>();
        cfg.sweep_values = get_numbers(s["values"], "config.sweep.values");
    }
    return cfg;
}

inline json config_to_json(const RunConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;

    json m;
    m["kind"] = cfg.kind;
    if (cfg.reduced) {
        const RateModel& r = cfg.reduced->rates;
        m["m"] = {rate_to_json(r.m[0]), rate_to_json(r.m[1]), rate_to_json(r.m[2])};
        m["mu"] = {rate_to_json(r.mu[0]), rate_to_json(r.mu[1]), rate_to_json(r.mu[2])};
        m["v"] = r.v;
        m["w"] = r.w;
    } else if (cfg.full) {
        const TwoPhaseParams& p = *cfg.full;
        m["omega"] = p.omega;
        m["nu"] = p.nu;
        m["mu_larva"] = {rate_to_json(p.mu_larva[0]), rate_to_json(p.mu_larva[1]),
                         rate_to_json(p.mu_larva[2])};
        m["mu_adult"] = {rate_to_json(p.mu_adult[0]), rate_to_json(p.mu_adult[1]),
                         rate_to_json(p.mu_adult[2])};
        m["v"] = p.v;
        m["w"] = p.w;
        m["epsilon"] = p.epsilon;
        m["scaling"] = p.scaling == PhaseScaling::None
                           ? "none"
                           : (p.scaling == PhaseScaling::AdultFast ? "adult_fast"
                                                                   : "larva_fast");
    }
    j["model"] = m;

    if (cfg.x0) j["initial"]["x0"] = cfg.x0->to_array();
    if (cfg.state0) {
        j["initial"]["L0"] = cfg.state0->L.to_array();
        j["initial"]["A0"] = cfg.state0->A.to_array();
    }

    json s;
    s["t_end"] = cfg.sim.t_end;
    s["dt"] = cfg.sim.dt;
    s["method"] = cfg.sim.method == IntegrationMethod::RK4Fixed ? "rk4" : "rk45";
    s["abs_tol"] = cfg.sim.abs_tol;
    s["rel_tol"] = cfg.sim.rel_tol;
    s["record_every"] = cfg.sim.record_every;
    s["equilibrium_tol"] = cfg.sim.equilibrium_tol;
    j["sim"] = s;

    if (!cfg.csv_path.empty()) j["output"]["csv"] = cfg.csv_path;
    if (!cfg.report_path.empty()) j["output"]["report"] = cfg.report_path;

    if (!cfg.checks.empty() || !cfg.tolerances.empty() || !cfg.eps.empty()) {
        json v;
        v["checks"] = cfg.checks;
        if (!cfg.tolerances.empty()) v["tolerances"] = cfg.tolerances;
        if (!cfg.eps.empty()) v["eps"] = cfg.eps;
        v["horizon"] = cfg.manifold_horizon;
        v["samples"] = cfg.samples;
        j["verify"] = v;
    }

    if (cfg.sweep_path) {
        j["sweep"]["path"] = *cfg.sweep_path;
        j["sweep"]["values"] = cfg.sweep_values;
    }
    return j;
}

}  // namespace mendel
