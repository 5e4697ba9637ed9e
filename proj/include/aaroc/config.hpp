#ifndef AAROC_CONFIG_HPP
#define AAROC_CONFIG_HPP

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "aaroc/burgers.hpp"
#include "aaroc/cavity.hpp"
#include "aaroc/greedy.hpp"

namespace aaroc {

using json = nlohmann::json;

struct ParameterSetSpec {
    long count = 0;
    std::string spacing = "uniform"; // "uniform" | "log-uniform"
    double lo = 0.0, hi = 0.0;       // defaults to the problem parameter domain
    bool has_domain = false;
};

struct ProbeSpec {
    double mu = 0.0;
    double t = 0.0;
};

// Everything needed to reproduce a run. Unknown keys are rejected so a
// typo cannot silently fall back to a default.
struct ExperimentConfig {
    std::string problem;       // "burgers" | "cavity"
    long n_cells = 200;        // burgers
    long nx = 32, ny = 32;     // cavity
    double dt = 0.0;
    double t_final = 0.0;
    double inflow = 2.0;       // burgers
    double lid_velocity = 1.0; // cavity
    double mu_lo = 0.0, mu_hi = 0.0;
    ParameterSetSpec training;
    ParameterSetSpec testing;
    OfflineMode mode = OfflineMode::AAROC;
    GreedyConfig greedy;
    std::vector<long> checkpoints;    // empty: every 5 plus N_max
    std::vector<ProbeSpec> probes;    // error-field dumps at the final basis size
};

inline OfflineMode parse_mode(const std::string& s) {
    if (s == "AAROC") return OfflineMode::AAROC;
    if (s == "AROC") return OfflineMode::AROC;
    if (s == "R2ROC") return OfflineMode::R2ROC;
    throw ValidationError("unknown mode '" + s + "' (expected AAROC, AROC or R2ROC)");
}

inline std::string mode_name(OfflineMode m) {
    switch (m) {
        case OfflineMode::AAROC: return "AAROC";
        case OfflineMode::AROC: return "AROC";
        default: return "R2ROC";
    }
}

namespace detail {

inline void reject_unknown_keys(const json& j, const std::string& where,
                                std::initializer_list<const char*> known) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) { ok = true; break; }
        if (!ok) throw ValidationError("unknown key '" + it.key() + "' in " + where);
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad value for '") + key + "': " + e.what());
    }
}

template <typename T>
T require(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ValidationError("missing key '" + std::string(key) + "' in " + where);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad value for '") + key + "': " + e.what());
    }
}

inline ParameterSetSpec parse_set_spec(const json& j, const std::string& where) {
    reject_unknown_keys(j, where, {"count", "spacing", "domain"});
    ParameterSetSpec s;
    s.count = require<long>(j, "count", where);
    s.spacing = get_or<std::string>(j, "spacing", "uniform");
    if (s.spacing != "uniform" && s.spacing != "log-uniform")
        throw ValidationError(where + ".spacing must be 'uniform' or 'log-uniform'");
    if (j.contains("domain")) {
        auto d = j.at("domain").get<std::vector<double>>();
        if (d.size() != 2) throw ValidationError(where + ".domain must be [lo, hi]");
        s.lo = d[0];
        s.hi = d[1];
        s.has_domain = true;
    }
    return s;
}

} // namespace detail

inline ExperimentConfig parse_config(const json& j) {
    detail::reject_unknown_keys(
        j, "config",
        {"problem", "grid", "dt", "t_final", "inflow", "lid_velocity", "parameter_domain",
         "training", "testing", "mode", "greedy", "checkpoints", "probes"});
    ExperimentConfig c;
    c.problem = detail::require<std::string>(j, "problem", "config");
    if (c.problem != "burgers" && c.problem != "cavity")
        throw ValidationError("problem must be 'burgers' or 'cavity'");
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        if (c.problem == "burgers") {
            detail::reject_unknown_keys(g, "grid", {"n_cells"});
            c.n_cells = detail::require<long>(g, "n_cells", "grid");
        } else {
            detail::reject_unknown_keys(g, "grid", {"nx", "ny"});
            c.nx = detail::require<long>(g, "nx", "grid");
            c.ny = detail::require<long>(g, "ny", "grid");
        }
    }
    c.dt = detail::require<double>(j, "dt", "config");
    c.t_final = detail::require<double>(j, "t_final", "config");
    c.inflow = detail::get_or<double>(j, "inflow", 2.0);
    c.lid_velocity = detail::get_or<double>(j, "lid_velocity", 1.0);
    auto dom = detail::require<std::vector<double>>(j, "parameter_domain", "config");
    if (dom.size() != 2 || !(dom[0] < dom[1]))
        throw ValidationError("parameter_domain must be [lo, hi] with lo < hi");
    c.mu_lo = dom[0];
    c.mu_hi = dom[1];
    c.training = detail::parse_set_spec(j.at("training"), "training");
    c.testing = detail::parse_set_spec(j.at("testing"), "testing");
    if (!c.training.has_domain) { c.training.lo = c.mu_lo; c.training.hi = c.mu_hi; }
    if (!c.testing.has_domain) { c.testing.lo = c.mu_lo; c.testing.hi = c.mu_hi; }
    c.mode = parse_mode(detail::get_or<std::string>(j, "mode", "AAROC"));
    if (j.contains("greedy")) {
        const json& g = j.at("greedy");
        detail::reject_unknown_keys(g, "greedy",
                                    {"gamma", "n0", "p_adap", "n_add", "n_adap_incre",
                                     "n_adap_max", "N_max", "N_tpar_max", "eps_tol", "seed",
                                     "mu1_index"});
        c.greedy.gamma = detail::get_or<double>(g, "gamma", c.greedy.gamma);
        c.greedy.n0 = detail::get_or<long>(g, "n0", c.greedy.n0);
        c.greedy.p_adap = detail::get_or<double>(g, "p_adap", c.greedy.p_adap);
        c.greedy.n_add = detail::get_or<long>(g, "n_add", c.greedy.n_add);
        c.greedy.n_adap_incre = detail::get_or<long>(g, "n_adap_incre", c.greedy.n_adap_incre);
        c.greedy.n_adap_max = detail::get_or<long>(g, "n_adap_max", c.greedy.n_adap_max);
        c.greedy.N_max = detail::get_or<long>(g, "N_max", c.greedy.N_max);
        c.greedy.N_tpar_max = detail::get_or<long>(g, "N_tpar_max", c.greedy.N_tpar_max);
        c.greedy.eps_tol = detail::get_or<double>(g, "eps_tol", c.greedy.eps_tol);
        c.greedy.seed = detail::get_or<uint64_t>(g, "seed", c.greedy.seed);
        c.greedy.mu1_index = detail::get_or<long>(g, "mu1_index", c.greedy.mu1_index);
    }
    c.checkpoints = detail::get_or<std::vector<long>>(j, "checkpoints", {});
    if (j.contains("probes")) {
        for (const json& p : j.at("probes")) {
            detail::reject_unknown_keys(p, "probes[]", {"mu", "t"});
            c.probes.push_back({detail::require<double>(p, "mu", "probes[]"),
                                detail::require<double>(p, "t", "probes[]")});
        }
    }
    return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open config file " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config(buf.str());
}

// Canonical serialization (sorted keys, all defaults materialized); its
// bytes feed the config hash and the artifact's embedded copy.
inline json to_json(const ExperimentConfig& c) {
    json j;
    j["problem"] = c.problem;
    if (c.problem == "burgers") {
        j["grid"] = {{"n_cells", c.n_cells}};
        j["inflow"] = c.inflow;
    } else {
        j["grid"] = {{"nx", c.nx}, {"ny", c.ny}};
        j["lid_velocity"] = c.lid_velocity;
    }
    j["dt"] = c.dt;
    j["t_final"] = c.t_final;
    j["parameter_domain"] = {c.mu_lo, c.mu_hi};
    auto set_json = [](const ParameterSetSpec& s) {
        return json{{"count", s.count}, {"spacing", s.spacing}, {"domain", {s.lo, s.hi}}};
    };
    j["training"] = set_json(c.training);
    j["testing"] = set_json(c.testing);
    j["mode"] = mode_name(c.mode);
    j["greedy"] = {{"gamma", c.greedy.gamma},
                   {"n0", c.greedy.n0},
                   {"p_adap", c.greedy.p_adap},
                   {"n_add", c.greedy.n_add},
                   {"n_adap_incre", c.greedy.n_adap_incre},
                   {"n_adap_max", c.greedy.n_adap_max},
                   {"N_max", c.greedy.N_max},
                   {"N_tpar_max", c.greedy.N_tpar_max},
                   {"eps_tol", c.greedy.eps_tol},
                   {"seed", c.greedy.seed},
                   {"mu1_index", c.greedy.mu1_index}};
    j["checkpoints"] = c.checkpoints;
    j["probes"] = json::array();
    for (const auto& p : c.probes) j["probes"].push_back({{"mu", p.mu}, {"t", p.t}});
    return j;
}

inline std::string canonical_config_string(const ExperimentConfig& c) {
    return to_json(c).dump();
}

inline std::shared_ptr<FomProblem> make_problem(const ExperimentConfig& c) {
    const auto grid = TimeGrid::from_final_time(c.dt, c.t_final);
    if (c.problem == "burgers")
        return std::make_shared<BurgersProblem>(c.n_cells, grid, c.inflow);
    return std::make_shared<CavityProblem>(c.nx, c.ny, grid, c.lid_velocity);
}

} // namespace aaroc

#endif
