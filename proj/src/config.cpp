#include "qlw/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qlw/errors.hpp"

namespace qlw {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& path) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw DomainError("config: unknown key \"" + path + key + "\"");
}

double want_number(const json& obj, const char* key, double fallback, const std::string& path) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw DomainError("config: \"" + path + key + "\" must be a number");
    return v.get<double>();
}

int want_int(const json& obj, const char* key, int fallback, const std::string& path) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        throw DomainError("config: \"" + path + key + "\" must be an integer");
    return v.get<int>();
}

bool want_bool(const json& obj, const char* key, bool fallback, const std::string& path) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw DomainError("config: \"" + path + key + "\" must be a boolean");
    return v.get<bool>();
}

DataFamilySpec parse_family(const json& obj, const std::string& path) {
    reject_unknown_keys(obj, {"family", "amplitude", "angular_mode", "angular_weight"}, path);
    DataFamilySpec spec;
    if (obj.contains("family")) spec.family = obj.at("family").get<std::string>();
    spec.amplitude = want_number(obj, "amplitude", 1.0, path);
    spec.angular_mode = want_int(obj, "angular_mode", 0, path);
    spec.angular_weight = want_number(obj, "angular_weight", 0.0, path);
    if (spec.family != "zero" && spec.family != "bump" && spec.family != "modulated_bump")
        throw DomainError("config: \"" + path + "family\" must be zero, bump or modulated_bump");
    return spec;
}

SupportedField make_field(const DataFamilySpec& spec, double M) {
    if (spec.family == "zero") return zero_field(M);
    if (spec.family == "bump") return bump_field(spec.amplitude, M);
    return modulated_bump_field(spec.amplitude, M, spec.angular_mode, spec.angular_weight);
}

json family_json(const DataFamilySpec& spec) {
    return json{{"family", spec.family},
                {"amplitude", spec.amplitude},
                {"angular_mode", spec.angular_mode},
                {"angular_weight", spec.angular_weight}};
}

} // namespace

ProblemConfig parse_config_text(const std::string& text, const std::string& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        throw DomainError(std::string("config: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw DomainError("config: top level must be an object");
    reject_unknown_keys(doc,
                        {"speeds", "coefficients", "coefficients_inline", "initial_data",
                         "epsilon", "epsilons", "grid", "cfl", "t_max", "blowup_threshold",
                         "blowup_factor", "output_cadence", "radiation", "riccati",
                         "scaling_tolerance", "parallel", "allow_structure_violation",
                         "output_dir"},
                        "");

    ProblemConfig cfg;
    if (!doc.contains("speeds") || !doc.at("speeds").is_array())
        throw DomainError("config: \"speeds\" array is required");
    cfg.speeds = doc.at("speeds").get<std::vector<double>>();
    {
        double prev = 0.0;
        for (double c : cfg.speeds) {
            if (!(c > prev))
                throw DomainError("config: \"speeds\" must be strictly increasing and positive "
                                  "(0 < c_1 < c_2 < ... < c_m)");
            prev = c;
        }
        if (cfg.speeds.empty()) throw DomainError("config: \"speeds\" must not be empty");
    }

    if (doc.contains("coefficients") && doc.contains("coefficients_inline"))
        throw DomainError("config: give either \"coefficients\" or \"coefficients_inline\"");
    if (doc.contains("coefficients")) {
        std::filesystem::path p = doc.at("coefficients").get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        cfg.coefficients_path = p.string();
        if (!std::filesystem::exists(cfg.coefficients_path))
            throw DomainError("config: coefficient file does not exist: " + cfg.coefficients_path);
    } else if (doc.contains("coefficients_inline")) {
        cfg.coefficients_inline_json = doc.at("coefficients_inline").dump();
    } else {
        cfg.coefficients_inline_json = "[]";
    }

    if (doc.contains("initial_data")) {
        const json& idata = doc.at("initial_data");
        reject_unknown_keys(idata, {"support_radius", "components"}, "initial_data.");
        cfg.support_radius = want_number(idata, "support_radius", 1.0, "initial_data.");
        if (!(cfg.support_radius > 0.0))
            throw DomainError("config: \"initial_data.support_radius\" must be positive");
        if (idata.contains("components")) {
            const json& comps = idata.at("components");
            if (!comps.is_array())
                throw DomainError("config: \"initial_data.components\" must be an array");
            int ci = 0;
            for (const json& comp : comps) {
                const std::string path =
                    "initial_data.components[" + std::to_string(ci) + "].";
                reject_unknown_keys(comp, {"f", "g"}, path);
                cfg.f_specs.push_back(comp.contains("f")
                                          ? parse_family(comp.at("f"), path + "f.")
                                          : DataFamilySpec{});
                cfg.g_specs.push_back(comp.contains("g")
                                          ? parse_family(comp.at("g"), path + "g.")
                                          : DataFamilySpec{});
                ++ci;
            }
        }
    }
    while (cfg.f_specs.size() < cfg.speeds.size()) {
        cfg.f_specs.push_back(DataFamilySpec{});
        cfg.g_specs.push_back(DataFamilySpec{});
    }
    if (cfg.f_specs.size() != cfg.speeds.size())
        throw DomainError("config: initial_data must list one component per speed");

    cfg.epsilon = want_number(doc, "epsilon", 0.1, "");
    if (!(cfg.epsilon > 0.0)) throw DomainError("config: \"epsilon\" must be positive");
    if (doc.contains("epsilons")) {
        cfg.epsilons = doc.at("epsilons").get<std::vector<double>>();
        for (double e : cfg.epsilons)
            if (!(e > 0.0)) throw DomainError("config: \"epsilons\" entries must be positive");
    } else {
        cfg.epsilons = {cfg.epsilon};
    }

    if (doc.contains("grid")) {
        const json& grid = doc.at("grid");
        reject_unknown_keys(grid, {"extent", "nx"}, "grid.");
        cfg.grid.extent = want_number(grid, "extent", 4.0, "grid.");
        cfg.grid.nx = want_int(grid, "nx", 201, "grid.");
    }
    cfg.cfl = want_number(doc, "cfl", 0.45, "");
    cfg.t_max = want_number(doc, "t_max", 1.0, "");
    cfg.blowup_threshold = want_number(doc, "blowup_threshold", 0.0, "");
    cfg.blowup_factor = want_number(doc, "blowup_factor", 1e3, "");
    cfg.output_cadence = want_number(doc, "output_cadence", 0.05, "");

    if (doc.contains("radiation")) {
        const json& rad = doc.at("radiation");
        reject_unknown_keys(rad, {"rho_min", "n_rho", "n_omega", "n_line", "n_abel", "h_s_factor"},
                            "radiation.");
        cfg.radiation.rho_min = want_number(rad, "rho_min", -8.0, "radiation.");
        cfg.radiation.n_rho = want_int(rad, "n_rho", 257, "radiation.");
        cfg.radiation.n_omega = want_int(rad, "n_omega", 64, "radiation.");
        cfg.radiation.params.n_line = want_int(rad, "n_line", 128, "radiation.");
        cfg.radiation.params.n_abel = want_int(rad, "n_abel", 96, "radiation.");
        cfg.radiation.params.h_s_factor = want_number(rad, "h_s_factor", 1e-4, "radiation.");
    }
    if (doc.contains("riccati")) {
        const json& ric = doc.at("riccati");
        reject_unknown_keys(ric,
                            {"alpha", "w0", "t0", "t1", "forcing_amplitude", "forcing_exponent",
                             "tolerance"},
                            "riccati.");
        cfg.riccati.alpha = want_number(ric, "alpha", 1.0, "riccati.");
        cfg.riccati.w0 = want_number(ric, "w0", 1.0, "riccati.");
        cfg.riccati.t0 = want_number(ric, "t0", 0.0, "riccati.");
        cfg.riccati.t1 = want_number(ric, "t1", 10.0, "riccati.");
        cfg.riccati.forcing_amplitude = want_number(ric, "forcing_amplitude", 0.0, "riccati.");
        cfg.riccati.forcing_exponent = want_number(ric, "forcing_exponent", 1.25, "riccati.");
        cfg.riccati.tolerance = want_number(ric, "tolerance", 1e-10, "riccati.");
    }
    cfg.scaling_tolerance = want_number(doc, "scaling_tolerance", 0.35, "");
    cfg.parallel = want_bool(doc, "parallel", true, "");
    cfg.allow_structure_violation = want_bool(doc, "allow_structure_violation", false, "");
    if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
    return cfg;
}

ProblemConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("config: file not readable: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return parse_config_text(buf.str(), dir);
}

SpeedVector ProblemConfig::make_speeds() const { return SpeedVector(speeds); }

CoefficientSet ProblemConfig::make_coefficients() const {
    if (!coefficients_path.empty()) return load_coefficients(coefficients_path, m());
    return parse_coefficients(coefficients_inline_json, m());
}

InitialDataSet ProblemConfig::make_data() const {
    InitialDataSet data;
    data.m = m();
    data.M = support_radius;
    for (int i = 0; i < m(); ++i) {
        data.f.push_back(make_field(f_specs[static_cast<std::size_t>(i)], support_radius));
        data.g.push_back(make_field(g_specs[static_cast<std::size_t>(i)], support_radius));
    }
    return data;
}

SimConfig ProblemConfig::make_sim_config() const {
    SimConfig sim(make_coefficients(), make_speeds(), make_data(), epsilon, grid, t_max);
    sim.cfl = cfl;
    sim.blowup_threshold = blowup_threshold;
    sim.blowup_factor = blowup_factor;
    sim.output_cadence = output_cadence;
    sim.parallel = parallel;
    return sim;
}

RiccatiProblem ProblemConfig::make_riccati() const {
    RiccatiProblem p;
    p.alpha = riccati.alpha;
    p.w0 = riccati.w0;
    p.t0 = riccati.t0;
    p.t1 = riccati.t1;
    if (riccati.forcing_amplitude != 0.0) {
        const double a = riccati.forcing_amplitude, e = riccati.forcing_exponent;
        p.q = [a, e](double t) { return a * std::pow(1.0 + t, -e); };
    }
    return p;
}

std::string ProblemConfig::resolved_json() const {
    json comps = json::array();
    for (std::size_t i = 0; i < f_specs.size(); ++i)
        comps.push_back(json{{"f", family_json(f_specs[i])}, {"g", family_json(g_specs[i])}});

    json doc{
        {"speeds", speeds},
        {"initial_data", {{"support_radius", support_radius}, {"components", comps}}},
        {"epsilon", epsilon},
        {"epsilons", epsilons},
        {"grid", {{"extent", grid.extent}, {"nx", grid.nx}}},
        {"cfl", cfl},
        {"t_max", t_max},
        {"blowup_threshold", blowup_threshold},
        {"blowup_factor", blowup_factor},
        {"output_cadence", output_cadence},
        {"radiation",
         {{"rho_min", radiation.rho_min},
          {"n_rho", radiation.n_rho},
          {"n_omega", radiation.n_omega},
          {"n_line", radiation.params.n_line},
          {"n_abel", radiation.params.n_abel},
          {"h_s_factor", radiation.params.h_s_factor}}},
        {"riccati",
         {{"alpha", riccati.alpha},
          {"w0", riccati.w0},
          {"t0", riccati.t0},
          {"t1", riccati.t1},
          {"forcing_amplitude", riccati.forcing_amplitude},
          {"forcing_exponent", riccati.forcing_exponent},
          {"tolerance", riccati.tolerance}}},
        {"scaling_tolerance", scaling_tolerance},
        {"parallel", parallel},
        {"allow_structure_violation", allow_structure_violation},
        {"output_dir", output_dir},
    };
    if (!coefficients_path.empty())
        doc["coefficients"] = coefficients_path;
    else
        doc["coefficients_inline"] = json::parse(coefficients_inline_json);
    return doc.dump(2) + "\n";
}

} // namespace qlw
