#include "moire/config.hpp"

#include <fstream>

namespace moire {

namespace {

using nlohmann::json;

[[noreturn]] void missing(const std::string& path) {
    throw ConfigError("missing required field " + path);
}

const json& require(const json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end())
        missing(path + "." + key);
    return *it;
}

double require_number(const json& j, const char* key, const std::string& path) {
    const json& field = require(j, key, path);
    if (!field.is_number())
        throw ConfigError("field " + path + "." + key + " must be a number");
    return field.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end())
        return fallback;
    if (!it->is_number())
        throw ConfigError("field " + path + "." + key + " must be a number");
    return it->get<double>();
}

int int_or(const json& j, const char* key, int fallback, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end())
        return fallback;
    if (!it->is_number_integer())
        throw ConfigError("field " + path + "." + key + " must be an integer");
    return it->get<int>();
}

bool bool_or(const json& j, const char* key, bool fallback, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end())
        return fallback;
    if (!it->is_boolean())
        throw ConfigError("field " + path + "." + key + " must be a boolean");
    return it->get<bool>();
}

std::string string_or(const json& j, const char* key, const std::string& fallback,
                      const std::string& path) {
    auto it = j.find(key);
    if (it == j.end())
        return fallback;
    if (!it->is_string())
        throw ConfigError("field " + path + "." + key + " must be a string");
    return it->get<std::string>();
}

std::vector<double> require_number_array(const json& j, const char* key, const std::string& path) {
    const json& field = require(j, key, path);
    if (!field.is_array() || field.empty())
        throw ConfigError("field " + path + "." + key + " must be a non-empty array of numbers");
    std::vector<double> values;
    for (const auto& v : field) {
        if (!v.is_number())
            throw ConfigError("field " + path + "." + key + " must contain only numbers");
        values.push_back(v.get<double>());
    }
    return values;
}

ModelParams parse_model(const json& j, const std::string& path) {
    ModelParams params;
    params.lattice_constant = require_number(j, "a_nm", path);
    params.mismatch = require_number(j, "theta", path);
    params.stiffness = require_number(j, "kappa_mev_per_nm", path);
    params.stacking_amplitude = require_number(j, "v0_mev_per_nm", path);
    try {
        params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return params;
}

EtaModel parse_eta_model(const json& j, const std::string& path) {
    EtaModel model;
    model.eta = require_number(j, "eta", path);
    model.theta = require_number(j, "theta", path);
    model.a_nm = number_or(j, "a_nm", 0.25, path);
    if (!(model.eta >= 0))
        throw ConfigError(path + ".eta must be non-negative");
    if (!(model.theta > 0) || !(model.theta < 1))
        throw ConfigError(path + ".theta must lie in (0,1)");
    return model;
}

PotentialConfig parse_potential(const json& j, const std::string& path) {
    PotentialConfig p;
    p.type = string_or(j, "type", "", path);
    if (p.type != "harmonic" && p.type != "lennard-jones" && p.type != "gaussian")
        throw ConfigError(path + ".type must be one of harmonic, lennard-jones, gaussian");
    p.spring_mev = number_or(j, "spring_mev", p.spring_mev, path);
    p.rest_length = number_or(j, "rest_length", p.rest_length, path);
    p.well_depth_mev = number_or(j, "well_depth_mev", p.well_depth_mev, path);
    p.minimum = number_or(j, "minimum", p.minimum, path);
    p.depth_mev = number_or(j, "depth_mev", p.depth_mev, path);
    p.width = number_or(j, "width", p.width, path);
    p.cutoff = number_or(j, "cutoff", p.cutoff, path);
    return p;
}

json potential_to_json(const PotentialConfig& p) {
    json j;
    j["type"] = p.type;
    if (p.type == "harmonic") {
        j["spring_mev"] = p.spring_mev;
        j["rest_length"] = p.rest_length;
    } else if (p.type == "lennard-jones") {
        j["well_depth_mev"] = p.well_depth_mev;
        j["minimum"] = p.minimum;
    } else {
        j["depth_mev"] = p.depth_mev;
        j["width"] = p.width;
    }
    if (p.cutoff > 0)
        j["cutoff"] = p.cutoff;
    return j;
}

LineSearch line_search_from_string(const std::string& name, const std::string& path) {
    if (name == "armijo-backtracking")
        return LineSearch::ArmijoBacktracking;
    if (name == "strong-wolfe")
        return LineSearch::StrongWolfe;
    throw ConfigError(path + ".line_search must be armijo-backtracking or strong-wolfe");
}

} // namespace

std::string to_string(RunMode mode) {
    switch (mode) {
    case RunMode::GsfeRelax: return "gsfe-relax";
    case RunMode::EtaSweep: return "eta-sweep";
    case RunMode::AtomisticRelax: return "atomistic-relax";
    case RunMode::DeriveParams: return "derive-params";
    case RunMode::ConvergenceStudy: return "convergence-study";
    }
    throw std::logic_error("unknown run mode");
}

RunMode run_mode_from_string(const std::string& name) {
    if (name == "gsfe-relax") return RunMode::GsfeRelax;
    if (name == "eta-sweep") return RunMode::EtaSweep;
    if (name == "atomistic-relax") return RunMode::AtomisticRelax;
    if (name == "derive-params") return RunMode::DeriveParams;
    if (name == "convergence-study") return RunMode::ConvergenceStudy;
    throw ConfigError("$.mode: unknown mode '" + name + "'");
}

PairPotential PotentialConfig::build() const {
    if (type == "harmonic")
        return harmonic_bond(spring_mev, rest_length, cutoff > 0 ? cutoff : 1.5);
    if (type == "lennard-jones")
        return lennard_jones(well_depth_mev, minimum, cutoff > 0 ? cutoff : 5.0);
    if (type == "gaussian")
        return gaussian_well(depth_mev, width, cutoff > 0 ? cutoff : 5.0);
    throw ConfigError("potential type '" + type + "' is not known");
}

ModelParams RunConfig::resolve_model() const {
    if (model)
        return *model;
    if (eta_model)
        return params_from_eta(eta_model->eta, eta_model->theta, eta_model->a_nm);
    throw ConfigError("$.model or $.eta_model is required for mode " + to_string(mode));
}

void RunConfig::validate() const {
    if (grid_n < 8)
        throw ConfigError("$.grid_n must be at least 8");
    if (jobs < 1)
        throw ConfigError("$.jobs must be at least 1");
    switch (mode) {
    case RunMode::GsfeRelax:
        if (!model && !eta_model)
            throw ConfigError("$.model or $.eta_model is required for gsfe-relax");
        break;
    case RunMode::EtaSweep:
        if (!sweep)
            throw ConfigError("$.sweep is required for eta-sweep");
        break;
    case RunMode::AtomisticRelax:
        if (!eta_model)
            throw ConfigError("$.eta_model is required for atomistic-relax");
        if (!potentials)
            throw ConfigError("$.potentials is required for atomistic-relax");
        break;
    case RunMode::DeriveParams:
        if (!model)
            throw ConfigError("$.model is required for derive-params");
        break;
    case RunMode::ConvergenceStudy:
        if (!study)
            throw ConfigError("$.study is required for convergence-study");
        if (!potentials)
            throw ConfigError("$.potentials is required for convergence-study");
        if (study->grid_n < 8)
            throw ConfigError("$.study.grid_n must be at least 8");
        break;
    }
}

RunConfig parse_config(const json& j) {
    if (!j.is_object())
        throw ConfigError("$: config must be a JSON object");
    RunConfig config;
    config.mode = run_mode_from_string(
        string_or(j, "mode", "gsfe-relax", "$"));

    if (auto it = j.find("model"); it != j.end())
        config.model = parse_model(*it, "$.model");
    if (auto it = j.find("eta_model"); it != j.end())
        config.eta_model = parse_eta_model(*it, "$.eta_model");

    config.grid_n = int_or(j, "grid_n", config.grid_n, "$");

    const std::string stencil = string_or(j, "stencil", "central", "$");
    if (stencil == "central")
        config.stencil = Stencil::Central;
    else if (stencil == "forward")
        config.stencil = Stencil::Forward;
    else
        throw ConfigError("$.stencil must be central or forward");

    if (auto it = j.find("optimizer"); it != j.end()) {
        const json& opt = *it;
        config.optimizer.memory = int_or(opt, "memory", config.optimizer.memory, "$.optimizer");
        config.optimizer.tolerance =
            number_or(opt, "tolerance", config.optimizer.tolerance, "$.optimizer");
        config.optimizer.max_iterations =
            int_or(opt, "max_iterations", config.optimizer.max_iterations, "$.optimizer");
        config.optimizer.line_search = line_search_from_string(
            string_or(opt, "line_search", "armijo-backtracking", "$.optimizer"), "$.optimizer");
    }

    if (auto it = j.find("potentials"); it != j.end()) {
        PotentialsConfig pots;
        pots.intra = parse_potential(require(*it, "intra", "$.potentials"), "$.potentials.intra");
        pots.inter = parse_potential(require(*it, "inter", "$.potentials"), "$.potentials.inter");
        config.potentials = pots;
    }

    if (auto it = j.find("sweep"); it != j.end()) {
        SweepConfig sweep;
        sweep.etas = require_number_array(*it, "etas", "$.sweep");
        sweep.theta = number_or(*it, "theta", sweep.theta, "$.sweep");
        sweep.a_nm = number_or(*it, "a_nm", sweep.a_nm, "$.sweep");
        config.sweep = sweep;
    }

    if (auto it = j.find("study"); it != j.end()) {
        StudyConfig study;
        study.thetas = require_number_array(*it, "thetas", "$.study");
        study.eta = number_or(*it, "eta", study.eta, "$.study");
        study.grid_n = int_or(*it, "grid_n", study.grid_n, "$.study");
        config.study = study;
    }

    config.output_dir = string_or(j, "output_dir", config.output_dir.string(), "$");
    config.emit_svg_files = bool_or(j, "emit_svg", config.emit_svg_files, "$");
    config.random_init = bool_or(j, "random_init", config.random_init, "$");
    config.seed = static_cast<unsigned>(int_or(j, "seed", static_cast<int>(config.seed), "$"));
    config.jobs = int_or(j, "jobs", config.jobs, "$");
    config.allow_nonconverged = bool_or(j, "allow_nonconverged", config.allow_nonconverged, "$");

    config.validate();
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

json to_json(const RunConfig& config) {
    json j;
    j["mode"] = to_string(config.mode);
    if (config.model) {
        j["model"] = {{"a_nm", config.model->lattice_constant},
                      {"theta", config.model->mismatch},
                      {"kappa_mev_per_nm", config.model->stiffness},
                      {"v0_mev_per_nm", config.model->stacking_amplitude}};
    }
    if (config.eta_model) {
        j["eta_model"] = {{"eta", config.eta_model->eta},
                          {"theta", config.eta_model->theta},
                          {"a_nm", config.eta_model->a_nm}};
    }
    j["grid_n"] = config.grid_n;
    j["stencil"] = config.stencil == Stencil::Central ? "central" : "forward";
    j["optimizer"] = {{"memory", config.optimizer.memory},
                      {"tolerance", config.optimizer.tolerance},
                      {"max_iterations", config.optimizer.max_iterations},
                      {"line_search", config.optimizer.line_search == LineSearch::ArmijoBacktracking
                                          ? "armijo-backtracking"
                                          : "strong-wolfe"}};
    if (config.potentials) {
        j["potentials"] = {{"intra", potential_to_json(config.potentials->intra)},
                           {"inter", potential_to_json(config.potentials->inter)}};
    }
    if (config.sweep) {
        j["sweep"] = {{"etas", config.sweep->etas},
                      {"theta", config.sweep->theta},
                      {"a_nm", config.sweep->a_nm}};
    }
    if (config.study) {
        j["study"] = {{"thetas", config.study->thetas},
                      {"eta", config.study->eta},
                      {"grid_n", config.study->grid_n}};
    }
    j["output_dir"] = config.output_dir.string();
    j["emit_svg"] = config.emit_svg_files;
    j["random_init"] = config.random_init;
    j["seed"] = config.seed;
    j["jobs"] = config.jobs;
    j["allow_nonconverged"] = config.allow_nonconverged;
    return j;
}

} // namespace moire
