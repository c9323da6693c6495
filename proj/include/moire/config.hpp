#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "moire/gsfe.hpp"
#include "moire/model.hpp"
#include "moire/optimize.hpp"
#include "moire/pair_potential.hpp"

namespace moire {

enum class RunMode { GsfeRelax, EtaSweep, AtomisticRelax, DeriveParams, ConvergenceStudy };

std::string to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& name);

/// Model given as (eta, theta, a) instead of four dimensional inputs;
/// converted through params_from_eta.
struct EtaModel {
    double eta = 0;
    double theta = 0;
    double a_nm = 0;
};

/// Named pair potential as it appears in a config file. Lengths are in units
/// of the layer-1 lattice constant, energies in meV.
struct PotentialConfig {
    std::string type;        // "harmonic" | "lennard-jones" | "gaussian"
    double spring_mev = 1.0; // harmonic
    double rest_length = 1.0;
    double well_depth_mev = 1.0; // lennard-jones
    double minimum = 1.0;
    double depth_mev = 1.0; // gaussian
    double width = 0.4;
    double cutoff = 0; // 0 = the type's default

    PairPotential build() const;
};

struct PotentialsConfig {
    PotentialConfig intra;
    PotentialConfig inter;
};

struct SweepConfig {
    std::vector<double> etas;
    double theta = 0.02;
    double a_nm = 0.25;
};

struct StudyConfig {
    std::vector<double> thetas;
    double eta = 1.0;
    int grid_n = 2048;
};

struct RunConfig {
    RunMode mode = RunMode::GsfeRelax;
    std::optional<ModelParams> model;
    std::optional<EtaModel> eta_model;
    int grid_n = 512;
    Stencil stencil = Stencil::Central;
    MinimizeOptions optimizer{10, 0.0, 5000, LineSearch::ArmijoBacktracking}; // tolerance 0 = auto
    std::optional<PotentialsConfig> potentials;
    std::optional<SweepConfig> sweep;
    std::optional<StudyConfig> study;
    std::filesystem::path output_dir = "out";
    bool emit_svg_files = true;
    bool random_init = false;
    unsigned seed = 0;
    int jobs = 1;
    bool allow_nonconverged = false;

    /// Dimensional parameters for the chosen mode, from `model` or
    /// `eta_model`. Throws ConfigError when neither is present.
    ModelParams resolve_model() const;

    /// Mode-specific presence and range checks; throws ConfigError naming
    /// the offending field.
    void validate() const;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

} // namespace moire
