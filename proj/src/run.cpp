#include "moire/run.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "moire/atomistic.hpp"
#include "moire/csv.hpp"
#include "moire/svg.hpp"

namespace moire {

namespace {

using nlohmann::json;

const double sqrt2 = std::numbers::sqrt2;

// Runs body(0..count-1) on up to `jobs` threads; the first exception wins.
template <typename Body>
void parallel_for(int count, int jobs, Body&& body) {
    jobs = std::min(jobs, count);
    if (jobs <= 1) {
        for (int i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count || failed.load())
                    return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& worker : workers)
        worker.join();
    if (error)
        std::rethrow_exception(error);
}

DisplacementField initial_field(const Grid& grid, double amplitude, bool random_init,
                                unsigned seed) {
    DisplacementField field = DisplacementField::zero(grid);
    if (random_init) {
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> jitter(-amplitude, amplitude);
        for (double& v : field.values)
            v = jitter(rng);
    }
    return field;
}

MinimizeOptions resolve_gsfe_options(const MinimizeOptions& configured, const ModelParams& params) {
    MinimizeOptions options = configured;
    if (options.tolerance == 0)
        options.tolerance = default_relax_options(params).tolerance;
    return options;
}

json groups_to_json(const ModelParams& params) {
    const DimensionlessGroups groups = dimensionless_groups(params);
    const LatticeCounts counts = lattice_counts(params);
    return json{{"a_m_nm", moire_period(params)},
                {"m", counts.layer1},
                {"n", counts.layer2},
                {"epsilon", groups.epsilon},
                {"delta", groups.delta_ratio},
                {"eta", groups.eta},
                {"eta_abstract", groups.eta_abstract()}};
}

json relaxation_to_json(const std::string& label, double energy, double gradient_norm,
                        int iterations, bool converged) {
    return json{{"label", label},
                {"energy", energy},
                {"gradient_norm", gradient_norm},
                {"iterations", iterations},
                {"converged", converged}};
}

// Periodic linear interpolation of a grid field at an arbitrary point.
double field_at(const DisplacementField& field, double x) {
    const double t = (x - field.grid.origin) / field.grid.dx;
    const double base = std::floor(t);
    const double frac = t - base;
    const long k = static_cast<long>(base);
    return (1.0 - frac) * field.value(k) + frac * field.value(k + 1);
}

struct ModeOutput {
    std::vector<std::filesystem::path> files;
    json results = json::array();
    json derived;
    bool all_converged = true;
};

ModeOutput run_gsfe_relax(const RunConfig& config) {
    const ModelParams params = config.resolve_model();
    const Grid grid = Grid::uniform(config.grid_n, moire_period(params));
    const DisplacementField start =
        initial_field(grid, 1e-3 * params.lattice_constant, config.random_init, config.seed);
    const MinimizeOptions options = resolve_gsfe_options(config.optimizer, params);

    const RelaxationResult result = relax(start, params, options, config.stencil);
    const DisregistryProfile profile = relaxed_disregistry(result, params);

    const double a_m = moire_period(params);
    const double period = stacking_period(params);
    const double a = params.lattice_constant;

    ModeOutput output;
    output.all_converged = result.converged;
    output.derived = groups_to_json(params);
    output.results.push_back(relaxation_to_json("gsfe", result.energy, result.gradient_norm,
                                                result.iterations, result.converged));

    std::vector<std::vector<double>> rows;
    for (int n = 0; n < grid.n_points; ++n)
        rows.push_back({grid.x(n) / a_m, result.field.values[n] / a, profile.unreduced[n] / a,
                        profile.reduced[n] / period});
    output.files.push_back(emit_csv(
        {"x_over_aM", "u_minus_over_a", "delta_unreduced_over_a", "delta_mod_over_period"}, rows,
        config.output_dir / "gsfe_relax.csv"));

    // Atom positions for before/after plots: u1 = u_-/sqrt(2), u2 = -u_-/sqrt(2).
    const LatticeCounts counts = lattice_counts(params);
    std::vector<std::vector<std::string>> atom_rows;
    for (int i = 1; i <= counts.layer1; ++i) {
        const double site = a * i;
        atom_rows.push_back({"1", std::to_string(i), format_number(site),
                             format_number(site + field_at(result.field, site) / sqrt2)});
    }
    for (int j = 1; j <= counts.layer2; ++j) {
        const double site = a * (1.0 - params.mismatch) * j;
        atom_rows.push_back({"2", std::to_string(j), format_number(site),
                             format_number(site - field_at(result.field, site) / sqrt2)});
    }
    output.files.push_back(emit_csv({"layer", "index", "x_unrelaxed_nm", "x_relaxed_nm"}, atom_rows,
                                    config.output_dir / "gsfe_atoms.csv"));

    if (config.emit_svg_files) {
        std::vector<double> x_norm(grid.n_points), u_norm(grid.n_points), d_norm(grid.n_points);
        for (int n = 0; n < grid.n_points; ++n) {
            x_norm[n] = grid.x(n) / a_m;
            u_norm[n] = result.field.values[n] / a;
            d_norm[n] = profile.reduced[n] / period;
        }
        const DimensionlessGroups groups = dimensionless_groups(params);
        const std::string label = "eta=" + format_number(groups.eta);
        output.files.push_back(emit_svg({{label, x_norm, u_norm}}, {"x / a_M", "u_- / a"},
                                        config.output_dir / "gsfe_u.svg"));
        output.files.push_back(emit_svg({{label, x_norm, d_norm}},
                                        {"x / a_M", "delta mod / (1-theta)a"},
                                        config.output_dir / "gsfe_delta.svg"));
    }
    return output;
}

ModeOutput run_eta_sweep(const RunConfig& config) {
    const SweepConfig& sweep = *config.sweep;
    const int entries = static_cast<int>(sweep.etas.size());

    struct Entry {
        RelaxationResult result;
        DisregistryProfile profile;
        ModelParams params;
    };
    std::vector<Entry> relaxed(entries);

    parallel_for(entries, config.jobs, [&](int k) {
        const ModelParams params = params_from_eta(sweep.etas[k], sweep.theta, sweep.a_nm);
        const Grid grid = Grid::uniform(config.grid_n, moire_period(params));
        const DisplacementField start = initial_field(
            grid, 1e-3 * params.lattice_constant, config.random_init, config.seed + k);
        const MinimizeOptions options = resolve_gsfe_options(config.optimizer, params);
        Entry entry;
        entry.params = params;
        entry.result = relax(start, params, options, config.stencil);
        entry.profile = relaxed_disregistry(entry.result, params);
        relaxed[k] = std::move(entry);
    });

    ModeOutput output;
    const ModelParams reference = params_from_eta(1.0, sweep.theta, sweep.a_nm);
    output.derived = groups_to_json(reference);
    output.derived["sweep_etas"] = sweep.etas;

    const double a_m = moire_period(reference);
    const double period = stacking_period(reference);

    std::vector<std::string> u_header{"x_over_aM"};
    std::vector<std::string> d_header{"x_over_aM"};
    for (int k = 0; k < entries; ++k) {
        u_header.push_back("u_minus_over_a_eta_" + format_number(sweep.etas[k]));
        d_header.push_back("delta_mod_over_period_eta_" + format_number(sweep.etas[k]));
    }
    std::vector<std::vector<double>> u_rows, d_rows;
    for (int n = 0; n < config.grid_n; ++n) {
        const double x_norm = relaxed[0].result.field.grid.x(n) / a_m;
        std::vector<double> u_row{x_norm}, d_row{x_norm};
        for (int k = 0; k < entries; ++k) {
            u_row.push_back(relaxed[k].result.field.values[n] / sweep.a_nm);
            d_row.push_back(relaxed[k].profile.reduced[n] / period);
        }
        u_rows.push_back(std::move(u_row));
        d_rows.push_back(std::move(d_row));
    }
    output.files.push_back(
        emit_csv(u_header, u_rows, config.output_dir / "eta_sweep_u.csv"));
    output.files.push_back(
        emit_csv(d_header, d_rows, config.output_dir / "eta_sweep_delta.csv"));

    for (int k = 0; k < entries; ++k) {
        const auto& entry = relaxed[k];
        output.all_converged = output.all_converged && entry.result.converged;
        output.results.push_back(relaxation_to_json("eta=" + format_number(sweep.etas[k]),
                                                    entry.result.energy, entry.result.gradient_norm,
                                                    entry.result.iterations,
                                                    entry.result.converged));
    }

    if (config.emit_svg_files) {
        std::vector<Series> u_series, d_series;
        for (int k = 0; k < entries; ++k) {
            Series u{"eta=" + format_number(sweep.etas[k]), {}, {}};
            Series d = u;
            for (int n = 0; n < config.grid_n; ++n) {
                const double x_norm = relaxed[k].result.field.grid.x(n) / a_m;
                u.x.push_back(x_norm);
                u.y.push_back(relaxed[k].result.field.values[n] / sweep.a_nm);
                d.x.push_back(x_norm);
                d.y.push_back(relaxed[k].profile.reduced[n] / period);
            }
            u_series.push_back(std::move(u));
            d_series.push_back(std::move(d));
        }
        output.files.push_back(emit_svg(u_series, {"x / a_M", "u_- / a"},
                                        config.output_dir / "eta_sweep_u.svg"));
        output.files.push_back(emit_svg(d_series, {"x / a_M", "delta mod / (1-theta)a"},
                                        config.output_dir / "eta_sweep_delta.svg"));
    }
    return output;
}

ModeOutput run_atomistic_relax(const RunConfig& config) {
    const EtaModel& eta_model = *config.eta_model;
    const PairPotential intra = config.potentials->intra.build();
    const PairPotential inter_unit = config.potentials->inter.build();
    const double theta = eta_model.theta;
    const double epsilon = theta / (1.0 - theta);

    // Scale the interlayer amplitude so the derived eta matches the request.
    const DerivedContinuum unit = derive_continuum(intra, inter_unit, theta);
    const double amplitude =
        eta_model.eta * eta_model.eta * epsilon * epsilon * unit.kappa_tilde / unit.v0_tilde;
    const PairPotential inter = scaled(inter_unit, amplitude);
    const DerivedContinuum derived = derive_continuum(intra, inter, theta);

    AtomisticSystem system = make_system(theta, intra, inter);
    if (config.random_init) {
        std::mt19937 rng(config.seed);
        std::uniform_real_distribution<double> jitter(-1e-3, 1e-3);
        for (double& v : system.layer1)
            v = jitter(rng);
        for (double& v : system.layer2)
            v = jitter(rng);
    }

    MinimizeOptions options = config.optimizer;
    if (options.tolerance == 0)
        options.tolerance = eta_model.eta > 0 ? 1e-7 * derived.v0_tilde : 1e-12 * derived.kappa_tilde;
    const AtomisticRelaxation result = relax_atomistic(system, options);

    ModeOutput output;
    output.all_converged = result.converged;
    output.derived = json{{"theta", theta},
                          {"epsilon", epsilon},
                          {"eta_requested", eta_model.eta},
                          {"kappa_tilde", derived.kappa_tilde},
                          {"v0_tilde", derived.v0_tilde},
                          {"v_mean", derived.v_mean},
                          {"fit_residual", derived.fit_residual},
                          {"eta_derived", std::sqrt(derived.delta()) / epsilon}};
    output.results.push_back(relaxation_to_json("atomistic", result.energy, result.gradient_norm,
                                                result.iterations, result.converged));

    const std::size_t m = result.layer1.size();
    const std::size_t n = result.layer2.size();
    std::vector<std::vector<std::string>> profile_rows;
    for (std::size_t i = 0; i < m; ++i)
        profile_rows.push_back({"1", std::to_string(i + 1),
                                format_number(epsilon * static_cast<double>(i + 1)),
                                format_number(result.layer1[i])});
    for (std::size_t j = 0; j < n; ++j)
        profile_rows.push_back({"2", std::to_string(j + 1),
                                format_number(theta * static_cast<double>(j + 1)),
                                format_number(result.layer2[j])});
    output.files.push_back(emit_csv({"layer", "index", "site_x_over_aM", "u_over_a"}, profile_rows,
                                    config.output_dir / "atomistic_profile.csv"));

    std::vector<std::vector<std::string>> atom_rows;
    for (std::size_t i = 0; i < m; ++i) {
        const double site = static_cast<double>(i + 1);
        atom_rows.push_back({"1", std::to_string(i + 1), format_number(site),
                             format_number(site + result.layer1[i])});
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double site = (1.0 - theta) * static_cast<double>(j + 1);
        atom_rows.push_back({"2", std::to_string(j + 1), format_number(site),
                             format_number(site + result.layer2[j])});
    }
    output.files.push_back(emit_csv({"layer", "index", "x_unrelaxed_over_a", "x_relaxed_over_a"},
                                    atom_rows, config.output_dir / "atomistic_atoms.csv"));

    if (config.emit_svg_files) {
        Series u_minus{"eta=" + format_number(eta_model.eta), {}, {}};
        for (std::size_t i = 0; i < m; ++i) {
            const double x = epsilon * static_cast<double>(i + 1);
            // interpolate layer 2 onto the layer-1 site
            const double t = x / theta - 1.0;
            const double base = std::floor(t);
            const double frac = t - base;
            const long k = static_cast<long>(base);
            auto wrap2 = [&](long idx) {
                long r = idx % static_cast<long>(n);
                if (r < 0)
                    r += static_cast<long>(n);
                return static_cast<std::size_t>(r);
            };
            const double u2 = (1.0 - frac) * result.layer2[wrap2(k)] +
                              frac * result.layer2[wrap2(k + 1)];
            u_minus.x.push_back(x);
            u_minus.y.push_back((result.layer1[i] - u2) / sqrt2);
        }
        output.files.push_back(emit_svg({u_minus}, {"X = x / a_M", "U_-"},
                                        config.output_dir / "atomistic_u_minus.svg"));
    }
    return output;
}

ModeOutput run_derive_params(const RunConfig& config) {
    const ModelParams params = *config.model;
    const DimensionlessGroups groups = dimensionless_groups(params);
    const LatticeCounts counts = lattice_counts(params);

    ModeOutput output;
    output.derived = groups_to_json(params);

    std::vector<std::vector<double>> rows{{params.lattice_constant, params.mismatch,
                                           params.stiffness, params.stacking_amplitude,
                                           moire_period(params), static_cast<double>(counts.layer1),
                                           static_cast<double>(counts.layer2), groups.epsilon,
                                           groups.delta_ratio, groups.eta, groups.eta_abstract()}};
    output.files.push_back(
        emit_csv({"a_nm", "theta", "kappa_mev_per_nm", "v0_mev_per_nm", "a_m_nm", "m", "n",
                  "epsilon", "delta", "eta", "eta_abstract"},
                 rows, config.output_dir / "derived_params.csv"));

    if (config.potentials) {
        const PairPotential intra = config.potentials->intra.build();
        const PairPotential inter = config.potentials->inter.build();
        const DerivedContinuum derived = derive_continuum(intra, inter, params.mismatch);
        const double eta_derived = std::sqrt(derived.delta()) / groups.epsilon;
        output.derived["kappa_tilde"] = derived.kappa_tilde;
        output.derived["v0_tilde"] = derived.v0_tilde;
        output.derived["eta_derived"] = eta_derived;
        std::vector<std::vector<double>> continuum_rows{{derived.kappa_tilde, derived.v0_tilde,
                                                         derived.v_mean, derived.fit_residual,
                                                         derived.delta(), eta_derived}};
        output.files.push_back(
            emit_csv({"kappa_tilde", "v0_tilde", "v_mean", "fit_residual", "delta", "eta_derived"},
                     continuum_rows, config.output_dir / "derived_continuum.csv"));
    }
    return output;
}

ModeOutput run_convergence_study(const RunConfig& config) {
    const StudyConfig& study = *config.study;
    const PairPotential intra = config.potentials->intra.build();
    const PairPotential inter_unit = config.potentials->inter.build();

    StudyOptions options;
    options.grid_n = study.grid_n;
    options.atomistic.memory = config.optimizer.memory;
    options.atomistic.max_iterations = config.optimizer.max_iterations;
    options.continuum.memory = config.optimizer.memory;
    options.continuum.max_iterations = config.optimizer.max_iterations;
    if (config.optimizer.tolerance != 0) {
        options.atomistic.tolerance = config.optimizer.tolerance;
        options.continuum.tolerance = config.optimizer.tolerance;
    }

    const int entries = static_cast<int>(study.thetas.size());
    std::vector<ComparisonRow> rows(entries);
    parallel_for(entries, config.jobs, [&](int k) {
        const double theta = study.thetas[k];
        const auto row =
            continuum_comparison(std::span<const double>(&theta, 1), study.eta, intra, inter_unit,
                                 options);
        rows[k] = row.front();
    });

    ModeOutput output;
    output.derived = json{{"eta", study.eta}, {"thetas", study.thetas}};

    std::vector<std::vector<std::string>> csv_rows;
    for (const auto& row : rows)
        csv_rows.push_back({format_number(row.theta), format_number(row.epsilon),
                            format_number(row.eta), format_number(row.l2_error),
                            format_number(row.energy_gap), std::to_string(row.atoms)});
    output.files.push_back(emit_csv({"theta", "epsilon", "eta", "l2_error", "energy_gap", "atoms"},
                                    csv_rows, config.output_dir / "convergence_study.csv"));

    for (const auto& row : rows) {
        output.results.push_back(json{{"label", "theta=" + format_number(row.theta)},
                                      {"epsilon", row.epsilon},
                                      {"l2_error", row.l2_error},
                                      {"energy_gap", row.energy_gap},
                                      {"atoms", row.atoms}});
    }

    if (config.emit_svg_files) {
        Series l2{"eta=" + format_number(study.eta), {}, {}};
        Series gap = l2;
        for (const auto& row : rows) {
            l2.x.push_back(row.epsilon);
            l2.y.push_back(row.l2_error);
            gap.x.push_back(row.epsilon);
            gap.y.push_back(row.energy_gap);
        }
        output.files.push_back(
            emit_svg({l2}, {"epsilon", "L2 error"}, config.output_dir / "study_l2.svg"));
        output.files.push_back(
            emit_svg({gap}, {"epsilon", "energy gap"}, config.output_dir / "study_gap.svg"));
    }
    return output;
}

} // namespace

RunResult run(const RunConfig& config) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();

    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + config.output_dir.string() + ": " +
                      ec.message());

    ModeOutput output;
    switch (config.mode) {
    case RunMode::GsfeRelax: output = run_gsfe_relax(config); break;
    case RunMode::EtaSweep: output = run_eta_sweep(config); break;
    case RunMode::AtomisticRelax: output = run_atomistic_relax(config); break;
    case RunMode::DeriveParams: output = run_derive_params(config); break;
    case RunMode::ConvergenceStudy: output = run_convergence_study(config); break;
    }

    const double wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    RunResult result;
    result.files = output.files;
    result.all_converged = output.all_converged;
    result.record = json{{"config", to_json(config)},
                         {"derived", output.derived},
                         {"results", output.results},
                         {"wall_time_s", wall_time}};
    json file_list = json::array();
    for (const auto& file : output.files)
        file_list.push_back(file.string());
    result.record["files"] = file_list;

    // result.json is the record itself; written last so its file list is
    // complete.
    const std::filesystem::path record_path = config.output_dir / "result.json";
    const std::filesystem::path temp = record_path.string() + ".tmp";
    {
        std::ofstream out(temp);
        if (!out)
            throw IoError("cannot open " + temp.string() + " for writing");
        out << result.record.dump(2) << '\n';
    }
    std::filesystem::rename(temp, record_path, ec);
    if (ec)
        throw IoError("cannot rename " + temp.string() + ": " + ec.message());

    return result;
}

} // namespace moire
