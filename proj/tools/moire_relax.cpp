#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "moire/config.hpp"
#include "moire/run.hpp"

namespace {

struct CliOverrides {
    std::string config_path;
    std::string output_dir;
    int jobs = 0;
    long seed = -1;
    bool allow_nonconverged = false;
    bool random_init = false;
};

void add_common_options(CLI::App* sub, CliOverrides& overrides) {
    sub->add_option("--config", overrides.config_path, "JSON run configuration")->required();
    sub->add_option("--out", overrides.output_dir, "output directory (overrides config)");
    sub->add_option("--jobs", overrides.jobs, "concurrent sweep entries (overrides config)");
    sub->add_option("--seed", overrides.seed, "seed for the random initial perturbation");
    sub->add_flag("--random-init", overrides.random_init,
                  "start from a small seeded random field instead of zero");
    sub->add_flag("--allow-nonconverged", overrides.allow_nonconverged,
                  "report non-converged relaxations as warnings instead of failing");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"1D bilayer moire relaxation: continuum GSFE and atomistic pair-potential solvers"};
    app.require_subcommand(1);

    CliOverrides overrides;
    const std::pair<const char*, const char*> modes[] = {
        {"gsfe-relax", "relax the continuum model and emit displacement/disregistry profiles"},
        {"eta-sweep", "relax the continuum model for a list of eta values"},
        {"atomistic-relax", "relax the pair-potential chain at a requested eta"},
        {"derive-params", "report moire geometry and dimensionless groups"},
        {"convergence-study", "compare atomistic and continuum minimizers as theta decreases"},
    };
    for (const auto& [name, description] : modes)
        add_common_options(app.add_subcommand(name, description), overrides);

    CLI11_PARSE(app, argc, argv);

    try {
        moire::RunConfig config = moire::load_config(overrides.config_path);
        config.mode = moire::run_mode_from_string(app.get_subcommands().front()->get_name());
        if (!overrides.output_dir.empty())
            config.output_dir = overrides.output_dir;
        if (overrides.jobs > 0)
            config.jobs = overrides.jobs;
        if (overrides.seed >= 0)
            config.seed = static_cast<unsigned>(overrides.seed);
        if (overrides.random_init)
            config.random_init = true;
        if (overrides.allow_nonconverged)
            config.allow_nonconverged = true;

        const moire::RunResult result = moire::run(config);

        for (const auto& file : result.files)
            std::printf("wrote %s\n", file.string().c_str());
        std::printf("wrote %s\n", (config.output_dir / "result.json").string().c_str());

        if (!result.all_converged) {
            if (config.allow_nonconverged) {
                std::fprintf(stderr, "warning: at least one relaxation did not converge\n");
            } else {
                std::fprintf(stderr,
                             "error: at least one relaxation did not converge "
                             "(use --allow-nonconverged to downgrade)\n");
                return 3;
            }
        }
        return 0;
    } catch (const moire::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const moire::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 4;
    } catch (const moire::Error& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
