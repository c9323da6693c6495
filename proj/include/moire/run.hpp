#pragma once

#include <filesystem>
#include <vector>

#include "json.hpp"

#include "moire/config.hpp"

namespace moire {

struct RunResult {
    nlohmann::json record; // ResultRecord: config echo, derived values, results, files, wall time
    std::vector<std::filesystem::path> files;
    bool all_converged = true;
};

/// Executes one configured run and writes its artifacts (CSV, optional SVG,
/// result.json) under config.output_dir. Sweep and study entries run
/// concurrently up to config.jobs. Errors propagate as the typed exceptions
/// from the modules involved; partially written files are never renamed into
/// place.
RunResult run(const RunConfig& config);

} // namespace moire
