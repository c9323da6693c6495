#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "moire/errors.hpp"

namespace moire {

/// Shortest-faithful decimal rendering used by every emitted file, so that
/// identical inputs always produce identical bytes.
std::string format_number(double value);

/// Writes a header row plus data rows, '.' decimal point, '\n' line endings,
/// newline-terminated. The file is written to a temporary name and renamed
/// into place. Empty headers or rows are rejected before anything is written.
std::filesystem::path emit_csv(const std::vector<std::string>& header,
                               const std::vector<std::vector<std::string>>& rows,
                               const std::filesystem::path& path);

std::filesystem::path emit_csv(const std::vector<std::string>& header,
                               const std::vector<std::vector<double>>& rows,
                               const std::filesystem::path& path);

} // namespace moire
