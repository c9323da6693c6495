#include "moire/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace moire {

std::string format_number(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.15g", value);
    return buffer;
}

namespace {

void write_atomically(const std::filesystem::path& path, const std::string& contents) {
    const std::filesystem::path temp = path.string() + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open " + temp.string() + " for writing");
        out << contents;
        if (!out)
            throw IoError("write failed for " + temp.string());
    }
    std::error_code ec;
    std::filesystem::rename(temp, path, ec);
    if (ec)
        throw IoError("cannot rename " + temp.string() + " to " + path.string() + ": " +
                      ec.message());
}

} // namespace

std::filesystem::path emit_csv(const std::vector<std::string>& header,
                               const std::vector<std::vector<std::string>>& rows,
                               const std::filesystem::path& path) {
    if (header.empty())
        throw std::invalid_argument("emit_csv: header must not be empty");
    if (rows.empty())
        throw std::invalid_argument("emit_csv: no rows to write");
    std::string contents;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i)
            contents += ',';
        contents += header[i];
    }
    contents += '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("emit_csv: row width does not match the header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i)
                contents += ',';
            contents += row[i];
        }
        contents += '\n';
    }
    write_atomically(path, contents);
    return path;
}

std::filesystem::path emit_csv(const std::vector<std::string>& header,
                               const std::vector<std::vector<double>>& rows,
                               const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> formatted;
    formatted.reserve(rows.size());
    for (const auto& row : rows) {
        std::vector<std::string> cells;
        cells.reserve(row.size());
        for (double v : row)
            cells.push_back(format_number(v));
        formatted.push_back(std::move(cells));
    }
    return emit_csv(header, formatted, path);
}

} // namespace moire
