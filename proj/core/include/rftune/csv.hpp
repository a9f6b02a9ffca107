#pragma once

#include "rftune/common.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rftune {

/// Writes a header line and one row per matrix row, doubles at round-trip precision.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& rows);

struct CsvTable {
    std::vector<std::string> header;
    Matrix rows;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace rftune
