#include "rftune/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace rftune {

namespace {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& rows) {
    if (!header.empty() && rows.rows() > 0 && static_cast<Index>(header.size()) != rows.cols())
        throw DimensionMismatch("write_csv: header and row widths differ");
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (Index r = 0; r < rows.rows(); ++r) {
        for (Index c = 0; c < rows.cols(); ++c) out << (c ? "," : "") << format_double(rows(r, c));
        out << '\n';
    }
    if (!out) throw IoFailure("failed writing " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open " + path.string());
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) return table;
    if (!line.empty()) table.header = split(line);
    std::vector<std::vector<double>> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& cell : split(line)) {
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc()) throw IoFailure("non-numeric cell '" + cell + "' in " + path.string());
            row.push_back(v);
        }
        values.push_back(std::move(row));
    }
    const Index cols = values.empty() ? static_cast<Index>(table.header.size()) : static_cast<Index>(values[0].size());
    table.rows.resize(static_cast<Index>(values.size()), cols);
    for (std::size_t r = 0; r < values.size(); ++r) {
        if (static_cast<Index>(values[r].size()) != cols) throw IoFailure("ragged row in " + path.string());
        for (Index c = 0; c < cols; ++c) table.rows(static_cast<Index>(r), c) = values[r][static_cast<std::size_t>(c)];
    }
    return table;
}

}  // namespace rftune
