#pragma once

#include <string>
#include <vector>

namespace vqc {

/// Render with 17 significant digits so values survive a text round trip.
std::string format_real(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Strict numeric CSV: comma-separated, one header row, every cell numeric.
CsvTable read_csv(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

} // namespace vqc
