#include "vqc/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "vqc/errors.hpp"

namespace vqc {

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IngestError("cannot open file: " + path);
    }

    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw IngestError("empty file: " + path);
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            table.header.push_back(cell);
        }
    }
    if (table.header.empty()) {
        throw IngestError("missing header row: " + path);
    }

    std::size_t row_index = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        ++row_index;
        std::vector<double> row;
        row.reserve(table.header.size());
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(cell, &pos);
                if (pos != cell.size()) {
                    throw std::invalid_argument(cell);
                }
                row.push_back(v);
            } catch (const std::exception&) {
                throw IngestError("non-numeric cell at data row " + std::to_string(row_index) +
                                  ", column " + table.header[std::min(col, table.header.size() - 1)] +
                                  ": '" + cell + "'");
            }
            ++col;
        }
        if (row.size() != table.header.size()) {
            throw IngestError("row " + std::to_string(row_index) + " has " +
                              std::to_string(row.size()) + " cells, expected " +
                              std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) {
        throw IngestError("no data rows in " + path);
    }
    return table;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary); // LF endings everywhere
    if (!out) {
        throw IngestError("cannot write file: " + path);
    }
    out << content;
}

} // namespace vqc
