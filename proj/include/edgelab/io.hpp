#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace edgelab::io {

/// Writes through a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/// Shortest round-trip decimal form; identical inputs give identical text.
std::string format_double(double x);

/// Comma-separated rows with a header line.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add_row(const std::vector<double>& values);
    std::size_t rows() const { return rows_; }
    const std::string& str() const { return text_; }

private:
    std::size_t columns_;
    std::size_t rows_ = 0;
    std::string text_;
};

}  // namespace edgelab::io
