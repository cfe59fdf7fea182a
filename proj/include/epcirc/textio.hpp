#pragma once

// Deterministic text formatting: 17 significant digits, '.' separator,
// locale-free (std::to_chars). All CSV/JSON data files go through these.

#include <string>
#include <vector>

namespace epcirc {

std::string fmt_double(double v);

struct CsvWriter {
    explicit CsvWriter(std::string header);
    void row(const std::vector<std::string>& cells);
    const std::string& str() const { return text_; }

  private:
    std::string text_;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace epcirc
