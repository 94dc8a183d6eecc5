#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace deepcond {

inline constexpr const char* kToolVersion = "deepcond 0.1.0";

// Full-precision decimal rendering (17 significant digits, '.' separator).
std::string format_full(double v);

std::uint64_t fnv1a64(const std::string& text);

// '#'-prefixed provenance lines: version, resolved config, config hash, seed.
std::string provenance_header(const std::string& config, std::uint64_t seed);

// RFC-4180-style CSV body (UTF-8, comma separator, LF line ends).
class CsvBuilder {
public:
    explicit CsvBuilder(std::vector<std::string> columns);
    void add_row(const std::vector<std::string>& cells);
    void add_numeric_row(const std::vector<double>& cells);
    std::string str() const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

// Writes via a temp file in the same directory plus rename.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace deepcond
