#include "deepcond/output.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace deepcond {

std::string format_full(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string provenance_header(const std::string& config, std::uint64_t seed) {
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config)));
    std::string out;
    out += std::string("# tool ") + kToolVersion + "\n";
    out += "# config " + config + "\n";
    out += std::string("# configHash ") + hash + "\n";
    out += "# seed " + std::to_string(seed) + "\n";
    return out;
}

CsvBuilder::CsvBuilder(std::vector<std::string> columns)
    : columns_(std::move(columns)) {}

void CsvBuilder::add_row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size()) {
        throw std::invalid_argument("CsvBuilder: cell count mismatch");
    }
    rows_.push_back(cells);
}

void CsvBuilder::add_numeric_row(const std::vector<double>& cells) {
    std::vector<std::string> row;
    row.reserve(cells.size());
    for (double v : cells) row.push_back(format_full(v));
    add_row(row);
}

std::string CsvBuilder::str() const {
    std::string out;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i) out += ',';
        out += columns_[i];
    }
    out += '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "'");
        out << content;
        if (!out.flush()) {
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
        }
    }
    fs::rename(tmp, target);
}

}  // namespace deepcond
