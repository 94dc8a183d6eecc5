#include "deepcond/gram.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace deepcond {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Deterministic 53-bit uniforms / normals off a seeded mt19937_64 (the
// engine's bit stream is pinned by the standard, distributions are not).
double next_uniform(std::mt19937_64& eng) {
    return ((eng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

double next_normal(std::mt19937_64& eng) {
    double u1 = next_uniform(eng), u2 = next_uniform(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

GramMatrix::GramMatrix(int n, bool unit_diagonal)
    : n_(n), unit_diagonal_(unit_diagonal) {
    if (n < 1) throw std::invalid_argument("GramMatrix: n must be >= 1");
    a_.assign(static_cast<std::size_t>(n) * n, 0.0);
}

GramMatrix GramMatrix::identity(int n) {
    GramMatrix g(n, true);
    for (int i = 0; i < n; ++i) g.at(i, i) = 1.0;
    return g;
}

GramMatrix GramMatrix::equicorrelated(int n, double rho) {
    if (std::abs(rho) > 1.0) {
        throw std::invalid_argument("equicorrelated: |rho| must be <= 1");
    }
    GramMatrix g(n, true);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) g.at(i, j) = (i == j) ? 1.0 : rho;
    }
    return g;
}

GramMatrix GramMatrix::from_vectors(const std::vector<std::vector<double>>& rows) {
    const int n = static_cast<int>(rows.size());
    if (n < 1) throw std::invalid_argument("from_vectors: need at least one row");
    GramMatrix g(n, true);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            if (rows[j].size() != rows[i].size()) {
                throw std::invalid_argument("from_vectors: ragged rows");
            }
            double dot = 0.0;
            for (std::size_t k = 0; k < rows[i].size(); ++k) {
                dot += rows[i][k] * rows[j][k];
            }
            g.at(i, j) = g.at(j, i) = dot;
        }
    }
    for (int i = 0; i < n; ++i) g.at(i, i) = 1.0;
    return g;
}

GramMatrix GramMatrix::synthetic(int n, double delta, std::uint64_t seed) {
    if (!(delta > 0.0) || !(delta < 1.0)) {
        throw std::invalid_argument("synthetic: delta must be in (0, 1)");
    }
    std::mt19937_64 eng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::vector<double>> rows(n, std::vector<double>(n + 1));
    for (auto& row : rows) {
        double norm_sq = 0.0;
        for (double& v : row) {
            v = next_normal(eng);
            norm_sq += v * v;
        }
        double inv = 1.0 / std::sqrt(norm_sq);
        for (double& v : row) v *= inv;
    }
    GramMatrix g = from_vectors(rows);
    double max_off = g.max_abs_off_diagonal();
    // Blend toward the identity until the largest off-diagonal magnitude is
    // exactly 1 - delta. Stays a valid Gram of unit vectors (PSD with unit
    // diagonal).
    double target = 1.0 - delta;
    double scale = max_off > target ? target / max_off : 1.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j) g.at(i, j) *= scale;
        }
    }
    return g;
}

std::vector<std::vector<double>> GramMatrix::realize_unit_vectors() const {
    // Lower-triangular Cholesky; row i reproduces row i of the Gram.
    std::vector<std::vector<double>> rows(n_, std::vector<double>(n_, 0.0));
    for (int j = 0; j < n_; ++j) {
        double diag = at(j, j);
        for (int k = 0; k < j; ++k) diag -= rows[j][k] * rows[j][k];
        if (!(diag > 0.0)) {
            throw std::runtime_error(
                "realize_unit_vectors: matrix is not positive definite");
        }
        rows[j][j] = std::sqrt(diag);
        for (int i = j + 1; i < n_; ++i) {
            double s = at(i, j);
            for (int k = 0; k < j; ++k) s -= rows[i][k] * rows[j][k];
            rows[i][j] = s / rows[j][j];
        }
    }
    return rows;
}

double GramMatrix::max_abs_off_diagonal() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
            if (i != j) m = std::max(m, std::abs(at(i, j)));
        }
    }
    return m;
}

void GramMatrix::validate() const {
    for (int i = 0; i < n_; ++i) {
        for (int j = i + 1; j < n_; ++j) {
            if (std::abs(at(i, j) - at(j, i)) > 1e-12) {
                throw std::runtime_error("GramMatrix: not symmetric at (" +
                                         std::to_string(i) + ", " +
                                         std::to_string(j) + ")");
            }
        }
    }
    if (unit_diagonal_) {
        for (int i = 0; i < n_; ++i) {
            if (std::abs(at(i, i) - 1.0) > 1e-12) {
                throw std::runtime_error("GramMatrix: diagonal entry " +
                                         std::to_string(i) + " is not 1");
            }
            for (int j = 0; j < n_; ++j) {
                if (i != j && std::abs(at(i, j)) > 1.0 + 1e-9) {
                    throw std::runtime_error(
                        "GramMatrix: off-diagonal entry outside [-1, 1] at (" +
                        std::to_string(i) + ", " + std::to_string(j) + ")");
                }
            }
        }
    }
}

std::string GramMatrix::to_csv() const {
    std::string out;
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
            if (j) out += ',';
            out += format_double(at(i, j));
        }
        out += '\n';
    }
    return out;
}

GramMatrix GramMatrix::from_csv(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(cell, &pos));
                if (pos != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw std::runtime_error("CSV parse error at line " +
                                         std::to_string(line_no) + ": bad cell '" +
                                         cell + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    const int n = static_cast<int>(rows.size());
    if (n == 0) throw std::runtime_error("CSV parse error: no rows");
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n) {
            throw std::runtime_error("CSV parse error at line " +
                                     std::to_string(i + 1) + ": expected " +
                                     std::to_string(n) + " columns, got " +
                                     std::to_string(rows[i].size()));
        }
    }
    bool unit = true;
    for (int i = 0; i < n; ++i) unit = unit && std::abs(rows[i][i] - 1.0) <= 1e-12;
    GramMatrix g(n, unit);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) g.at(i, j) = rows[i][j];
    }
    return g;
}

std::string GramMatrix::to_json() const {
    nlohmann::json j;
    j["n"] = n_;
    j["unitDiagonal"] = unit_diagonal_;
    j["entries"] = a_;
    return j.dump();
}

GramMatrix GramMatrix::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    const int n = j.at("n").get<int>();
    GramMatrix g(n, j.at("unitDiagonal").get<bool>());
    auto entries = j.at("entries").get<std::vector<double>>();
    if (entries.size() != static_cast<std::size_t>(n) * n) {
        throw std::runtime_error("JSON gram: entries length does not match n^2");
    }
    g.entries() = std::move(entries);
    return g;
}

GramMatrix GramMatrix::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    GramMatrix g = path.size() > 5 && path.substr(path.size() - 5) == ".json"
                       ? from_json(text)
                       : from_csv(text);
    g.validate();
    return g;
}

}  // namespace deepcond
