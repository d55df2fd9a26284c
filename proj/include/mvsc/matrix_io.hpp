#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvsc {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Writes a dense matrix as comma-separated numeric text, one row per line.
/// Precision is enough for bit-faithful double round-trips.
inline void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

/// Reads a comma-separated numeric text file into a dense matrix.
/// Rejects ragged rows and non-numeric tokens; empty file gives a 0x0 matrix.
inline Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            std::size_t pos = 0;
            double v;
            try {
                v = std::stod(tok, &pos);
            } catch (const std::exception&) {
                throw IoError("non-numeric token '" + tok + "' in " + path.string());
            }
            while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
            if (pos != tok.size())
                throw IoError("non-numeric token '" + tok + "' in " + path.string());
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError("ragged rows in " + path.string());
        rows.push_back(std::move(row));
    }
    if (rows.empty()) return Eigen::MatrixXd(0, 0);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

inline void save_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    for (int l : labels) out << l << '\n';
}

inline std::vector<int> load_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path.string());
    std::vector<int> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t pos = 0;
        int v;
        try {
            v = std::stoi(line, &pos);
        } catch (const std::exception&) {
            throw IoError("malformed label '" + line + "' in " + path.string());
        }
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
        if (pos != line.size())
            throw IoError("malformed label '" + line + "' in " + path.string());
        labels.push_back(v);
    }
    return labels;
}

}  // namespace mvsc
