#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thermal_designs/spectral.hpp"

namespace support {

// Scratch directory unique to the running test binary.
inline std::filesystem::path scratch_dir() {
    static const std::filesystem::path dir = [] {
        auto p = std::filesystem::temp_directory_path() / ("thermal_designs_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(p);
        return p;
    }();
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Independent RFC-4180 reader: quoted fields, CRLF or LF, plus '#' comment
// lines. Returns false with a message on any structural violation.
struct StrictCsv {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> comments;
    std::string error;
};

inline StrictCsv strict_parse(const std::string& text) {
    StrictCsv out;
    std::size_t i = 0;
    std::size_t line = 1;
    std::size_t width = 0;
    while (i < text.size()) {
        if (text[i] == '#') {
            const std::size_t end = text.find('\n', i);
            out.comments.push_back(text.substr(i, end == std::string::npos ? std::string::npos : end - i));
            i = end == std::string::npos ? text.size() : end + 1;
            ++line;
            continue;
        }
        std::vector<std::string> rec;
        std::string field;
        bool done = false;
        while (!done) {
            field.clear();
            if (i < text.size() && text[i] == '"') {
                ++i;
                while (true) {
                    if (i >= text.size()) {
                        out.error = "unterminated quote at line " + std::to_string(line);
                        return out;
                    }
                    if (text[i] == '"') {
                        if (i + 1 < text.size() && text[i + 1] == '"') {
                            field += '"';
                            i += 2;
                            continue;
                        }
                        ++i;
                        break;
                    }
                    field += text[i++];
                }
            } else {
                while (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                    if (text[i] == '"') {
                        out.error = "stray quote at line " + std::to_string(line);
                        return out;
                    }
                    field += text[i++];
                }
            }
            rec.push_back(field);
            if (i >= text.size()) {
                done = true;
            } else if (text[i] == ',') {
                ++i;
            } else if (text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
                i += 2;
                done = true;
            } else if (text[i] == '\n') {
                ++i;
                done = true;
            } else {
                out.error = "bad character after field at line " + std::to_string(line);
                return out;
            }
        }
        if (width == 0) width = rec.size();
        if (rec.size() != width) {
            out.error = "record width mismatch at line " + std::to_string(line);
            return out;
        }
        out.records.push_back(std::move(rec));
        ++line;
    }
    if (out.records.empty()) out.error = "no header";
    return out;
}

// Spectrum with given energies and a random unitary basis.
inline thermal_designs::Spectrum random_basis_spectrum(const Eigen::VectorXd& energies, std::mt19937_64& rng) {
    const auto D = energies.size();
    std::normal_distribution<double> g;
    Eigen::MatrixXcd z(D, D);
    for (Eigen::Index r = 0; r < D; ++r)
        for (Eigen::Index c = 0; c < D; ++c) z(r, c) = {g(rng), g(rng)};
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    thermal_designs::Spectrum s;
    s.energies = energies;
    s.vectors = qr.householderQ() * Eigen::MatrixXcd::Identity(D, D);
    return s;
}

// Random sorted spectrum with entries of unit scale.
inline Eigen::VectorXd random_energies(Eigen::Index D, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::VectorXd e(D);
    for (auto& x : e) x = g(rng);
    std::sort(e.begin(), e.end());
    return e;
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double worst = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        worst = std::max(worst, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return worst;
}

}  // namespace support
