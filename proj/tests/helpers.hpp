#pragma once

#include "efcml/types.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace efcml::test {

inline std::filesystem::path tmp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "efcml_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::filesystem::path write_file(const std::string& name, const std::string& content) {
    auto path = tmp_dir() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

inline VectorXd random_vector(Index n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    VectorXd v(n);
    for (Index i = 0; i < n; ++i) v(i) = g(rng);
    return v;
}

inline MatrixXd random_matrix(Index r, Index c, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    MatrixXd m(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) m(i, j) = g(rng);
    return m;
}

/// Random SPD matrix with controlled conditioning.
inline MatrixXd random_spd(Index n, std::mt19937_64& rng) {
    MatrixXd a = random_matrix(n, n + 3, rng);
    return a * a.transpose() + 0.5 * MatrixXd::Identity(n, n);
}

}  // namespace efcml::test
