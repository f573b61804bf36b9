// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <random>

namespace ankf::test {

// Deterministic helpers shared by the test binaries.
inline std::mt19937_64 rng(uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(g);
}

inline Eigen::Vector3d random_vec3(std::mt19937_64& g, double scale = 1.0) {
    return {uniform(g, -scale, scale), uniform(g, -scale, scale), uniform(g, -scale, scale)};
}

inline Eigen::Vector3d random_unit3(std::mt19937_64& g) {
    Eigen::Vector3d v;
    do {
        v = random_vec3(g);
    } while (v.norm() < 1e-3);
    return v.normalized();
}

// Dense matrix exponential by scaling-and-squaring over a Taylor series.
// Test-only oracle, independent of the closed forms under test.
inline Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& M) {
    int squarings = 0;
    double nrm = M.norm();
    while (nrm > 0.25) {
        nrm *= 0.5;
        ++squarings;
    }
    Eigen::MatrixXd A = M / std::pow(2.0, squarings);
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(M.rows(), M.cols());
    Eigen::MatrixXd term = result;
    for (int k = 1; k <= 30; ++k) {
        term = (term * A / static_cast<double>(k)).eval();
        result += term;
        if (term.norm() < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) result = (result * result).eval();
    return result;
}

}  // namespace ankf::test
