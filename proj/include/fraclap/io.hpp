#pragma once

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "fraclap/banded.hpp"
#include "fraclap/integrator.hpp"
#include "fraclap/quadrature.hpp"
#include "fraclap/rational.hpp"

namespace fraclap {

// 17 significant digits: enough to reproduce any double exactly.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Matrix Market coordinate format (real general, 1-based indices).
inline void write_matrix_market(std::ostream& os, const BandedMatrix& A) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    std::size_t nnz = 0;
    const std::size_t n = A.rows();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j0 = i > A.lower_bandwidth() ? i - A.lower_bandwidth() : 0;
        const std::size_t j1 = std::min(i + A.upper_bandwidth(), n == 0 ? 0 : n - 1);
        for (std::size_t j = j0; j <= j1 && j < n; ++j)
            if (A(i, j) != 0.0) ++nnz;
    }
    os << n << " " << n << " " << nnz << "\n";
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j0 = i > A.lower_bandwidth() ? i - A.lower_bandwidth() : 0;
        const std::size_t j1 = std::min(i + A.upper_bandwidth(), n == 0 ? 0 : n - 1);
        for (std::size_t j = j0; j <= j1 && j < n; ++j)
            if (A(i, j) != 0.0)
                os << i + 1 << " " << j + 1 << " " << format_g17(A(i, j)) << "\n";
    }
}

// Quadrature fixture format: node and weight per line.
inline void write_rule(std::ostream& os, const QuadratureRule& rule) {
    for (std::size_t j = 0; j < rule.k; ++j)
        os << format_g17(rule.nodes[j]) << " " << format_g17(rule.weights[j]) << "\n";
}

// Coefficient table (j, node, weight, gamma_j, eta_j) for cross-implementation checks.
inline void write_coefficients_csv(std::ostream& os, const QuadratureRule& rule,
                                   const RationalCoeffs& rc) {
    os << "j,node,weight,gamma,eta\n";
    for (std::size_t j = 0; j < rc.k; ++j)
        os << j + 1 << "," << format_g17(rule.nodes[j]) << "," << format_g17(rule.weights[j]) << ","
           << format_g17(rc.gamma[j]) << "," << format_g17(rc.eta[j]) << "\n";
}

// Trajectory as CSV: t, x_1..x_n.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                                 const std::string& config_echo = {}) {
    if (!config_echo.empty()) os << "# " << config_echo << "\n";
    os << "t";
    if (!traj.states.empty())
        for (std::size_t j = 0; j < traj.states.front().size(); ++j) os << ",x_" << j + 1;
    os << "\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        os << format_g17(traj.times[i]);
        for (double v : traj.states[i]) os << "," << format_g17(v);
        os << "\n";
    }
}

// key = value configuration; '#' starts a comment, blank lines ignored.
inline std::map<std::string, std::string> parse_config(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return kv;
}

}  // namespace fraclap
