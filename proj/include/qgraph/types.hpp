#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qgraph {

using Complex = std::complex<double>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr Complex I{0.0, 1.0};

// parameter outside the domain of a closed form or constructor
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// malformed input: wrong sizes, dangling edge ends, ...
struct StructuralError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// asked for a state at (k, q) where none exists
struct NoStateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qgraph
