#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace hambif {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

/// Eigen-solver iteration failure; carries the offending matrix.
struct EigenSolveError : Error {
    EigenSolveError(const std::string& msg, Eigen::MatrixXd m)
        : Error(msg), matrix(std::move(m)) {}
    Eigen::MatrixXd matrix;
};

struct NotCommutingError : Error {
    using Error::Error;
};

/// A lambda that is not (close enough to) an element of Lambda(L).
struct CandidateError : Error {
    using Error::Error;
};

/// Neither block is strictly definite, so the definite-route formula
/// does not apply.
struct DefiniteRouteError : Error {
    using Error::Error;
};

/// Two independent Morse-jump routes produced different integers.
struct RouteDisagreement : Error {
    using Error::Error;
};

struct ZeroOnBoundary : Error {
    ZeroOnBoundary(const std::string& msg, Eigen::VectorXd p)
        : Error(msg), point(std::move(p)) {}
    Eigen::VectorXd point;
};

struct DepthExceeded : Error {
    using Error::Error;
};

struct SecondZeroSuspected : Error {
    SecondZeroSuspected(const std::string& msg, Eigen::VectorXd p)
        : Error(msg), point(std::move(p)) {}
    Eigen::VectorXd point;
};

struct DivergenceError : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& msg, int line_, int col_)
        : Error(msg), line(line_), col(col_) {}
    int line;
    int col;
};

struct ConfigError : Error {
    using Error::Error;
};

/// The Hessian of the supplied Hamiltonian is not block-diagonal.
struct HessianStructureError : Error {
    using Error::Error;
};

}  // namespace hambif
