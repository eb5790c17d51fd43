#pragma once

#include <functional>
#include <optional>

#include <Eigen/Core>

#include "hambif/errors.hpp"

namespace hambif {

struct VectorField {
    int dim = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval;
    /// Global Lipschitz bound for rigorous facet sign certificates; when
    /// absent, certification falls back to dense sampling with margin
    /// (flagged in the certificate as heuristic).
    std::optional<double> lipschitzHint;
};

struct Box {
    Eigen::VectorXd center;
    Eigen::VectorXd halfWidths;  // > 0 componentwise
};

enum class CertGrade {
    LipschitzCertified,
    SampledHeuristic,  // "sampled, not certified"
};

struct DegreeCertificate {
    CertGrade grade = CertGrade::SampledHeuristic;
    long evaluations = 0;
    long pieces = 0;        // sign-covered boundary pieces, all levels
    int maxDepthUsed = 0;
    double boundaryMinNorm = 0.0;  // min inf-norm of F over boundary samples
};

struct DegreeResult {
    int degree = 0;
    DegreeCertificate certificate;
};

/// Brouwer degree of F on the box, by adaptive boundary subdivision:
/// boundary pieces are split until some component of F has certified
/// constant sign on each, and the degree is assembled by the recursive
/// boundary/sign-vector formula. Deterministic for fixed inputs.
///
/// Throws ZeroOnBoundary if a boundary evaluation falls below
/// 1e-12 * (1 + max sampled |F|), DepthExceeded if certification fails
/// at maxDepth.
DegreeResult brouwer_degree(const VectorField& F, const Box& box,
                            int maxDepth = 42);

/// Degree of F on a box around an isolated zero x0. A coarse grid scan
/// shrinks the box (at most 6 halvings) while a second zero is
/// suspected; throws SecondZeroSuspected when shrinking does not help.
int topological_index(const VectorField& F, const Eigen::VectorXd& x0,
                      double initialHalfWidth, int maxDepth = 42);

/// Same, but keeps the boundary-certification evidence for reporting.
DegreeResult topological_index_certified(const VectorField& F,
                                         const Eigen::VectorXd& x0,
                                         double initialHalfWidth,
                                         int maxDepth = 42);

struct StrictExtremum {};
struct Nondegenerate {
    double det = 0.0;
};

/// ind(grad H, x0) from structural facts supplied by the caller:
/// a strict local extremum has index 1; a nondegenerate zero has index
/// sign(det Hessian).
int index_shortcut(StrictExtremum);
int index_shortcut(const Nondegenerate& n);

}  // namespace hambif
