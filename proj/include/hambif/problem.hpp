#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hambif/bifindex.hpp"
#include "hambif/degree.hpp"

namespace hambif {

struct CriticalPointSpec {
    Eigen::VectorXd point;
    std::optional<int> assertedIndex;
    std::optional<SymMatrix> declaredA;
    std::optional<SymMatrix> declaredB;
    /// Registry metadata: the Hamiltonian has a strict local extremum
    /// here, so the index shortcut 1 applies.
    bool strictExtremum = false;
    std::string name;
};

struct AnalysisConfig {
    int jMax = 8;
    std::optional<std::pair<double, double>> lambdaWindow;
    bool validateOrbits = false;
    double fdStep = 1e-5;
    double shootAmplitude = 1e-2;
    double boxHalfWidth = 0.5;
    std::string reportFormat = "text";
};

/// The Hamiltonian (gradient evaluator, critical points, Hessians) plus
/// the analysis configuration.
struct ProblemSpec {
    std::string name;
    int n = 0;  // state dimension is 2n
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradH;
    std::optional<std::function<double(const Eigen::VectorXd&)>> hamiltonian;
    std::vector<CriticalPointSpec> criticalPoints;
    AnalysisConfig analysis;
    bool newtonForm = false;  // built from H(y,z) = <M^-1 y, y>/2 + V(z)
};

/// Loads a problem from a config file, or resolves a built-in registry
/// name ("paper-example-1", "paper-example-exmin"). Config format: see
/// README (sections [problem], [critical_points], [analysis]).
ProblemSpec load_problem(const std::string& pathOrRegistryName);

ProblemSpec registry_problem(const std::string& name);
std::vector<std::string> registry_names();

/// Central-difference Hessian of grad H at x, symmetrized.
SymMatrix finite_difference_hessian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradH,
    const Eigen::VectorXd& x, double step);

struct ResolvedPoint {
    CriticalPoint cp;
    std::vector<std::string> warnings;
    /// Present when the index came from degree subdivision.
    std::optional<DegreeCertificate> indexCertificate;
};

/// Resolves Hessian blocks (declared wins, finite differences otherwise,
/// cross-checked either way), enforces the block-diagonal hypothesis,
/// and settles the topological index (asserted > extremum shortcut >
/// subdivision degree).
ResolvedPoint resolve_critical_point(const ProblemSpec& spec,
                                     const CriticalPointSpec& cps);

}  // namespace hambif
