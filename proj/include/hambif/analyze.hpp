#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hambif/orbits.hpp"
#include "hambif/problem.hpp"

namespace hambif {

struct CandidateReport {
    CandidateParam cand;
    Verdict verdict;
    BifurcationIndex eta;
    std::optional<EmanationReport> emanation;
};

struct PointReport {
    CriticalPoint cp;
    std::vector<std::string> warnings;
    std::optional<DegreeCertificate> indexCertificate;
    std::vector<ProductSpectrum::RealEig> sigmaABPositive;
    int complexEigenvalues = 0;
    std::vector<CandidateReport> candidates;
};

struct OrbitValidation {
    std::string pointName;
    double lambda0 = 0.0;
    bool converged = false;
    double residual = 0.0;
    double amplitude = 0.0;
    double lambdaFound = 0.0;
    double minimalPeriod = 0.0;
    double hausdorff = 0.0;
    std::optional<double> predictedPeriod;
    bool periodWithinTol = false;
    std::string failureReason;
    std::string dump;  // tabular samples, empty on failure
};

struct AnalysisReport {
    std::string toolName;
    std::string toolVersion;
    std::string problemName;
    AnalysisConfig config;
    std::string seedEcho;  // HAMBIF_SEED if set, "-" otherwise
    std::vector<PointReport> points;
    std::optional<GlobalClassification> global;
    std::string globalSkipReason;
    std::vector<OrbitValidation> orbits;
    bool allCertifiedValidated = true;

    std::string to_text() const;
    std::string to_json() const;
};

/// Full pipeline: resolve points, enumerate candidates (j0 = 1..jMax per
/// positive product eigenvalue, intersected with the lambda window when
/// set), evaluate verdicts/indices/emanation, classify globally, and
/// optionally validate orbits by shooting. Deterministic for a fixed
/// spec. Internal-consistency violations (route disagreement,
/// certificate unsoundness) propagate as RouteDisagreement.
AnalysisReport analyze(const ProblemSpec& spec);

inline constexpr const char* kToolName = "hambif";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace hambif
