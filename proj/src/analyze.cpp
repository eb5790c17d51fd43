#include "hambif/analyze.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

namespace hambif {

AnalysisReport analyze(const ProblemSpec& spec) {
    AnalysisReport rep;
    rep.toolName = kToolName;
    rep.toolVersion = kToolVersion;
    rep.problemName = spec.name;
    rep.config = spec.analysis;
    const char* seed = std::getenv("HAMBIF_SEED");
    rep.seedEcho = seed ? seed : "-";

    std::vector<CriticalPoint> resolved;
    for (const auto& cps : spec.criticalPoints) {
        ResolvedPoint rp = resolve_critical_point(spec, cps);
        PointReport pr{rp.cp, rp.warnings, rp.indexCertificate, {}, 0, {}};

        const auto ps = product_spectrum(rp.cp.hessian);
        pr.sigmaABPositive = ps.positive();
        pr.complexEigenvalues = static_cast<int>(ps.complexValues.size());

        const int jMax = spec.analysis.jMax;
        for (const auto& eig : pr.sigmaABPositive) {
            for (int j0 = 1; j0 <= jMax; ++j0) {
                const auto cand =
                    CandidateParam::make(j0, eig.nu, eig.multiplicity);
                if (spec.analysis.lambdaWindow) {
                    const auto [a, b] = *spec.analysis.lambdaWindow;
                    if (cand.lambda0 < a || cand.lambda0 > b) continue;
                }
                CandidateReport cr{cand,
                                   check_local(rp.cp, cand, jMax),
                                   bifurcation_index(rp.cp, cand, jMax),
                                   std::nullopt};
                if (cr.verdict.certified) {
                    cr.emanation =
                        emanation_report(rp.cp, cand, cr.verdict, jMax);
                } else {
                    rep.allCertifiedValidated =
                        rep.allCertifiedValidated && !cr.eta.nonzero();
                }
                pr.candidates.push_back(std::move(cr));
            }
        }
        resolved.push_back(rp.cp);
        rep.points.push_back(std::move(pr));
    }

    // Global classification needs a strictly definite block everywhere.
    try {
        int totalDegree = 0;
        for (const auto& cp : resolved) totalDegree += cp.index;
        rep.global = classify_global(resolved, totalDegree);
    } catch (const Error& e) {
        rep.globalSkipReason = e.what();
    }

    if (spec.analysis.validateOrbits) {
        HamiltonianField field{spec.n, spec.gradH, spec.hamiltonian};
        for (size_t i = 0; i < resolved.size(); ++i) {
            for (const auto& cr : rep.points[i].candidates) {
                if (cr.cand.j != 1 || !cr.verdict.certified) continue;
                OrbitValidation ov;
                ov.pointName = resolved[i].name;
                ov.lambda0 = cr.cand.lambda0;
                ov.predictedPeriod =
                    cr.emanation ? cr.emanation->targetPeriod : std::nullopt;
                auto outcome = shoot_periodic(
                    field, resolved[i].hessian, resolved[i].x0,
                    cr.cand.lambda0, spec.analysis.shootAmplitude);
                if (std::holds_alternative<OrbitRecord>(outcome)) {
                    const auto& rec = std::get<OrbitRecord>(outcome);
                    ov.converged = true;
                    ov.residual = rec.residual;
                    ov.amplitude = rec.amplitude;
                    ov.lambdaFound = rec.lambda;
                    const auto metrics =
                        trajectory_metrics(field, rec, resolved[i].x0);
                    ov.minimalPeriod = metrics.minimalPeriod;
                    ov.hausdorff = metrics.hausdorffToPoint;
                    if (ov.predictedPeriod) {
                        ov.periodWithinTol =
                            std::abs(ov.minimalPeriod - *ov.predictedPeriod) <=
                            0.05 * *ov.predictedPeriod;
                    }
                    ov.dump = orbit_dump(field, rec);
                    if (!ov.periodWithinTol && ov.predictedPeriod)
                        rep.allCertifiedValidated = false;
                } else {
                    const auto& f = std::get<ShootFailure>(outcome);
                    ov.converged = false;
                    ov.residual = f.bestResidual;
                    ov.failureReason = f.reason;
                    rep.allCertifiedValidated = false;
                }
                rep.orbits.push_back(std::move(ov));
            }
        }
    }
    return rep;
}

std::string AnalysisReport::to_text() const {
    std::ostringstream os;
    os.precision(12);
    os << toolName << " " << toolVersion << " analysis report\n";
    os << "problem: " << problemName << "\n";
    os << "config: jmax=" << config.jMax;
    if (config.lambdaWindow)
        os << " lambda_window=[" << config.lambdaWindow->first << ", "
           << config.lambdaWindow->second << "]";
    os << " validate_orbits=" << (config.validateOrbits ? "yes" : "no")
       << " fd_step=" << config.fdStep << " seed=" << seedEcho << "\n";

    for (const auto& p : points) {
        os << "\n== critical point " << p.cp.name << " at (";
        for (int i = 0; i < p.cp.x0.size(); ++i)
            os << (i ? ", " : "") << p.cp.x0(i);
        os << ")\n";
        for (const auto& w : p.warnings) os << "  warning: " << w << "\n";
        os << "  ind(grad H, x0) = " << p.cp.index << " ["
           << to_string(p.cp.indexSource) << "]\n";
        if (p.indexCertificate) {
            const auto& cert = *p.indexCertificate;
            os << "  degree certificate: "
               << (cert.grade == CertGrade::LipschitzCertified
                       ? "Lipschitz-certified"
                       : "sampled, not certified")
               << ", " << cert.pieces << " boundary pieces, "
               << cert.evaluations << " evaluations, min boundary |F| = "
               << cert.boundaryMinNorm << "\n";
        }
        os << "  sigma_+(AB) = {";
        for (size_t i = 0; i < p.sigmaABPositive.size(); ++i) {
            if (i) os << ", ";
            os << p.sigmaABPositive[i].nu << " (mult "
               << p.sigmaABPositive[i].multiplicity << ")";
        }
        os << "}";
        if (p.complexEigenvalues)
            os << " + " << p.complexEigenvalues << " complex (excluded)";
        os << "\n";

        for (const auto& c : p.candidates) {
            os << "  -- candidate j0=" << c.cand.j << " nu0=" << c.cand.nu
               << " lambda0=" << c.cand.lambda0 << "\n";
            os << "     verdict: "
               << (c.verdict.certified
                       ? "Certified(" + c.verdict.theorem + ")"
                       : "NotCertified")
               << "\n";
            for (const auto& t : c.verdict.trail)
                os << "       [" << (t.pass ? "pass" : "fail") << "] "
                   << t.hypothesis << ": " << t.evidence << "\n";
            os << "     eta:";
            for (const auto& [j, eta] : c.eta.etas)
                os << " eta_" << j << "=" << eta;
            os << "\n";
            for (const auto& m : c.eta.evidence)
                if (m.jump != 0)
                    os << "       jump(j=" << m.j << ") = " << m.jump
                       << " via " << to_string(m.route)
                       << " (eps=" << m.epsilon << ")\n";
            if (c.emanation) {
                os << "     emanation: periods";
                for (const auto& [j, T] : c.emanation->predictedPeriods)
                    os << " (j=" << j << ", T=" << T << ")";
                if (c.emanation->targetPeriod)
                    os << "; target " << *c.emanation->targetPeriod;
                os << "; minimal period "
                   << (c.emanation->minimalPeriodCertified ? "certified"
                                                           : "not certified")
                   << "\n";
            }
        }
    }

    os << "\n== global\n";
    if (global) {
        os << "  S+ = {";
        for (size_t i = 0; i < global->Splus.size(); ++i)
            os << (i ? ", " : "") << global->Splus[i];
        os << "}, S- = {";
        for (size_t i = 0; i < global->Sminus.size(); ++i)
            os << (i ? ", " : "") << global->Sminus[i];
        os << "}\n";
        os << "  #p(H) = " << global->pH.size()
           << ", #n(H) = " << global->nH.size() << ", E(H) = " << global->EH
           << "\n";
        for (const auto& f : global->findings)
            os << "  [" << f.corollary << "] " << f.statement << "\n";
    } else {
        os << "  skipped: " << globalSkipReason << "\n";
    }

    if (!orbits.empty()) {
        os << "\n== orbit validation\n";
        for (const auto& o : orbits) {
            os << "  " << o.pointName << " lambda0=" << o.lambda0 << ": ";
            if (o.converged) {
                os << "converged (residual " << o.residual << ", lambda "
                   << o.lambdaFound << ", amplitude " << o.amplitude
                   << ", minimal period " << o.minimalPeriod;
                if (o.predictedPeriod)
                    os << ", predicted " << *o.predictedPeriod << ", "
                       << (o.periodWithinTol ? "within" : "OUTSIDE")
                       << " 5%";
                os << ")\n";
            } else {
                os << "Failure (best residual " << o.residual << "; "
                   << o.failureReason << ")\n";
            }
        }
    }

    os << "\nresult: "
       << (allCertifiedValidated ? "all certified claims validated"
                                 : "validation incomplete")
       << "\n";
    return os.str();
}

std::string AnalysisReport::to_json() const {
    using json = nlohmann::ordered_json;
    json root;
    root["tool"] = {{"name", toolName}, {"version", toolVersion}};
    root["problem"] = problemName;
    json cfg;
    cfg["jmax"] = config.jMax;
    if (config.lambdaWindow)
        cfg["lambda_window"] = {config.lambdaWindow->first,
                                config.lambdaWindow->second};
    cfg["validate_orbits"] = config.validateOrbits;
    cfg["fd_step"] = config.fdStep;
    cfg["seed"] = seedEcho;
    root["config"] = cfg;

    root["critical_points"] = json::array();
    for (const auto& p : points) {
        json jp;
        jp["name"] = p.cp.name;
        jp["point"] = std::vector<double>(p.cp.x0.data(),
                                          p.cp.x0.data() + p.cp.x0.size());
        jp["index"] = p.cp.index;
        jp["index_source"] = to_string(p.cp.indexSource);
        if (p.indexCertificate) {
            const auto& cert = *p.indexCertificate;
            jp["index_certificate"] = {
                {"grade", cert.grade == CertGrade::LipschitzCertified
                              ? "lipschitz-certified"
                              : "sampled-not-certified"},
                {"pieces", cert.pieces},
                {"evaluations", cert.evaluations},
                {"max_depth", cert.maxDepthUsed},
                {"boundary_min_norm", cert.boundaryMinNorm}};
        }
        jp["warnings"] = p.warnings;
        jp["sigma_plus_AB"] = json::array();
        for (const auto& e : p.sigmaABPositive)
            jp["sigma_plus_AB"].push_back(
                {{"nu", e.nu}, {"multiplicity", e.multiplicity}});
        jp["complex_excluded"] = p.complexEigenvalues;
        jp["candidates"] = json::array();
        for (const auto& c : p.candidates) {
            json jc;
            jc["j0"] = c.cand.j;
            jc["nu0"] = c.cand.nu;
            jc["lambda0"] = c.cand.lambda0;
            jc["certified"] = c.verdict.certified;
            jc["theorem"] = c.verdict.theorem;
            jc["trail"] = json::array();
            for (const auto& t : c.verdict.trail)
                jc["trail"].push_back({{"hypothesis", t.hypothesis},
                                       {"pass", t.pass},
                                       {"evidence", t.evidence}});
            json etas;
            for (const auto& [j, eta] : c.eta.etas)
                etas[std::to_string(j)] = eta;
            jc["eta"] = etas;
            if (c.emanation) {
                json je;
                je["periods"] = json::array();
                for (const auto& [j, T] : c.emanation->predictedPeriods)
                    je["periods"].push_back({{"j", j}, {"period", T}});
                if (c.emanation->targetPeriod)
                    je["target_period"] = *c.emanation->targetPeriod;
                je["minimal_period_certified"] =
                    c.emanation->minimalPeriodCertified;
                jc["emanation"] = je;
            }
            jp["candidates"].push_back(jc);
        }
        root["critical_points"].push_back(jp);
    }

    if (global) {
        json jg;
        jg["S_plus"] = global->Splus;
        jg["S_minus"] = global->Sminus;
        auto pairList = [](const std::vector<GlobalClassification::Pair>& v) {
            json arr = json::array();
            for (const auto& pr : v)
                arr.push_back({{"point", pr.point},
                               {"omega", pr.omega},
                               {"multiplicity", pr.multiplicity},
                               {"index", pr.index},
                               {"s", pr.s}});
            return arr;
        };
        jg["p"] = pairList(global->pH);
        jg["n"] = pairList(global->nH);
        jg["E"] = global->EH;
        jg["findings"] = json::array();
        for (const auto& f : global->findings)
            jg["findings"].push_back(
                {{"corollary", f.corollary}, {"statement", f.statement}});
        root["global"] = jg;
    } else {
        root["global_skipped"] = globalSkipReason;
    }

    root["orbits"] = json::array();
    for (const auto& o : orbits) {
        json jo;
        jo["point"] = o.pointName;
        jo["lambda0"] = o.lambda0;
        jo["converged"] = o.converged;
        jo["residual"] = o.residual;
        if (o.converged) {
            jo["lambda"] = o.lambdaFound;
            jo["amplitude"] = o.amplitude;
            jo["minimal_period"] = o.minimalPeriod;
            jo["hausdorff"] = o.hausdorff;
            if (o.predictedPeriod) {
                jo["predicted_period"] = *o.predictedPeriod;
                jo["period_within_tol"] = o.periodWithinTol;
            }
        } else {
            jo["failure"] = o.failureReason;
        }
        root["orbits"].push_back(jo);
    }

    root["all_certified_validated"] = allCertifiedValidated;
    return root.dump(2) + "\n";
}

}  // namespace hambif
