#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "hambif/analyze.hpp"
#include "hambif/expression.hpp"

using namespace hambif;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& contents) {
        static int counter = 0;
        path = "hambif_test_config_" + std::to_string(counter++) + ".ini";
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("expression parser: grammar and errors") {
    Eigen::VectorXd x(2);
    x << 3.0, 2.0;

    CHECK(Expression::parse("x1 + 2*x2", 2).eval(x) == doctest::Approx(7));
    CHECK(Expression::parse("(x1 - x2)^3", 2).eval(x) == doctest::Approx(1));
    CHECK(Expression::parse("-x1^2", 2).eval(x) == doctest::Approx(-9));
    CHECK(Expression::parse("2^3^2", 2).eval(x) == doctest::Approx(512));
    CHECK(Expression::parse("x1/x2/2", 2).eval(x) == doctest::Approx(0.75));
    CHECK(Expression::parse("1.5e2 - 50", 2).eval(x) == doctest::Approx(100));
    CHECK(Expression::parse("x1*(x2 + 1) - 2", 2).eval(x) ==
          doctest::Approx(7));

    CHECK_THROWS_AS(Expression::parse("x3 + 1", 2), ParseError);
    CHECK_THROWS_AS(Expression::parse("x1 + ", 2), ParseError);
    CHECK_THROWS_AS(Expression::parse("(x1", 2), ParseError);
    CHECK_THROWS_AS(Expression::parse("x1 $ 2", 2), ParseError);
    try {
        Expression::parse("x1 +\n y", 2);
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.col >= 2);
    }
}

TEST_CASE("registry: built-in problems carry exact rational data") {
    auto exmin = load_problem("paper-example-exmin");
    CHECK(exmin.n == 2);
    REQUIRE(exmin.criticalPoints.size() == 1);
    const auto& cp = exmin.criticalPoints[0];
    CHECK(cp.point(3) == 1.0);
    CHECK(cp.strictExtremum);
    REQUIRE(cp.declaredA.has_value());
    CHECK((*cp.declaredA)(0, 0) == 2.0);
    CHECK((*cp.declaredA)(1, 1) == 4.0);
    CHECK((*cp.declaredB)(0, 0) == 2.0);
    CHECK((*cp.declaredB)(1, 1) == 0.0);
    CHECK(exmin.gradH(cp.point).cwiseAbs().maxCoeff() == 0.0);

    auto paper1 = load_problem("paper-example-1");
    CHECK(paper1.n == 3);
    const auto& cp1 = paper1.criticalPoints[0];
    CHECK(cp1.point(4) == doctest::Approx(2.0 / 3.0).epsilon(1e-16));
    CHECK((*cp1.declaredA)(2, 2) == -2.0);
    CHECK((*cp1.declaredB)(1, 2) == -1.0);
    CHECK(paper1.gradH(cp1.point).cwiseAbs().maxCoeff() <= 1e-15);

    CHECK_THROWS_AS(load_problem("paper-example-nope"), ConfigError);
}

TEST_CASE("finite-difference Hessian matches declared registry blocks") {
    for (const auto& name : registry_names()) {
        auto spec = load_problem(name);
        const auto& cp = spec.criticalPoints[0];
        const SymMatrix fd =
            finite_difference_hessian(spec.gradH, cp.point, 1e-5);
        const int n = spec.n;
        CHECK((fd.mat().topLeftCorner(n, n) - cp.declaredA->mat())
                  .cwiseAbs()
                  .maxCoeff() <= 1e-5);
        CHECK((fd.mat().bottomRightCorner(n, n) - cp.declaredB->mat())
                  .cwiseAbs()
                  .maxCoeff() <= 1e-5);
    }
}

TEST_CASE("config file: harmonic oscillator via the Newton form") {
    TempFile cfg(R"(# harmonic oscillator H = |y|^2/2 + |z|^2/2
[problem]
name = harmonic
n = 2
newton_m = 1 0 ; 0 1
newton_gradv = x1 ; x2

[critical_points]
point = 0 0 0 0
name = origin

[analysis]
jmax = 3
)");
    auto spec = load_problem(cfg.path);
    CHECK(spec.newtonForm);
    CHECK(spec.analysis.jMax == 3);

    // grad H is the identity field.
    Eigen::VectorXd x(4);
    x << 1, 2, 3, 4;
    CHECK((spec.gradH(x) - x).norm() <= 1e-14);

    auto report = analyze(spec);
    REQUIRE(report.points.size() == 1);
    const auto& pr = report.points[0];
    CHECK(pr.cp.index == 1);  // identity Hessian, nondegenerate minimum
    REQUIRE(pr.sigmaABPositive.size() == 1);
    CHECK(pr.sigmaABPositive[0].nu == doctest::Approx(1.0));
    CHECK(pr.sigmaABPositive[0].multiplicity == 2);
    // Candidates lambda0 = j for j = 1..3, all certified via localpos.
    REQUIRE(pr.candidates.size() == 3);
    for (const auto& c : pr.candidates) {
        CHECK(c.verdict.certified);
        CHECK(c.verdict.theorem == "localpos");
        CHECK(c.cand.lambda0 == doctest::Approx(c.cand.j));
        CHECK(c.eta.etas.at(c.cand.j) == 2);  // ind 1, jump 2*1*2
    }
}

TEST_CASE("config file: expression-defined gradient with asserted data") {
    TempFile cfg(R"([problem]
name = custom
n = 1
grad = 2*x1 ; 3*x2
[critical_points]
point = 0 0
index = 1
A = 2
B = 3
[analysis]
jmax = 2
lambda_window = 0.1 0.9
)");
    auto spec = load_problem(cfg.path);
    auto report = analyze(spec);
    REQUIRE(report.points.size() == 1);
    // sigma_+(AB) = {6}: lambda0 = j/sqrt(6): only j = 1 and 2 give
    // 0.408 and 0.816 inside the window.
    CHECK(report.points[0].candidates.size() == 2);
    CHECK(report.points[0].candidates[0].cand.lambda0 ==
          doctest::Approx(1.0 / std::sqrt(6.0)));
}

TEST_CASE("config errors carry line information") {
    TempFile missing(R"([problem]
n = 2
)");
    CHECK_THROWS_AS(load_problem(missing.path), ConfigError);

    TempFile badKey(R"([problem]
n = 1
grad = x1 ; x2
wrong_key = 3
[critical_points]
point = 0 0
)");
    try {
        load_problem(badKey.path);
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }

    TempFile badDim(R"([problem]
n = 2
grad = x1 ; x2 ; x3
[critical_points]
point = 0 0 0 0
)");
    CHECK_THROWS_AS(load_problem(badDim.path), ConfigError);

    // Validation of the point itself happens at resolve time.
    TempFile notCritical(R"([problem]
n = 1
grad = x1 + 1 ; x2
[critical_points]
point = 0 0
)");
    auto spec = load_problem(notCritical.path);
    CHECK_THROWS_AS(resolve_critical_point(spec, spec.criticalPoints[0]),
                    ConfigError);

    CHECK_THROWS_AS(load_problem("no_such_file.ini"), ConfigError);
}

TEST_CASE("block-diagonal hypothesis violations are hard errors") {
    // H = x1*x2 couples the y and z blocks: grad = (x2, x1).
    TempFile cfg(R"([problem]
n = 1
grad = x2 ; x1
[critical_points]
point = 0 0
)");
    auto spec = load_problem(cfg.path);
    CHECK_THROWS_AS(resolve_critical_point(spec, spec.criticalPoints[0]),
                    HessianStructureError);
}

TEST_CASE("declared-vs-FD Hessian deviation warns but does not fail") {
    TempFile cfg(R"([problem]
n = 1
grad = 2*x1 ; 3*x2
[critical_points]
point = 0 0
index = 1
A = 2.01
B = 3
)");
    auto spec = load_problem(cfg.path);
    auto rp = resolve_critical_point(spec, spec.criticalPoints[0]);
    REQUIRE(rp.warnings.size() == 1);
    CHECK(rp.warnings[0].find("deviates") != std::string::npos);
    CHECK(rp.cp.hessian.A(0, 0) == 2.01);  // declared wins
}

TEST_CASE("analyze on the strict-minimum registry problem") {
    auto spec = load_problem("paper-example-exmin");
    spec.analysis.jMax = 4;
    auto report = analyze(spec);

    REQUIRE(report.points.size() == 1);
    const auto& pr = report.points[0];
    CHECK(pr.cp.index == 1);
    CHECK(pr.cp.indexSource == IndexSource::Shortcut);
    REQUIRE(pr.candidates.size() == 4);  // j0 = 1..4 for nu = 4
    for (const auto& c : pr.candidates) {
        CHECK(c.verdict.certified);
        CHECK(c.verdict.theorem == "localpos");
        CHECK(c.cand.lambda0 == doctest::Approx(0.5 * c.cand.j));
        CHECK(c.eta.etas.at(c.cand.j) == 1);
    }
    REQUIRE(report.global.has_value());
    CHECK(report.global->EH == 1);
    bool sawGlobalOne = false;
    for (const auto& f : report.global->findings)
        if (f.corollary == "globalone") sawGlobalOne = true;
    CHECK(sawGlobalOne);
    CHECK(report.allCertifiedValidated);
}

TEST_CASE("analyze on the R^6 registry problem") {
    auto spec = load_problem("paper-example-1");
    spec.analysis.jMax = 2;
    auto report = analyze(spec);
    REQUIRE(report.points.size() == 1);
    const auto& pr = report.points[0];
    CHECK(pr.cp.index == -1);
    CHECK(pr.cp.indexSource == IndexSource::Computed);
    REQUIRE(pr.indexCertificate.has_value());
    CHECK(pr.indexCertificate->grade == CertGrade::SampledHeuristic);
    REQUIRE(pr.sigmaABPositive.size() == 1);  // only 2 + 2 sqrt 7 positive
    REQUIRE(pr.candidates.size() == 2);
    const double nu0 = 2 + 2 * std::sqrt(7.0);
    for (const auto& c : pr.candidates) {
        CHECK(c.verdict.certified);
        CHECK(c.verdict.theorem == "localodd");
        CHECK(c.eta.etas.at(c.cand.j) == -1);
    }
    REQUIRE(pr.candidates[0].emanation.has_value());
    CHECK(*pr.candidates[0].emanation->targetPeriod ==
          doctest::Approx(2 * M_PI / std::sqrt(nu0)).epsilon(1e-13));
    CHECK(pr.candidates[0].emanation->minimalPeriodCertified);
    // No definite block anywhere: the global section is skipped.
    CHECK_FALSE(report.global.has_value());
    CHECK(report.allCertifiedValidated);
}

TEST_CASE("report determinism: identical runs produce identical bytes") {
    auto spec = load_problem("paper-example-exmin");
    spec.analysis.jMax = 3;
    const auto a = analyze(spec);
    const auto b = analyze(spec);
    CHECK(a.to_text() == b.to_text());
    CHECK(a.to_json() == b.to_json());
    CHECK(a.to_json().find("\"certified\": true") != std::string::npos);
}
