#include "hambif/problem.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "hambif/degree.hpp"
#include "hambif/expression.hpp"

namespace hambif {

namespace {

// ---------------------------------------------------------------------
// Registry problems: the two worked examples, with exact rational data.
// ---------------------------------------------------------------------

ProblemSpec registry_exmin() {
    // H(x) = x1^2 + 2 x2^2 + x3^2 + (x4 + (x3 - 1)^3)^4, strict global
    // minimum at (0, 0, 0, 1).
    ProblemSpec spec;
    spec.name = "paper-example-exmin";
    spec.n = 2;
    spec.gradH = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd g(4);
        const double w = x(3) + std::pow(x(2) - 1, 3);
        g(0) = 2 * x(0);
        g(1) = 4 * x(1);
        g(2) = 2 * x(2) + 12 * std::pow(w, 3) * (x(2) - 1) * (x(2) - 1);
        g(3) = 4 * std::pow(w, 3);
        return g;
    };
    spec.hamiltonian = [](const Eigen::VectorXd& x) {
        const double w = x(3) + std::pow(x(2) - 1, 3);
        return x(0) * x(0) + 2 * x(1) * x(1) + x(2) * x(2) + std::pow(w, 4);
    };
    CriticalPointSpec cp;
    cp.point = Eigen::VectorXd::Zero(4);
    cp.point(3) = 1.0;
    cp.declaredA = SymMatrix::Diag({2, 4});
    cp.declaredB = SymMatrix::Diag({2, 0});
    cp.strictExtremum = true;
    cp.name = "x0";
    spec.criticalPoints.push_back(std::move(cp));
    return spec;
}

ProblemSpec registry_paper1() {
    // H(x) = x1^2 + 2(x2-1)^2 - x3^2 + (x4 + (x3-2)^2)^6 + x5^2
    //        + (x6-1)^2 - x5 x6, single degenerate critical point.
    ProblemSpec spec;
    spec.name = "paper-example-1";
    spec.n = 3;
    spec.gradH = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd g(6);
        const double w = x(3) + (x(2) - 2) * (x(2) - 2);
        const double w5 = std::pow(w, 5);
        g(0) = 2 * x(0);
        g(1) = 4 * (x(1) - 1);
        g(2) = -2 * x(2) + 12 * w5 * (x(2) - 2);
        g(3) = 6 * w5;
        g(4) = 2 * x(4) - x(5);
        g(5) = 2 * (x(5) - 1) - x(4);
        return g;
    };
    spec.hamiltonian = [](const Eigen::VectorXd& x) {
        const double w = x(3) + (x(2) - 2) * (x(2) - 2);
        return x(0) * x(0) + 2 * std::pow(x(1) - 1, 2) - x(2) * x(2) +
               std::pow(w, 6) + x(4) * x(4) + std::pow(x(5) - 1, 2) -
               x(4) * x(5);
    };
    CriticalPointSpec cp;
    cp.point = Eigen::VectorXd(6);
    cp.point << 0, 1, 0, -4, 2.0 / 3.0, 4.0 / 3.0;
    cp.declaredA = SymMatrix::Diag({2, 4, -2});
    Eigen::MatrixXd b(3, 3);
    b << 0, 0, 0, 0, 2, -1, 0, -1, 2;
    cp.declaredB = SymMatrix(b);
    cp.name = "x0";
    spec.criticalPoints.push_back(std::move(cp));
    return spec;
}

// ---------------------------------------------------------------------
// Config-file parsing.
// ---------------------------------------------------------------------

[[noreturn]] void config_fail(int line, const std::string& msg) {
    std::ostringstream os;
    os << "config line " << line << ": " << msg;
    throw ConfigError(os.str());
}

// Numbers in config data may be plain literals or fractions "p/q".
double parse_number(const std::string& token, int line) {
    try {
        const auto slash = token.find('/');
        if (slash != std::string::npos) {
            const double num = std::stod(token.substr(0, slash));
            const double den = std::stod(token.substr(slash + 1));
            if (den == 0.0) config_fail(line, "zero denominator");
            return num / den;
        }
        size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size())
            config_fail(line, "malformed number '" + token + "'");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        config_fail(line, "malformed number '" + token + "'");
    }
}

std::vector<double> parse_number_list(const std::string& value, int line) {
    std::vector<double> out;
    std::istringstream is(value);
    std::string token;
    while (is >> token) out.push_back(parse_number(token, line));
    return out;
}

SymMatrix parse_matrix(const std::string& value, int line) {
    std::vector<std::vector<double>> rows;
    std::string rowText;
    std::istringstream is(value);
    while (std::getline(is, rowText, ';'))
        rows.push_back(parse_number_list(rowText, line));
    if (rows.empty()) config_fail(line, "empty matrix");
    const size_t cols = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != cols) config_fail(line, "ragged matrix rows");
    if (rows.size() != cols)
        config_fail(line, "matrix must be square");
    Eigen::MatrixXd m(rows.size(), cols);
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    return SymMatrix(m);
}

std::vector<std::string> split_semicolons(const std::string& value) {
    std::vector<std::string> out;
    std::string piece;
    std::istringstream is(value);
    while (std::getline(is, piece, ';')) out.push_back(piece);
    return out;
}

struct KeyValue {
    std::string key;
    std::string value;
    int line = 0;
};

ProblemSpec build_from_config(const std::vector<KeyValue>& problem,
                              const std::vector<KeyValue>& points,
                              const std::vector<KeyValue>& analysis) {
    ProblemSpec spec;

    std::optional<std::string> gradText;
    std::optional<std::string> hamText;
    std::optional<std::string> newtonM;
    std::optional<std::string> newtonGradV;
    int hamLine = 0, gradLine = 0, mLine = 0, vLine = 0;

    for (const auto& kv : problem) {
        if (kv.key == "name") {
            spec.name = kv.value;
        } else if (kv.key == "n") {
            spec.n = static_cast<int>(parse_number(kv.value, kv.line));
            if (spec.n < 1) config_fail(kv.line, "n must be >= 1");
        } else if (kv.key == "registry") {
            return registry_problem(kv.value);
        } else if (kv.key == "grad") {
            gradText = kv.value;
            gradLine = kv.line;
        } else if (kv.key == "hamiltonian") {
            hamText = kv.value;
            hamLine = kv.line;
        } else if (kv.key == "newton_m") {
            newtonM = kv.value;
            mLine = kv.line;
        } else if (kv.key == "newton_gradv") {
            newtonGradV = kv.value;
            vLine = kv.line;
        } else {
            config_fail(kv.line, "unknown [problem] key '" + kv.key + "'");
        }
    }
    if (spec.n == 0) throw ConfigError("config: [problem] must set n");
    const int dim = 2 * spec.n;

    if (gradText && (newtonM || newtonGradV))
        config_fail(gradLine, "give either grad or the newton_* pair");

    if (gradText) {
        const auto pieces = split_semicolons(*gradText);
        if (static_cast<int>(pieces.size()) != dim)
            config_fail(gradLine, "grad must list 2n = " +
                                      std::to_string(dim) + " expressions");
        auto exprs = std::make_shared<std::vector<Expression>>();
        for (const auto& p : pieces)
            exprs->push_back(Expression::parse(p, dim));
        spec.gradH = [exprs, dim](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            Eigen::VectorXd g(dim);
            for (int i = 0; i < dim; ++i) g(i) = (*exprs)[i].eval(x);
            return g;
        };
    } else if (newtonM && newtonGradV) {
        // H(y, z) = <M^-1 y, y>/2 + V(z): grad H = (M^-1 y, grad V(z)).
        const SymMatrix m = parse_matrix(*newtonM, mLine);
        if (m.dim() != spec.n)
            config_fail(mLine, "newton_m must be n x n");
        const Eigen::MatrixXd mInv = [&] {
            Eigen::FullPivLU<Eigen::MatrixXd> lu(m.mat());
            if (!lu.isInvertible())
                config_fail(mLine, "newton_m must be nonsingular");
            return lu.inverse();
        }();
        const auto pieces = split_semicolons(*newtonGradV);
        if (static_cast<int>(pieces.size()) != spec.n)
            config_fail(vLine, "newton_gradv must list n expressions");
        auto exprs = std::make_shared<std::vector<Expression>>();
        for (const auto& p : pieces)
            exprs->push_back(Expression::parse(p, spec.n));
        const int n = spec.n;
        spec.gradH = [mInv, exprs, n](
                         const Eigen::VectorXd& x) -> Eigen::VectorXd {
            Eigen::VectorXd g(2 * n);
            g.head(n) = mInv * x.head(n);
            const Eigen::VectorXd z = x.tail(n);
            for (int i = 0; i < n; ++i) g(n + i) = (*exprs)[i].eval(z);
            return g;
        };
        spec.newtonForm = true;
    } else if (!newtonM != !newtonGradV) {
        config_fail(newtonM ? mLine : vLine,
                    "newton_m and newton_gradv must come together");
    } else {
        throw ConfigError("config: [problem] needs grad, newton_*, or "
                          "registry");
    }

    if (hamText) {
        auto expr = std::make_shared<Expression>(
            Expression::parse(*hamText, dim));
        (void)hamLine;
        spec.hamiltonian = [expr](const Eigen::VectorXd& x) {
            return expr->eval(x);
        };
    }

    CriticalPointSpec current;
    bool open = false;
    auto flush = [&] {
        if (open) spec.criticalPoints.push_back(current);
        current = CriticalPointSpec{};
        open = false;
    };
    for (const auto& kv : points) {
        if (kv.key == "point") {
            flush();
            const auto values = parse_number_list(kv.value, kv.line);
            if (static_cast<int>(values.size()) != dim)
                config_fail(kv.line, "point must have 2n components");
            current.point =
                Eigen::Map<const Eigen::VectorXd>(values.data(), dim);
            current.name = "cp" + std::to_string(spec.criticalPoints.size());
            open = true;
        } else if (!open) {
            config_fail(kv.line, "'" + kv.key + "' before any 'point'");
        } else if (kv.key == "index") {
            current.assertedIndex =
                static_cast<int>(parse_number(kv.value, kv.line));
        } else if (kv.key == "A") {
            current.declaredA = parse_matrix(kv.value, kv.line);
        } else if (kv.key == "B") {
            current.declaredB = parse_matrix(kv.value, kv.line);
        } else if (kv.key == "name") {
            current.name = kv.value;
        } else if (kv.key == "strict_extremum") {
            current.strictExtremum = kv.value == "true" || kv.value == "1";
        } else {
            config_fail(kv.line,
                        "unknown [critical_points] key '" + kv.key + "'");
        }
    }
    flush();
    if (spec.criticalPoints.empty())
        throw ConfigError("config: [critical_points] lists no point");
    for (const auto& cp : spec.criticalPoints) {
        if (cp.declaredA.has_value() != cp.declaredB.has_value())
            throw ConfigError("config: declare both blocks A and B or "
                              "neither");
        if (cp.declaredA && cp.declaredA->dim() != spec.n)
            throw ConfigError("config: block A must be n x n");
        if (cp.declaredB && cp.declaredB->dim() != spec.n)
            throw ConfigError("config: block B must be n x n");
    }

    for (const auto& kv : analysis) {
        if (kv.key == "jmax") {
            spec.analysis.jMax =
                static_cast<int>(parse_number(kv.value, kv.line));
            if (spec.analysis.jMax < 1)
                config_fail(kv.line, "jmax must be >= 1");
        } else if (kv.key == "lambda_window") {
            const auto values = parse_number_list(kv.value, kv.line);
            if (values.size() != 2 || !(0 < values[0] && values[0] < values[1]))
                config_fail(kv.line, "lambda_window needs 0 < a < b");
            spec.analysis.lambdaWindow = {values[0], values[1]};
        } else if (kv.key == "validate_orbits") {
            spec.analysis.validateOrbits =
                kv.value == "true" || kv.value == "1";
        } else if (kv.key == "fd_step") {
            spec.analysis.fdStep = parse_number(kv.value, kv.line);
        } else if (kv.key == "amplitude") {
            spec.analysis.shootAmplitude = parse_number(kv.value, kv.line);
        } else if (kv.key == "box_halfwidth") {
            spec.analysis.boxHalfWidth = parse_number(kv.value, kv.line);
        } else {
            config_fail(kv.line, "unknown [analysis] key '" + kv.key + "'");
        }
    }
    return spec;
}

}  // namespace

std::vector<std::string> registry_names() {
    return {"paper-example-1", "paper-example-exmin"};
}

ProblemSpec registry_problem(const std::string& name) {
    if (name == "paper-example-exmin") return registry_exmin();
    if (name == "paper-example-1") return registry_paper1();
    throw ConfigError("unknown registry name '" + name + "'");
}

ProblemSpec load_problem(const std::string& pathOrRegistryName) {
    for (const auto& name : registry_names())
        if (name == pathOrRegistryName) return registry_problem(name);

    std::ifstream in(pathOrRegistryName);
    if (!in)
        throw ConfigError("cannot open config file or registry name '" +
                          pathOrRegistryName + "'");

    std::vector<KeyValue> problem, points, analysis;
    std::vector<KeyValue>* section = nullptr;
    std::string rawLine;
    int lineNo = 0;
    while (std::getline(in, rawLine)) {
        ++lineNo;
        std::string line = rawLine;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);

        if (line.front() == '[') {
            if (line == "[problem]")
                section = &problem;
            else if (line == "[critical_points]")
                section = &points;
            else if (line == "[analysis]")
                section = &analysis;
            else
                config_fail(lineNo, "unknown section " + line);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            config_fail(lineNo, "expected 'key = value'");
        if (section == nullptr)
            config_fail(lineNo, "key outside any section");
        KeyValue kv;
        kv.line = lineNo;
        kv.key = line.substr(0, eq);
        kv.value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            s = a == std::string::npos ? "" : s.substr(a, b - a + 1);
        };
        trim(kv.key);
        trim(kv.value);
        section->push_back(std::move(kv));
    }
    return build_from_config(problem, points, analysis);
}

SymMatrix finite_difference_hessian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradH,
    const Eigen::VectorXd& x, double step) {
    const int d = static_cast<int>(x.size());
    Eigen::MatrixXd h(d, d);
    for (int j = 0; j < d; ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp(j) += step;
        xm(j) -= step;
        h.col(j) = (gradH(xp) - gradH(xm)) / (2.0 * step);
    }
    return SymMatrix(h);  // symmetrized at construction
}

ResolvedPoint resolve_critical_point(const ProblemSpec& spec,
                                     const CriticalPointSpec& cps) {
    std::vector<std::string> warnings;
    const int n = spec.n;
    const Eigen::VectorXd& x0 = cps.point;
    if (static_cast<int>(x0.size()) != 2 * n)
        throw ConfigError("critical point dimension mismatch");

    const double gradNorm = spec.gradH(x0).cwiseAbs().maxCoeff();
    if (gradNorm > 1e-6) {
        std::ostringstream os;
        os << "point " << cps.name << ": |grad H| = " << gradNorm
           << ", not a critical point";
        throw ConfigError(os.str());
    }

    const SymMatrix fd =
        finite_difference_hessian(spec.gradH, x0, spec.analysis.fdStep);

    // The block-diagonal hypothesis is structural; a coupled Hessian
    // invalidates the whole analysis, so this is a hard error.
    const double offNorm =
        fd.mat().topRightCorner(n, n).cwiseAbs().maxCoeff();
    const double scale = 1.0 + fd.infNorm();
    if (offNorm > 1e-6 * scale) {
        std::ostringstream os;
        os << "point " << cps.name << ": off-diagonal Hessian block norm "
           << offNorm << " violates the block-diagonal hypothesis "
           << "grad^2 H = blockdiag(A, B)";
        throw HessianStructureError(os.str());
    }

    SymMatrix a = SymMatrix(Eigen::MatrixXd(fd.mat().topLeftCorner(n, n)));
    SymMatrix b =
        SymMatrix(Eigen::MatrixXd(fd.mat().bottomRightCorner(n, n)));
    if (cps.declaredA) {
        const double diff = std::max(
            (cps.declaredA->mat() - a.mat()).cwiseAbs().maxCoeff(),
            (cps.declaredB->mat() - b.mat()).cwiseAbs().maxCoeff());
        if (diff > 1e-4) {
            std::ostringstream os;
            os << "point " << cps.name << ": declared Hessian deviates from "
               << "finite differences by " << diff;
            warnings.push_back(os.str());
        }
        a = *cps.declaredA;
        b = *cps.declaredB;
    }

    CriticalPoint cp{x0, BlockHessian(a, b), 0, IndexSource::Computed,
                     cps.name};
    std::optional<DegreeCertificate> certificate;
    if (cps.assertedIndex) {
        cp.index = *cps.assertedIndex;
        cp.indexSource = IndexSource::UserAsserted;
    } else if (cps.strictExtremum) {
        cp.index = index_shortcut(StrictExtremum{});
        cp.indexSource = IndexSource::Shortcut;
    } else {
        VectorField field{2 * n, spec.gradH, std::nullopt};
        const DegreeResult result = topological_index_certified(
            field, x0, spec.analysis.boxHalfWidth);
        cp.index = result.degree;
        cp.indexSource = IndexSource::Computed;
        certificate = result.certificate;
    }
    return ResolvedPoint{std::move(cp), std::move(warnings),
                         std::move(certificate)};
}

}  // namespace hambif
