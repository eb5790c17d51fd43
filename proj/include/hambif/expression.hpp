#pragma once

#include <memory>
#include <string>

#include <Eigen/Core>

#include "hambif/errors.hpp"

namespace hambif {

/// Arithmetic expression over variables x1..x{numVars}: +, -, *, /, ^,
/// parentheses, numeric literals. Parsed once, evaluated many times.
class Expression {
public:
    static Expression parse(const std::string& text, int numVars);

    double eval(const Eigen::VectorXd& vars) const;
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace hambif
