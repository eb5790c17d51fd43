#include "hambif/expression.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <vector>

namespace hambif {

struct Expression::Node {
    enum class Kind { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg };
    Kind kind = Kind::Constant;
    double value = 0.0;
    int var = -1;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, NodePtr l = nullptr, NodePtr r = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

struct Parser {
    const std::string& text;
    int numVars;
    size_t pos = 0;
    int line = 1;
    int col = 1;

    [[noreturn]] void fail(const std::string& msg) const {
        std::ostringstream os;
        os << "expression parse error at " << line << ":" << col << ": "
           << msg;
        throw ParseError(os.str(), line, col);
    }

    void advance(size_t count = 1) {
        for (size_t i = 0; i < count && pos < text.size(); ++i, ++pos) {
            if (text[pos] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    }

    void skipSpace() {
        while (pos < text.size() && std::isspace(
                                        static_cast<unsigned char>(text[pos])))
            advance();
    }

    bool peek(char c) {
        skipSpace();
        return pos < text.size() && text[pos] == c;
    }

    bool consume(char c) {
        if (!peek(c)) return false;
        advance();
        return true;
    }

    NodePtr parseExpr() {
        NodePtr node = parseTerm();
        for (;;) {
            if (consume('+')) {
                node = make(Kind::Add, node, parseTerm());
            } else if (consume('-')) {
                node = make(Kind::Sub, node, parseTerm());
            } else {
                return node;
            }
        }
    }

    NodePtr parseTerm() {
        NodePtr node = parseUnary();
        for (;;) {
            if (consume('*')) {
                node = make(Kind::Mul, node, parseUnary());
            } else if (consume('/')) {
                node = make(Kind::Div, node, parseUnary());
            } else {
                return node;
            }
        }
    }

    NodePtr parseUnary() {
        if (consume('-')) return make(Kind::Neg, parseUnary());
        if (consume('+')) return parseUnary();
        return parsePower();
    }

    NodePtr parsePower() {
        NodePtr base = parseAtom();
        // Right-associative: x^2^3 == x^(2^3).
        if (consume('^')) return make(Kind::Pow, base, parseUnary());
        return base;
    }

    NodePtr parseAtom() {
        skipSpace();
        if (pos >= text.size()) fail("unexpected end of expression");
        const char c = text[pos];
        if (c == '(') {
            advance();
            NodePtr inner = parseExpr();
            if (!consume(')')) fail("expected ')'");
            return inner;
        }
        if (c == 'x') {
            advance();
            size_t start = pos;
            while (pos < text.size() &&
                   std::isdigit(static_cast<unsigned char>(text[pos])))
                advance();
            if (pos == start) fail("expected variable index after 'x'");
            const int idx = std::stoi(text.substr(start, pos - start));
            if (idx < 1 || idx > numVars) {
                std::ostringstream os;
                os << "variable x" << idx << " out of range 1..x" << numVars;
                fail(os.str());
            }
            auto n = std::make_shared<Expression::Node>();
            n->kind = Kind::Variable;
            n->var = idx - 1;
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t start = pos;
            while (pos < text.size() &&
                   (std::isdigit(static_cast<unsigned char>(text[pos])) ||
                    text[pos] == '.'))
                advance();
            if (pos < text.size() &&
                (text[pos] == 'e' || text[pos] == 'E')) {
                advance();
                if (pos < text.size() &&
                    (text[pos] == '+' || text[pos] == '-'))
                    advance();
                while (pos < text.size() &&
                       std::isdigit(static_cast<unsigned char>(text[pos])))
                    advance();
            }
            auto n = std::make_shared<Expression::Node>();
            n->kind = Kind::Constant;
            try {
                n->value = std::stod(text.substr(start, pos - start));
            } catch (const std::exception&) {
                fail("malformed numeric literal");
            }
            return n;
        }
        std::ostringstream os;
        os << "unexpected character '" << c << "'";
        fail(os.str());
    }
};

double eval_node(const Expression::Node& n, const Eigen::VectorXd& vars) {
    switch (n.kind) {
        case Kind::Constant: return n.value;
        case Kind::Variable: return vars(n.var);
        case Kind::Add: return eval_node(*n.lhs, vars) + eval_node(*n.rhs, vars);
        case Kind::Sub: return eval_node(*n.lhs, vars) - eval_node(*n.rhs, vars);
        case Kind::Mul: return eval_node(*n.lhs, vars) * eval_node(*n.rhs, vars);
        case Kind::Div: return eval_node(*n.lhs, vars) / eval_node(*n.rhs, vars);
        case Kind::Pow:
            return std::pow(eval_node(*n.lhs, vars), eval_node(*n.rhs, vars));
        case Kind::Neg: return -eval_node(*n.lhs, vars);
    }
    return 0.0;
}

}  // namespace

Expression Expression::parse(const std::string& text, int numVars) {
    Parser p{text, numVars};
    Expression e;
    e.root_ = p.parseExpr();
    p.skipSpace();
    if (p.pos != text.size()) p.fail("trailing input");
    e.text_ = text;
    return e;
}

double Expression::eval(const Eigen::VectorXd& vars) const {
    return eval_node(*root_, vars);
}

}  // namespace hambif
