#include "opinion_lab/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

namespace opinion_lab {

struct Expression::Node {
    enum class Kind { Number, Variable, Unary, Binary, Call };
    Kind kind = Kind::Number;
    double number = 0.0;
    std::size_t variable = 0;
    std::string op;
    std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

struct FunctionSpec {
    const char* name;
    std::size_t arity;
};

constexpr FunctionSpec kFunctions[] = {
    {"sin", 1}, {"cos", 1}, {"tan", 1},  {"exp", 1}, {"log", 1}, {"sqrt", 1},
    {"abs", 1}, {"floor", 1}, {"min", 2}, {"max", 2}, {"pow", 2},
};

class Parser {
public:
    Parser(const std::string& src, const std::vector<std::string>& vars) : src_(src), vars_(vars) {}

    NodePtr parse() {
        auto node = comparison();
        skip_space();
        if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return node;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw ExpressionError(what, pos_); }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(const std::string& token) {
        skip_space();
        if (src_.compare(pos_, token.size(), token) == 0) {
            pos_ += token.size();
            return true;
        }
        return false;
    }

    static NodePtr make_binary(std::string op, NodePtr lhs, NodePtr rhs) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Binary;
        n->op = std::move(op);
        n->args = {std::move(lhs), std::move(rhs)};
        return n;
    }

    NodePtr comparison() {
        auto lhs = additive();
        for (;;) {
            std::string op;
            if (accept("<=")) op = "<=";
            else if (accept(">=")) op = ">=";
            else if (accept("<")) op = "<";
            else if (accept(">")) op = ">";
            else return lhs;
            lhs = make_binary(op, lhs, additive());
        }
    }

    NodePtr additive() {
        auto lhs = multiplicative();
        for (;;) {
            if (accept("+")) lhs = make_binary("+", lhs, multiplicative());
            else if (accept("-")) lhs = make_binary("-", lhs, multiplicative());
            else return lhs;
        }
    }

    NodePtr multiplicative() {
        auto lhs = unary();
        for (;;) {
            if (accept("*")) lhs = make_binary("*", lhs, unary());
            else if (accept("/")) lhs = make_binary("/", lhs, unary());
            else return lhs;
        }
    }

    NodePtr unary() {
        if (accept("-")) {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Unary;
            n->op = "-";
            n->args = {unary()};
            return n;
        }
        if (accept("+")) return unary();
        return power();
    }

    // right-associative, binds tighter than unary minus on its left operand
    NodePtr power() {
        auto base = primary();
        if (accept("^")) return make_binary("^", base, unary());
        return base;
    }

    NodePtr primary() {
        skip_space();
        if (pos_ >= src_.size()) fail("unexpected end of expression");
        const char c = src_[pos_];
        if (accept("(")) {
            auto inner = comparison();
            if (!accept(")")) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    NodePtr number() {
        const char* begin = src_.c_str() + pos_;
        char* end = nullptr;
        const double value = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Number;
        n->number = value;
        return n;
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string name = src_.substr(start, pos_ - start);
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == '(') {
            ++pos_;
            for (const auto& f : kFunctions) {
                if (name != f.name) continue;
                auto n = std::make_shared<Node>();
                n->kind = Node::Kind::Call;
                n->op = name;
                n->args.push_back(comparison());
                for (std::size_t k = 1; k < f.arity; ++k) {
                    if (!accept(",")) fail("function '" + name + "' expects " + std::to_string(f.arity) + " arguments");
                    n->args.push_back(comparison());
                }
                if (!accept(")")) fail("expected ')' after arguments of '" + name + "'");
                return n;
            }
            pos_ = start;
            fail("unknown function '" + name + "'");
        }
        if (name == "pi") {
            auto n = std::make_shared<Node>();
            n->number = std::numbers::pi;
            return n;
        }
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i] == name) {
                auto n = std::make_shared<Node>();
                n->kind = Node::Kind::Variable;
                n->variable = i;
                return n;
            }
        }
        pos_ = start;
        fail("unknown variable '" + name + "'");
    }

    const std::string& src_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;
};

double eval(const Node& n, std::span<const double> values) {
    switch (n.kind) {
    case Node::Kind::Number:
        return n.number;
    case Node::Kind::Variable:
        return values[n.variable];
    case Node::Kind::Unary:
        return -eval(*n.args[0], values);
    case Node::Kind::Binary: {
        const double a = eval(*n.args[0], values);
        const double b = eval(*n.args[1], values);
        switch (n.op[0]) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        case '^': return std::pow(a, b);
        case '<': return (n.op.size() == 2 ? a <= b : a < b) ? 1.0 : 0.0;
        case '>': return (n.op.size() == 2 ? a >= b : a > b) ? 1.0 : 0.0;
        default: break;
        }
        break;
    }
    case Node::Kind::Call: {
        const double a = eval(*n.args[0], values);
        const std::string& f = n.op;
        if (f == "sin") return std::sin(a);
        if (f == "cos") return std::cos(a);
        if (f == "tan") return std::tan(a);
        if (f == "exp") return std::exp(a);
        if (f == "log") return std::log(a);
        if (f == "sqrt") return std::sqrt(a);
        if (f == "abs") return std::abs(a);
        if (f == "floor") return std::floor(a);
        const double b = eval(*n.args[1], values);
        if (f == "min") return std::min(a, b);
        if (f == "max") return std::max(a, b);
        if (f == "pow") return std::pow(a, b);
        break;
    }
    }
    return std::nan("");
}

}  // namespace

Expression::Expression(const std::string& source, std::vector<std::string> variables)
    : source_(source), variables_(std::move(variables)) {
    root_ = Parser(source_, variables_).parse();
}

double Expression::evaluate(std::span<const double> values) const {
    if (values.size() != variables_.size()) {
        throw std::invalid_argument("expression '" + source_ + "' expects " +
                                    std::to_string(variables_.size()) + " values");
    }
    return eval(*root_, values);
}

}  // namespace opinion_lab
