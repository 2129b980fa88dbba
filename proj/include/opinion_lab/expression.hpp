#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace opinion_lab {

class ExpressionError : public std::runtime_error {
public:
    ExpressionError(const std::string& message, std::size_t column)
        : std::runtime_error(message + " (column " + std::to_string(column + 1) + ")"),
          column_(column) {}
    [[nodiscard]] std::size_t column() const { return column_; }

private:
    std::size_t column_;
};

/// Arithmetic expression over a fixed set of named variables.
///
/// Grammar: numbers, variables, + - * / ^, unary minus, parentheses,
/// comparisons (< <= > >=, yielding 1 or 0), the constant pi, and the
/// functions sin cos tan exp log sqrt abs floor min max pow.
/// Evaluation is pure; a compiled expression may be shared across threads.
class Expression {
public:
    Expression(const std::string& source, std::vector<std::string> variables);

    [[nodiscard]] double evaluate(std::span<const double> values) const;
    [[nodiscard]] const std::string& source() const { return source_; }

    struct Node;

private:
    std::string source_;
    std::vector<std::string> variables_;
    std::shared_ptr<const Node> root_;
};

}  // namespace opinion_lab
