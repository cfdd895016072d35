#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace biharm::expr {

enum class UnaryOp { neg, sin, cos, tan, sinh, cosh, tanh, exp, ln, sqrt, abs };
enum class BinaryOp { add, sub, mul, div, pow };
enum class NodeKind { constant, variable, unary, binary };

/// Immutable expression tree. Copies share structure; evaluation is pure.
class Expression {
public:
    Expression(); // constant 0

    static Expression constant(double value);
    static Expression variable(std::string name);
    static Expression unary(UnaryOp op, Expression operand);
    static Expression binary(BinaryOp op, Expression lhs, Expression rhs);

    NodeKind kind() const;
    double constant_value() const;
    const std::string& variable_name() const;
    UnaryOp unary_op() const;
    BinaryOp binary_op() const;
    /// Child `i` of a unary (i = 0) or binary (i = 0, 1) node.
    const Expression& operand(int i) const;

    /// Structural equality.
    friend bool operator==(const Expression& a, const Expression& b);

    struct Node;

private:
    explicit Expression(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;
};

Expression operator+(Expression a, Expression b);
Expression operator-(Expression a, Expression b);
Expression operator*(Expression a, Expression b);
Expression operator/(Expression a, Expression b);
Expression operator-(Expression a);
Expression call(UnaryOp op, Expression a);

class ParseError : public std::runtime_error {
public:
    enum class Kind { syntax, unknown_function, arity };
    ParseError(Kind kind, std::size_t offset, std::vector<std::string> expected, const std::string& message);

    Kind kind() const { return kind_; }
    std::size_t offset() const { return offset_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    Kind kind_;
    std::size_t offset_;
    std::vector<std::string> expected_;
};

class EvalError : public std::runtime_error {
public:
    enum class Kind { unbound_variable, domain };
    EvalError(Kind kind, std::string subexpression, const std::string& message);

    Kind kind() const { return kind_; }
    /// Printed form of the offending node.
    const std::string& subexpression() const { return subexpression_; }

private:
    Kind kind_;
    std::string subexpression_;
};

/// Infix grammar with `^` for pow (right associative, binds tighter than unary minus).
/// `pi` is a reserved constant; function names are reserved words.
Expression parse(std::string_view source);

/// Minimal-parenthesis infix form; parse(print(e)) reproduces e for any parsed e.
std::string print(const Expression& e);

std::set<std::string> free_vars(const Expression& e);

/// Function names accepted in calls, e.g. "sin", "ln".
const std::vector<std::string>& function_names();

/// Evaluates over double or Jet3. Throws EvalError for unbound variables and domain
/// violations (ln/sqrt of invalid arguments, division by zero, non-integer power of a
/// negative base, non-finite results).
template <class Scalar>
Scalar eval(const Expression& e, const std::map<std::string, Scalar>& bindings);

/// Positional variant: `names[i]` is bound to `values[i]`.
template <class Scalar>
Scalar eval(const Expression& e, std::span<const std::string> names, std::span<const Scalar> values);

} // namespace biharm::expr
