#include "biharm/expr.hpp"

#include "biharm/jet.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <variant>

namespace biharm::expr {

struct Expression::Node {
    struct Unary {
        UnaryOp op;
        Expression operand;
    };
    struct Binary {
        BinaryOp op;
        Expression lhs, rhs;
    };
    std::variant<double, std::string, Unary, Binary> data;
};

namespace {

struct FunctionEntry {
    std::string_view name;
    UnaryOp op;
};

constexpr std::array<FunctionEntry, 10> kFunctions{{
    {"sin", UnaryOp::sin},
    {"cos", UnaryOp::cos},
    {"tan", UnaryOp::tan},
    {"sinh", UnaryOp::sinh},
    {"cosh", UnaryOp::cosh},
    {"tanh", UnaryOp::tanh},
    {"exp", UnaryOp::exp},
    {"ln", UnaryOp::ln},
    {"sqrt", UnaryOp::sqrt},
    {"abs", UnaryOp::abs},
}};

std::string_view function_name(UnaryOp op)
{
    for (const auto& f : kFunctions)
        if (f.op == op)
            return f.name;
    return "-";
}

} // namespace

Expression::Expression() : Expression(constant(0.0)) {}

Expression::Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expression Expression::constant(double value)
{
    return Expression(std::make_shared<const Node>(Node{value}));
}

Expression Expression::variable(std::string name)
{
    return Expression(std::make_shared<const Node>(Node{std::move(name)}));
}

Expression Expression::unary(UnaryOp op, Expression operand)
{
    return Expression(std::make_shared<const Node>(Node{Node::Unary{op, std::move(operand)}}));
}

Expression Expression::binary(BinaryOp op, Expression lhs, Expression rhs)
{
    return Expression(std::make_shared<const Node>(Node{Node::Binary{op, std::move(lhs), std::move(rhs)}}));
}

NodeKind Expression::kind() const { return static_cast<NodeKind>(node_->data.index()); }

double Expression::constant_value() const { return std::get<double>(node_->data); }

const std::string& Expression::variable_name() const { return std::get<std::string>(node_->data); }

UnaryOp Expression::unary_op() const { return std::get<Node::Unary>(node_->data).op; }

BinaryOp Expression::binary_op() const { return std::get<Node::Binary>(node_->data).op; }

const Expression& Expression::operand(int i) const
{
    if (kind() == NodeKind::unary)
        return std::get<Node::Unary>(node_->data).operand;
    const auto& b = std::get<Node::Binary>(node_->data);
    return i == 0 ? b.lhs : b.rhs;
}

bool operator==(const Expression& a, const Expression& b)
{
    if (a.node_ == b.node_)
        return true;
    if (a.kind() != b.kind())
        return false;
    switch (a.kind()) {
    case NodeKind::constant: return a.constant_value() == b.constant_value();
    case NodeKind::variable: return a.variable_name() == b.variable_name();
    case NodeKind::unary: return a.unary_op() == b.unary_op() && a.operand(0) == b.operand(0);
    case NodeKind::binary:
        return a.binary_op() == b.binary_op() && a.operand(0) == b.operand(0) && a.operand(1) == b.operand(1);
    }
    return false;
}

Expression operator+(Expression a, Expression b) { return Expression::binary(BinaryOp::add, std::move(a), std::move(b)); }
Expression operator-(Expression a, Expression b) { return Expression::binary(BinaryOp::sub, std::move(a), std::move(b)); }
Expression operator*(Expression a, Expression b) { return Expression::binary(BinaryOp::mul, std::move(a), std::move(b)); }
Expression operator/(Expression a, Expression b) { return Expression::binary(BinaryOp::div, std::move(a), std::move(b)); }
Expression operator-(Expression a) { return Expression::unary(UnaryOp::neg, std::move(a)); }
Expression call(UnaryOp op, Expression a) { return Expression::unary(op, std::move(a)); }

ParseError::ParseError(Kind kind, std::size_t offset, std::vector<std::string> expected, const std::string& message)
    : std::runtime_error(message), kind_(kind), offset_(offset), expected_(std::move(expected))
{
}

EvalError::EvalError(Kind kind, std::string subexpression, const std::string& message)
    : std::runtime_error(message), kind_(kind), subexpression_(std::move(subexpression))
{
}

const std::vector<std::string>& function_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& f : kFunctions)
            v.emplace_back(f.name);
        return v;
    }();
    return names;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Expression parse_all()
    {
        Expression e = parse_sum();
        skip_space();
        if (pos_ != src_.size())
            fail({"operator", "end of input"}, "unexpected '" + std::string(1, src_[pos_]) + "'");
        return e;
    }

private:
    void skip_space()
    {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
            ++pos_;
    }

    char peek()
    {
        skip_space();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    [[noreturn]] void fail(std::vector<std::string> expected, const std::string& what)
    {
        std::string msg = "syntax error at offset " + std::to_string(pos_) + ": " + what + " (expected ";
        for (std::size_t i = 0; i < expected.size(); ++i)
            msg += (i ? ", " : "") + expected[i];
        msg += ")";
        throw ParseError(ParseError::Kind::syntax, pos_, std::move(expected), msg);
    }

    Expression parse_sum()
    {
        Expression lhs = parse_product();
        for (;;) {
            const char c = peek();
            if (c != '+' && c != '-')
                return lhs;
            ++pos_;
            Expression rhs = parse_product();
            lhs = Expression::binary(c == '+' ? BinaryOp::add : BinaryOp::sub, std::move(lhs), std::move(rhs));
        }
    }

    Expression parse_product()
    {
        Expression lhs = parse_unary();
        for (;;) {
            const char c = peek();
            if (c != '*' && c != '/')
                return lhs;
            ++pos_;
            Expression rhs = parse_unary();
            lhs = Expression::binary(c == '*' ? BinaryOp::mul : BinaryOp::div, std::move(lhs), std::move(rhs));
        }
    }

    Expression parse_unary()
    {
        if (peek() == '-') {
            ++pos_;
            return Expression::unary(UnaryOp::neg, parse_unary());
        }
        return parse_power();
    }

    Expression parse_power()
    {
        Expression base = parse_atom();
        if (peek() == '^') {
            ++pos_;
            return Expression::binary(BinaryOp::pow, std::move(base), parse_unary());
        }
        return base;
    }

    static bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
    static bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9') || c == '_'; }
    static bool digit(char c) { return c >= '0' && c <= '9'; }

    Expression parse_atom()
    {
        const char c = peek();
        if (c == '(') {
            ++pos_;
            Expression inner = parse_sum();
            if (peek() != ')')
                fail({")"}, "unbalanced parenthesis");
            ++pos_;
            return inner;
        }
        if (digit(c) || c == '.')
            return parse_number();
        if (ident_start(c))
            return parse_identifier();
        fail({"number", "identifier", "(", "-"}, pos_ < src_.size() ? "unexpected '" + std::string(1, c) + "'" : "unexpected end of input");
    }

    Expression parse_number()
    {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && digit(src_[pos_]))
            ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && digit(src_[pos_]))
                ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t probe = pos_ + 1;
            if (probe < src_.size() && (src_[probe] == '+' || src_[probe] == '-'))
                ++probe;
            if (probe < src_.size() && digit(src_[probe])) {
                pos_ = probe;
                while (pos_ < src_.size() && digit(src_[pos_]))
                    ++pos_;
            }
        }
        double value = 0.0;
        const auto* first = src_.data() + start;
        const auto* last = src_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last) {
            pos_ = start;
            fail({"number"}, "malformed number");
        }
        return Expression::constant(value);
    }

    Expression parse_identifier()
    {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && ident_char(src_[pos_]))
            ++pos_;
        const std::string name(src_.substr(start, pos_ - start));
        const auto fn = std::find_if(kFunctions.begin(), kFunctions.end(), [&](const auto& f) { return f.name == name; });
        if (peek() == '(') {
            if (fn == kFunctions.end())
                throw ParseError(ParseError::Kind::unknown_function, start, function_names(),
                                 "unknown function '" + name + "' at offset " + std::to_string(start));
            ++pos_;
            Expression arg = parse_sum();
            const char close = peek();
            if (close == ',')
                throw ParseError(ParseError::Kind::arity, pos_, {")"},
                                 "function '" + name + "' takes exactly one argument (offset " + std::to_string(pos_) + ")");
            if (close != ')')
                fail({")"}, "unbalanced parenthesis in call to '" + name + "'");
            ++pos_;
            return Expression::unary(fn->op, std::move(arg));
        }
        if (fn != kFunctions.end())
            fail({"("}, "function name '" + name + "' used without an argument");
        if (name == "pi")
            return Expression::constant(std::numbers::pi);
        return Expression::variable(name);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

} // namespace

Expression parse(std::string_view source) { return Parser(source).parse_all(); }

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

namespace {

constexpr int kPrecSum = 1, kPrecProduct = 2, kPrecUnary = 3, kPrecPower = 4, kPrecAtom = 5;

int precedence(const Expression& e)
{
    switch (e.kind()) {
    case NodeKind::constant: return e.constant_value() < 0.0 || std::signbit(e.constant_value()) ? kPrecSum : kPrecAtom;
    case NodeKind::variable: return kPrecAtom;
    case NodeKind::unary: return e.unary_op() == UnaryOp::neg ? kPrecUnary : kPrecAtom;
    case NodeKind::binary:
        switch (e.binary_op()) {
        case BinaryOp::add:
        case BinaryOp::sub: return kPrecSum;
        case BinaryOp::mul:
        case BinaryOp::div: return kPrecProduct;
        case BinaryOp::pow: return kPrecPower;
        }
    }
    return kPrecAtom;
}

std::string format_number(double v)
{
    if (v == std::numbers::pi)
        return "pi";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void print_into(const Expression& e, std::string& out);

void print_child(const Expression& e, int min_prec, std::string& out)
{
    if (precedence(e) < min_prec) {
        out += '(';
        print_into(e, out);
        out += ')';
    } else {
        print_into(e, out);
    }
}

void print_into(const Expression& e, std::string& out)
{
    switch (e.kind()) {
    case NodeKind::constant: out += format_number(e.constant_value()); return;
    case NodeKind::variable: out += e.variable_name(); return;
    case NodeKind::unary:
        if (e.unary_op() == UnaryOp::neg) {
            out += '-';
            print_child(e.operand(0), kPrecUnary, out);
        } else {
            out += function_name(e.unary_op());
            out += '(';
            print_into(e.operand(0), out);
            out += ')';
        }
        return;
    case NodeKind::binary: {
        const BinaryOp op = e.binary_op();
        switch (op) {
        case BinaryOp::add:
        case BinaryOp::sub:
            print_child(e.operand(0), kPrecSum, out);
            out += op == BinaryOp::add ? '+' : '-';
            print_child(e.operand(1), kPrecSum + 1, out);
            return;
        case BinaryOp::mul:
        case BinaryOp::div:
            print_child(e.operand(0), kPrecProduct, out);
            out += op == BinaryOp::mul ? '*' : '/';
            print_child(e.operand(1), kPrecProduct + 1, out);
            return;
        case BinaryOp::pow:
            print_child(e.operand(0), kPrecAtom, out);
            out += '^';
            print_child(e.operand(1), kPrecUnary, out);
            return;
        }
    }
    }
}

void collect_vars(const Expression& e, std::set<std::string>& out)
{
    switch (e.kind()) {
    case NodeKind::constant: return;
    case NodeKind::variable: out.insert(e.variable_name()); return;
    case NodeKind::unary: collect_vars(e.operand(0), out); return;
    case NodeKind::binary:
        collect_vars(e.operand(0), out);
        collect_vars(e.operand(1), out);
        return;
    }
}

} // namespace

std::string print(const Expression& e)
{
    std::string out;
    print_into(e, out);
    return out;
}

std::set<std::string> free_vars(const Expression& e)
{
    std::set<std::string> out;
    collect_vars(e, out);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

template <class Scalar, class Lookup>
class Evaluator {
public:
    explicit Evaluator(const Lookup& lookup) : lookup_(lookup) {}

    Scalar run(const Expression& e)
    {
        using std::abs, std::cos, std::cosh, std::exp, std::log, std::pow, std::sin, std::sinh, std::sqrt, std::tan,
            std::tanh;
        switch (e.kind()) {
        case NodeKind::constant: return Scalar(e.constant_value());
        case NodeKind::variable: {
            const Scalar* v = lookup_(e.variable_name());
            if (!v)
                throw EvalError(EvalError::Kind::unbound_variable, e.variable_name(),
                                "unbound variable '" + e.variable_name() + "'");
            return *v;
        }
        case NodeKind::unary: {
            const Scalar u = run(e.operand(0));
            const double uv = value_of(u);
            switch (e.unary_op()) {
            case UnaryOp::neg: return -u;
            case UnaryOp::sin: return checked(e, sin(u));
            case UnaryOp::cos: return checked(e, cos(u));
            case UnaryOp::tan: return checked(e, tan(u));
            case UnaryOp::sinh: return checked(e, sinh(u));
            case UnaryOp::cosh: return checked(e, cosh(u));
            case UnaryOp::tanh: return checked(e, tanh(u));
            case UnaryOp::exp: return checked(e, exp(u));
            case UnaryOp::ln:
                if (!(uv > 0.0))
                    domain(e, "logarithm of a nonpositive value");
                return checked(e, log(u));
            case UnaryOp::sqrt:
                if (uv < 0.0 || (uv == 0.0 && !std::is_same_v<Scalar, double>))
                    domain(e, "square root outside its differentiable domain");
                return checked(e, sqrt(u));
            case UnaryOp::abs: return abs(u);
            }
            break;
        }
        case NodeKind::binary: {
            const Scalar a = run(e.operand(0));
            const Scalar b = run(e.operand(1));
            switch (e.binary_op()) {
            case BinaryOp::add: return a + b;
            case BinaryOp::sub: return a - b;
            case BinaryOp::mul: return a * b;
            case BinaryOp::div:
                if (value_of(b) == 0.0)
                    domain(e, "division by zero");
                return checked(e, a / b);
            case BinaryOp::pow: return power(e, a, b);
            }
            break;
        }
        }
        return Scalar(0.0);
    }

private:
    [[noreturn]] static void domain(const Expression& e, const std::string& what)
    {
        const std::string text = print(e);
        throw EvalError(EvalError::Kind::domain, text, "domain error in '" + text + "': " + what);
    }

    static Scalar checked(const Expression& e, Scalar r)
    {
        if (!std::isfinite(value_of(r)))
            domain(e, "non-finite result");
        return r;
    }

    static Scalar power(const Expression& e, const Scalar& a, const Scalar& b)
    {
        const double av = value_of(a), bv = value_of(b);
        const bool integral = std::floor(bv) == bv;
        bool constant_exponent = true;
        if constexpr (!std::is_same_v<Scalar, double>)
            constant_exponent = is_constant(b);
        if (av < 0.0 && (!integral || !constant_exponent))
            domain(e, "non-integer power of a negative base");
        if (av == 0.0 && bv < 0.0)
            domain(e, "division by zero");
        if constexpr (std::is_same_v<Scalar, double>) {
            return checked(e, std::pow(a, b));
        } else {
            if (constant_exponent) {
                if (av == 0.0 && !integral)
                    domain(e, "non-integer power at zero");
                return checked(e, pow(a, bv));
            }
            if (!(av > 0.0))
                domain(e, "variable exponent needs a positive base");
            return checked(e, pow(a, b));
        }
    }

    const Lookup& lookup_;
};

template <class Scalar, class Lookup>
Scalar run_eval(const Expression& e, const Lookup& lookup)
{
    return Evaluator<Scalar, Lookup>(lookup).run(e);
}

} // namespace

template <class Scalar>
Scalar eval(const Expression& e, const std::map<std::string, Scalar>& bindings)
{
    auto lookup = [&](const std::string& name) -> const Scalar* {
        auto it = bindings.find(name);
        return it == bindings.end() ? nullptr : &it->second;
    };
    return run_eval<Scalar>(e, lookup);
}

template <class Scalar>
Scalar eval(const Expression& e, std::span<const std::string> names, std::span<const Scalar> values)
{
    auto lookup = [&](const std::string& name) -> const Scalar* {
        for (std::size_t i = 0; i < names.size() && i < values.size(); ++i)
            if (names[i] == name)
                return &values[i];
        return nullptr;
    };
    return run_eval<Scalar>(e, lookup);
}

template double eval<double>(const Expression&, const std::map<std::string, double>&);
template Jet3 eval<Jet3>(const Expression&, const std::map<std::string, Jet3>&);
template double eval<double>(const Expression&, std::span<const std::string>, std::span<const double>);
template Jet3 eval<Jet3>(const Expression&, std::span<const std::string>, std::span<const Jet3>);

} // namespace biharm::expr
