#include "cr/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace cr {

namespace {

using Node = Expression::Node;
using NodePtr = Expression::NodePtr;
using Op = Expression::Op;
using Fn = Expression::Fn;

struct Token {
    enum Kind { Number, Name, Symbol, End } kind = End;
    std::string text;
    double number = 0.0;
    std::size_t offset = 0;
};

std::vector<Token> lex(const std::string& s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token t;
        t.offset = i;
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < s.size() &&
                                                           std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            if (j < s.size() && s[j] == '.') {
                ++j;
                while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            }
            if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
                if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
                    while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
                    j = k;
                } else {
                    throw ParseError("malformed exponent in number", k);
                }
            }
            t.kind = Token::Number;
            t.text = s.substr(i, j - i);
            auto res = std::from_chars(s.data() + i, s.data() + j, t.number);
            if (res.ec != std::errc()) throw ParseError("malformed number", i);
            i = j;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            t.kind = Token::Name;
            t.text = s.substr(i, j - i);
            i = j;
        } else if (std::string("+-*/^(),").find(c) != std::string::npos) {
            t.kind = Token::Symbol;
            t.text = std::string(1, c);
            ++i;
        } else {
            throw ParseError(std::string("unexpected character '") + c + "'", i);
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.offset = s.size();
    out.push_back(end);
    return out;
}

bool function_named(const std::string& name, Fn& fn, std::size_t& arity) {
    static const std::pair<const char*, Fn> table[] = {
        {"sin", Fn::Sin}, {"cos", Fn::Cos}, {"sqrt", Fn::Sqrt}, {"exp", Fn::Exp},
        {"log", Fn::Log}, {"abs", Fn::Abs}, {"atan2", Fn::Atan2}};
    for (const auto& [n, f] : table) {
        if (name == n) {
            fn = f;
            arity = f == Fn::Atan2 ? 2 : 1;
            return true;
        }
    }
    return false;
}

const char* function_name(Fn fn) {
    switch (fn) {
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Sqrt: return "sqrt";
    case Fn::Exp: return "exp";
    case Fn::Log: return "log";
    case Fn::Abs: return "abs";
    case Fn::Atan2: return "atan2";
    }
    return "?";
}

NodePtr make_node(Op op, std::vector<NodePtr> args) {
    auto n = std::make_shared<Node>();
    n->op = op;
    for (const auto& a : args) n->depends = n->depends || a->depends;
    n->args = std::move(args);
    return n;
}

NodePtr make_const(double v, bool pi = false) {
    auto n = std::make_shared<Node>();
    n->value = v;
    n->named_pi = pi;
    return n;
}

class Parser {
public:
    Parser(const std::string& text, const std::vector<std::string>& vars,
           const std::vector<std::string>& params)
        : toks_(lex(text)), vars_(vars), params_(params) {}

    NodePtr run() {
        NodePtr e = sum();
        if (peek().kind != Token::End) throw ParseError("unexpected '" + peek().text + "'", peek().offset);
        return e;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    bool at_symbol(const char* s) const { return peek().kind == Token::Symbol && peek().text == s; }
    Token take() { return toks_[pos_++]; }

    void expect(const char* s) {
        if (!at_symbol(s)) {
            const Token& t = peek();
            throw ParseError(std::string("expected '") + s + "'" +
                                 (t.kind == Token::End ? " before end of input" : " but found '" + t.text + "'"),
                             t.offset);
        }
        ++pos_;
    }

    NodePtr sum() {
        NodePtr lhs = product();
        while (at_symbol("+") || at_symbol("-")) {
            const Op op = take().text == "+" ? Op::Add : Op::Sub;
            lhs = make_node(op, {lhs, product()});
        }
        return lhs;
    }

    NodePtr product() {
        NodePtr lhs = unary();
        while (at_symbol("*") || at_symbol("/")) {
            const Op op = take().text == "*" ? Op::Mul : Op::Div;
            lhs = make_node(op, {lhs, unary()});
        }
        return lhs;
    }

    NodePtr unary() {
        if (at_symbol("-")) {
            ++pos_;
            return make_node(Op::Neg, {unary()});
        }
        if (at_symbol("+")) {
            ++pos_;
            return unary();
        }
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (at_symbol("^")) {
            ++pos_;
            return make_node(Op::Pow, {base, unary()});
        }
        return base;
    }

    NodePtr primary() {
        const Token t = peek();
        if (t.kind == Token::Number) {
            ++pos_;
            return make_const(t.number);
        }
        if (at_symbol("(")) {
            ++pos_;
            NodePtr e = sum();
            expect(")");
            return e;
        }
        if (t.kind == Token::Name) {
            ++pos_;
            if (at_symbol("(")) return call(t);
            for (std::size_t i = 0; i < vars_.size(); ++i) {
                if (vars_[i] == t.text) {
                    auto n = std::make_shared<Node>();
                    n->op = Op::Var;
                    n->index = i;
                    n->depends = true;
                    return n;
                }
            }
            for (std::size_t i = 0; i < params_.size(); ++i) {
                if (params_[i] == t.text) {
                    auto n = std::make_shared<Node>();
                    n->op = Op::Param;
                    n->index = i;
                    return n;
                }
            }
            if (t.text == "pi") return make_const(std::numbers::pi, true);
            throw ParseError("unknown identifier '" + t.text + "'", t.offset);
        }
        if (t.kind == Token::End) throw ParseError("unexpected end of input", t.offset);
        throw ParseError("unexpected '" + t.text + "'", t.offset);
    }

    NodePtr call(const Token& name) {
        Fn fn{};
        std::size_t arity = 0;
        if (!function_named(name.text, fn, arity))
            throw ParseError("unknown identifier '" + name.text + "'", name.offset);
        expect("(");
        std::vector<NodePtr> args{sum()};
        while (at_symbol(",")) {
            ++pos_;
            args.push_back(sum());
        }
        expect(")");
        if (args.size() != arity)
            throw ParseError(name.text + " takes " + std::to_string(arity) + " argument(s), got " +
                                 std::to_string(args.size()),
                             name.offset);
        auto n = std::const_pointer_cast<Node>(make_node(Op::Call, std::move(args)));
        n->fn = fn;
        return n;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    const std::vector<std::string>& vars_;
    const std::vector<std::string>& params_;
};

// Binding strength used by the printer; mirrors the grammar levels.
int precedence(const Node& n) {
    switch (n.op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Const: return std::signbit(n.value) ? 3 : 5;
    default: return 5;
    }
}

void print(const Node& n, const std::vector<std::string>& vars, const std::vector<std::string>& params,
           std::string& out) {
    auto child = [&](const Node& c, bool parens) {
        if (parens) out += '(';
        print(c, vars, params, out);
        if (parens) out += ')';
    };
    switch (n.op) {
    case Op::Const: out += n.named_pi ? "pi" : format_number(n.value); return;
    case Op::Var: out += vars[n.index]; return;
    case Op::Param: out += params[n.index]; return;
    case Op::Neg:
        out += '-';
        child(*n.args[0], precedence(*n.args[0]) < 3);
        return;
    case Op::Pow:
        child(*n.args[0], precedence(*n.args[0]) <= 4);
        out += '^';
        child(*n.args[1], precedence(*n.args[1]) < 3);
        return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
        const int p = precedence(n);
        child(*n.args[0], precedence(*n.args[0]) < p);
        out += n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : n.op == Op::Mul ? "*" : "/";
        child(*n.args[1], precedence(*n.args[1]) <= p);
        return;
    }
    case Op::Call:
        out += function_name(n.fn);
        out += '(';
        for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += ", ";
            print(*n.args[i], vars, params, out);
        }
        out += ')';
        return;
    }
}

template <class T> bool has_derivative(const T& x) {
    if constexpr (is_dual_v<T>) {
        for (const auto& d : x.d)
            if (value_of(d) != 0.0) return true;
        return false;
    } else {
        (void)x;
        return false;
    }
}

bool is_integer(double c) { return std::isfinite(c) && c == std::round(c); }

template <class T> struct Evaluator {
    const std::vector<T>& vars;
    const Vec& params;
    const Expression& owner;

    [[noreturn]] void fail(const std::string& what, const Node& n) const {
        std::string text;
        print(n, owner.variables(), owner.parameters(), text);
        throw DomainError(what + " in '" + text + "'");
    }

    T operator()(const Node& n) const {
        switch (n.op) {
        case Op::Const: return T(n.value);
        case Op::Var: return vars[n.index];
        case Op::Param: return T(params[n.index]);
        case Op::Neg: return -(*this)(*n.args[0]);
        case Op::Add: return (*this)(*n.args[0]) + (*this)(*n.args[1]);
        case Op::Sub: return (*this)(*n.args[0]) - (*this)(*n.args[1]);
        case Op::Mul: return (*this)(*n.args[0]) * (*this)(*n.args[1]);
        case Op::Div: {
            T num = (*this)(*n.args[0]);
            T den = (*this)(*n.args[1]);
            if (value_of(den) == 0.0) fail("division by zero", n);
            return num / den;
        }
        case Op::Pow: return power(n);
        case Op::Call: return call(n);
        }
        return T(0.0);
    }

    T power(const Node& n) const {
        T base = (*this)(*n.args[0]);
        const double b = value_of(base);
        if (!n.args[1]->depends) {
            // Exponent is a constant: power rule, negative bases allowed for integer exponents.
            const double c = value_of((*this)(*n.args[1]));
            if (b < 0.0 && !is_integer(c)) fail("non-integer power of a negative base", n);
            if (b == 0.0 && c < 0.0) fail("division by zero", n);
            if (b == 0.0 && c < 1.0 && c != 0.0 && has_derivative(base))
                fail("derivative of a fractional power at 0", n);
            if constexpr (is_dual_v<T>) {
                return pow(base, c);
            } else {
                return std::pow(b, c);
            }
        }
        T expo = (*this)(*n.args[1]);
        if (b <= 0.0) fail("variable power of a non-positive base", n);
        return exp(expo * log(base));
    }

    T call(const Node& n) const {
        T a = (*this)(*n.args[0]);
        const double x = value_of(a);
        switch (n.fn) {
        case Fn::Sin: return sin(a);
        case Fn::Cos: return cos(a);
        case Fn::Exp: return exp(a);
        case Fn::Sqrt:
            if (x < 0.0) fail("sqrt of a negative value", n);
            if (x == 0.0 && has_derivative(a)) fail("derivative of sqrt at 0", n);
            return sqrt(a);
        case Fn::Log:
            if (x <= 0.0) fail("log of a non-positive value", n);
            return log(a);
        case Fn::Abs:
            if (x == 0.0 && has_derivative(a)) fail("derivative of abs at 0", n);
            return abs(a);
        case Fn::Atan2: {
            T b = (*this)(*n.args[1]);
            if (x == 0.0 && value_of(b) == 0.0) fail("atan2 of (0, 0)", n);
            return atan2(a, b);
        }
        }
        return a;
    }
};

bool same_node(const Node& a, const Node& b) {
    if (a.op != b.op || a.args.size() != b.args.size()) return false;
    switch (a.op) {
    case Op::Const:
        if (a.value != b.value) return false;
        break;
    case Op::Var:
    case Op::Param:
        if (a.index != b.index) return false;
        break;
    case Op::Call:
        if (a.fn != b.fn) return false;
        break;
    default: break;
    }
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!same_node(*a.args[i], *b.args[i])) return false;
    return true;
}

NodePtr substitute_node(const NodePtr& n, const std::vector<Expression>& repl, const Vec& params) {
    switch (n->op) {
    case Op::Var: return repl[n->index].root();
    case Op::Param: return make_const(params.at(n->index));
    case Op::Const: return n;
    default: break;
    }
    std::vector<NodePtr> args;
    for (const auto& a : n->args) args.push_back(substitute_node(a, repl, params));
    auto out = std::const_pointer_cast<Node>(make_node(n->op, std::move(args)));
    out->fn = n->fn;
    return out;
}

class ExprScalar final : public ScalarField {
public:
    ExprScalar(Expression e, Vec params) : e_(std::move(e)), params_(std::move(params)) {}
    std::size_t dim() const override { return e_.variables().size(); }
    double eval(const Vec& x) const override { return e_.evaluate(x, params_); }
    bool differentiable() const override { return true; }
    Dual1 eval_d1(const std::vector<Dual1>& x) const override { return e_.evaluate(x, params_); }
    Dual2 eval_d2(const std::vector<Dual2>& x) const override { return e_.evaluate(x, params_); }

private:
    Expression e_;
    Vec params_;
};

class ExprVector final : public VectorField {
public:
    ExprVector(std::vector<Expression> c, Vec params) : c_(std::move(c)), params_(std::move(params)) {}
    std::size_t dim_in() const override { return c_.empty() ? 0 : c_[0].variables().size(); }
    std::size_t dim_out() const override { return c_.size(); }
    Vec eval(const Vec& x) const override { return run(x); }
    bool differentiable() const override { return true; }
    std::vector<Dual1> eval_d1(const std::vector<Dual1>& x) const override { return run(x); }
    std::vector<Dual2> eval_d2(const std::vector<Dual2>& x) const override { return run(x); }

private:
    template <class T> std::vector<T> run(const std::vector<T>& x) const {
        std::vector<T> out;
        out.reserve(c_.size());
        for (const auto& e : c_) out.push_back(e.evaluate(x, params_));
        return out;
    }
    std::vector<Expression> c_;
    Vec params_;
};

} // namespace

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Expression Expression::parse(const std::string& text, const std::vector<std::string>& variables,
                             const std::vector<std::string>& parameters) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw ParseError("empty expression", 0);
    Parser p(text, variables, parameters);
    return Expression(p.run(), variables, parameters);
}

std::string Expression::str() const {
    std::string out;
    if (root_) print(*root_, vars_, params_, out);
    return out;
}

template <class T> T Expression::evaluate(const std::vector<T>& vars, const Vec& params) const {
    if (vars.size() != vars_.size())
        throw ContractError("expression expects " + std::to_string(vars_.size()) + " variables, got " +
                            std::to_string(vars.size()));
    if (params.size() != params_.size())
        throw ContractError("expression expects " + std::to_string(params_.size()) +
                            " parameters, got " + std::to_string(params.size()));
    return Evaluator<T>{vars, params, *this}(*root_);
}

template double Expression::evaluate<double>(const std::vector<double>&, const Vec&) const;
template Dual1 Expression::evaluate<Dual1>(const std::vector<Dual1>&, const Vec&) const;
template Dual2 Expression::evaluate<Dual2>(const std::vector<Dual2>&, const Vec&) const;

double Expression::eval(const Vec& vars, const Vec& params) const { return evaluate(vars, params); }

DualValue Expression::eval_with_grad(const Vec& vars, const Vec& params) const {
    Dual1 r = evaluate(seed_gradient(vars), params);
    r.d.resize(vars.size(), 0.0);
    return {r.v, r.d};
}

double Expression::directional_derivative(const Vec& vars, const Vec& direction, const Vec& params) const {
    if (direction.size() != vars.size())
        throw ContractError("direction length does not match the variable count");
    return dot(eval_with_grad(vars, params).partials, direction);
}

Expression Expression::substitute(const std::vector<Expression>& replacements, const Vec& params) const {
    if (replacements.size() != vars_.size())
        throw ContractError("substitute needs one replacement per variable");
    if (params.size() != params_.size()) throw ContractError("substitute needs every parameter value");
    std::vector<std::string> vars, prms;
    if (!replacements.empty()) {
        vars = replacements[0].variables();
        prms = replacements[0].parameters();
        for (const auto& r : replacements)
            if (r.variables() != vars || r.parameters() != prms)
                throw ContractError("substitute: replacements use different variable sets");
    }
    return Expression(substitute_node(root_, replacements, params), vars, prms);
}

bool Expression::same_tree(const Expression& other) const {
    return root_ && other.root_ && same_node(*root_, *other.root_);
}

ScalarFieldPtr expression_field(Expression e, Vec params) {
    if (params.size() != e.parameters().size())
        throw ContractError("expression field needs every parameter value");
    return std::make_shared<ExprScalar>(std::move(e), std::move(params));
}

VectorFieldPtr expression_vector(std::vector<Expression> components, Vec params) {
    for (const auto& c : components)
        if (c.parameters().size() != params.size())
            throw ContractError("expression field needs every parameter value");
    return std::make_shared<ExprVector>(std::move(components), std::move(params));
}

std::vector<Expression> parse_all(const std::vector<std::string>& texts,
                                  const std::vector<std::string>& variables,
                                  const std::vector<std::string>& parameters) {
    std::vector<Expression> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(Expression::parse(t, variables, parameters));
    return out;
}

} // namespace cr
