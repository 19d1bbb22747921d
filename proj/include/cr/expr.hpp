#pragma once

// Infix expressions over named variables and parameters, evaluated on doubles or dual numbers.
//
// Grammar, loosest binding first:
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | '+' unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | name | name '(' sum (',' sum)* ')' | '(' sum ')'
// Functions: sin cos sqrt exp log abs (one argument), atan2 (two). The name pi is the constant.

#include <memory>
#include <string>
#include <vector>

#include "cr/field.hpp"

namespace cr {

struct DualValue {
    double value = 0.0;
    Vec partials;
};

class Expression {
public:
    enum class Op { Const, Var, Param, Neg, Add, Sub, Mul, Div, Pow, Call };
    enum class Fn { Sin, Cos, Sqrt, Exp, Log, Abs, Atan2 };

    struct Node {
        Op op = Op::Const;
        double value = 0.0;      // Const
        std::size_t index = 0;   // Var, Param
        Fn fn = Fn::Sin;         // Call
        bool named_pi = false;   // Const spelled "pi"
        bool depends = false;    // references a variable somewhere below
        std::vector<std::shared_ptr<const Node>> args;
    };
    using NodePtr = std::shared_ptr<const Node>;

    Expression() = default;

    static Expression parse(const std::string& text, const std::vector<std::string>& variables,
                            const std::vector<std::string>& parameters = {});

    const std::vector<std::string>& variables() const { return vars_; }
    const std::vector<std::string>& parameters() const { return params_; }
    const NodePtr& root() const { return root_; }

    // Shortest text that parses back to the same tree.
    std::string str() const;

    double eval(const Vec& vars, const Vec& params = {}) const;
    DualValue eval_with_grad(const Vec& vars, const Vec& params = {}) const;
    double directional_derivative(const Vec& vars, const Vec& direction,
                                  const Vec& params = {}) const;

    template <class T> T evaluate(const std::vector<T>& vars, const Vec& params) const;

    // Replace variable i by replacements[i]; parameters of this expression become constants.
    // The replacements must share one variable and parameter set.
    Expression substitute(const std::vector<Expression>& replacements, const Vec& params = {}) const;

    bool same_tree(const Expression& other) const;

private:
    Expression(NodePtr root, std::vector<std::string> vars, std::vector<std::string> params)
        : root_(std::move(root)), vars_(std::move(vars)), params_(std::move(params)) {}

    NodePtr root_;
    std::vector<std::string> vars_;
    std::vector<std::string> params_;
};

extern template double Expression::evaluate<double>(const std::vector<double>&, const Vec&) const;
extern template Dual1 Expression::evaluate<Dual1>(const std::vector<Dual1>&, const Vec&) const;
extern template Dual2 Expression::evaluate<Dual2>(const std::vector<Dual2>&, const Vec&) const;

// Scalar field backed by an expression with parameter values bound.
ScalarFieldPtr expression_field(Expression e, Vec params = {});

// Vector field whose components are expressions over the same variables.
VectorFieldPtr expression_vector(std::vector<Expression> components, Vec params = {});

// Parse each text against the same variable and parameter lists.
std::vector<Expression> parse_all(const std::vector<std::string>& texts,
                                  const std::vector<std::string>& variables,
                                  const std::vector<std::string>& parameters = {});

std::string format_number(double v);

} // namespace cr
