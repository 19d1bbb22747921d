#include "doctest.h"

#include <cmath>
#include <numbers>

#include "cr/expr.hpp"

using namespace cr;

namespace {
const std::vector<std::string> kPlanar{"q1", "q2", "p1", "p2"};
const char* kKepler = "(p1^2 + p2^2)/2 - 1/sqrt(q1^2+q2^2)";
} // namespace

TEST_CASE("kepler text parses") {
    CHECK_NOTHROW(Expression::parse("p1^2/2 - 1/sqrt(q1^2+q2^2)", kPlanar));
}

TEST_CASE("syntax errors carry byte offsets") {
    try {
        Expression::parse("q1 +", kPlanar);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
    }
    try {
        Expression::parse("foo(q1)", kPlanar);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 0);
        CHECK(std::string(e.what()).find("unknown identifier") != std::string::npos);
    }
    try {
        Expression::parse("q1 + atan2(q2)", kPlanar);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 5);
    }
    CHECK_THROWS_AS(Expression::parse("", kPlanar), ParseError);
    CHECK_THROWS_AS(Expression::parse("q1 q2", kPlanar), ParseError);
    CHECK_THROWS_AS(Expression::parse("(q1", kPlanar), ParseError);
}

TEST_CASE("product rule") {
    auto e = Expression::parse("q1*p1", {"q1", "p1"});
    auto r = e.eval_with_grad({2.0, 3.0});
    CHECK(r.value == 6.0);
    CHECK(r.partials == Vec{3.0, 2.0});
}

TEST_CASE("kepler value and gradient") {
    auto e = Expression::parse(kKepler, kPlanar);
    auto r = e.eval_with_grad({1.0, 0.0, 0.0, 1.0});
    CHECK(r.value == doctest::Approx(-0.5));
    CHECK(r.partials[0] == doctest::Approx(1.0));
    CHECK(r.partials[1] == doctest::Approx(0.0));
    CHECK(r.partials[2] == doctest::Approx(0.0));
    CHECK(r.partials[3] == doctest::Approx(1.0));
}

TEST_CASE("domain errors name the subexpression") {
    auto e = Expression::parse("q1 + sqrt(q1)", {"q1"});
    try {
        e.eval({-1.0});
        FAIL("expected a domain error");
    } catch (const DomainError& err) {
        CHECK(std::string(err.what()).find("sqrt(q1)") != std::string::npos);
    }
    CHECK_THROWS_AS(Expression::parse("log(q1)", {"q1"}).eval({0.0}), DomainError);
    CHECK_THROWS_AS(Expression::parse("1/q1", {"q1"}).eval({0.0}), DomainError);
    CHECK_THROWS_AS(Expression::parse("q1^0.5", {"q1"}).eval({-2.0}), DomainError);
    CHECK(Expression::parse("q1^3", {"q1"}).eval({-2.0}) == -8.0);
    CHECK_THROWS_AS(Expression::parse("abs(q1)", {"q1"}).eval_with_grad({0.0}), DomainError);
    CHECK(Expression::parse("abs(q1)", {"q1"}).eval({0.0}) == 0.0);
}

TEST_CASE("directional derivatives under the kepler dilation") {
    const Vec x{1.0, 0.0, 0.0, 1.0};
    const Vec dk{2 * x[0], 2 * x[1], -x[2], -x[3]};
    auto unit = Expression::parse("q1", kPlanar);
    CHECK(unit.directional_derivative(x, {1, 0, 0, 0}) == 1.0);
    auto rho = Expression::parse("sqrt(sqrt(q1^2+q2^2))", kPlanar);
    CHECK(rho.directional_derivative(x, dk) == doctest::Approx(rho.eval(x)));
    auto h = Expression::parse(kKepler, kPlanar);
    CHECK(h.directional_derivative(x, dk) == doctest::Approx(-2.0 * h.eval(x)));
    CHECK(h.directional_derivative(x, dk) == doctest::Approx(1.0));
}

TEST_CASE("printing round-trips") {
    for (const char* text : {"-q1^2", "(-q1)^2", "q1 - (q2 - p1)", "q1/(q2*p1)", "2^3^q1",
                             "(2^3)^q1", "-(q1 + q2)*p1", "atan2(q1, -q2)", "pi*q1", "q1^-2",
                             "1e-3 + 0.1*q1", "--q1"}) {
        auto e = Expression::parse(text, kPlanar);
        auto again = Expression::parse(e.str(), kPlanar);
        CHECK_MESSAGE(e.same_tree(again), text << " -> " << e.str());
        CHECK(again.str() == e.str());
    }
    CHECK(Expression::parse("(q1*q2)*p1", kPlanar).str() == "q1*q2*p1");
    CHECK(Expression::parse("q1*(q2*p1)", kPlanar).str() == "q1*(q2*p1)");
}

TEST_CASE("substitution composes expressions") {
    auto h = Expression::parse("a*x^2", {"x"}, {"a"});
    auto x = Expression::parse("u - 1", {"u"});
    auto c = h.substitute({x}, {3.0});
    CHECK(c.variables() == std::vector<std::string>{"u"});
    CHECK(c.eval({3.0}) == doctest::Approx(12.0));
    CHECK(c.str() == "3*(u - 1)^2");
    auto negc = Expression::parse("x^2", {"x"}).substitute({Expression::parse("-2", {"u"})});
    CHECK(Expression::parse(negc.str(), {"u"}).eval({0.0}) == 4.0);
}

TEST_CASE("expression fields give exact hessians") {
    auto f = expression_field(Expression::parse("k*q1^3*p1", {"q1", "p1"}, {"k"}), {2.0});
    const Mat h = f->hessian({1.0, 2.0});
    CHECK(h(0, 0) == doctest::Approx(24.0));
    CHECK(h(0, 1) == doctest::Approx(6.0));
    CHECK(h(1, 1) == doctest::Approx(0.0));
}
