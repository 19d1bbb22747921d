#include "doctest.h"

#include <cmath>

#include "cr/expr.hpp"
#include "cr/herglotz.hpp"
#include "cr/systems.hpp"

using namespace cr;

namespace {

HerglotzSystem from_text(const std::string& text, double degree = 1.0) {
    HerglotzSystem h;
    h.id = "h";
    h.n = 1;
    h.degree = degree;
    h.names = {"theta"};
    h.lagrangian = expression_field(Expression::parse(text, {"theta", "thetadot", "S"}));
    return h;
}

} // namespace

TEST_CASE("reduced oscillator Lagrangian at its fixed point") {
    const auto h = from_text("2*S^2 + (1 - thetadot^2)/2");
    const Vec f = herglotz_rhs(h, {0.0, 1.0, 0.0});
    CHECK(f[0] == doctest::Approx(1.0));
    CHECK(f[1] == doctest::Approx(0.0));
    CHECK(f[2] == doctest::Approx(0.0));
    CHECK(herglotz_rhs(h, {0.0, 1.0, 0.5})[2] == doctest::Approx(0.5));
}

TEST_CASE("energy of the reduced kepler Lagrangian") {
    const auto h = from_text("S^2/8 - thetadot^2/2 - 1", -2.0);
    CHECK(herglotz_energy(h, {0.0, 1.0, 0.0}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(herglotz_rhs(h, {0.0, 1.0, 0.0}), ContractError);
    // S' = L + 3E.
    CHECK(lambda_herglotz_rhs(h, {0.0, 1.0, 0.0})[2] == doctest::Approx(-1.5 + 1.5));
}

TEST_CASE("Legendre transform of a natural Lagrangian") {
    auto h = from_text("thetadot^2/2 - cos(theta)");
    const Vec y = legendre_point(h, {0.3, 0.7, 0.1});
    CHECK(y[1] == doctest::Approx(0.7));
    const Vec back = inverse_legendre_point(h, y);
    CHECK(back[1] == doctest::Approx(0.7).epsilon(1e-12));
    const auto c = legendre_to_contact(h);
    CHECK(c.hamiltonian->eval(y) == doctest::Approx(0.49 / 2 + std::cos(0.3)).epsilon(1e-10));
}

TEST_CASE("singular velocity Hessian raises") {
    const auto h = from_text("thetadot + S");
    CHECK_THROWS_AS(herglotz_rhs(h, {0.0, 1.0, 0.0}), RegularityError);
}

TEST_CASE("S independent Lagrangians give Euler-Lagrange motion") {
    LagrangianSystem l;
    l.id = "pendulum";
    l.n = 1;
    l.names = {"x"};
    l.lagrangian = make_scalar(2, [](const auto& x) { return x[1] * x[1] * 0.5 - (1.0 - cos(x[0])); });
    const auto h = as_herglotz(l);
    const Vec f = herglotz_rhs(h, {0.4, 0.2, 0.0});
    CHECK(f[1] == doctest::Approx(-std::sin(0.4)));
    CHECK(f[2] == doctest::Approx(0.02 - (1.0 - std::cos(0.4))));
}

TEST_CASE("reduced Lagrangians agree with their closed forms") {
    for (const std::string id : {"kepler", "oscillator2d"}) {
        CAPTURE(id);
        const auto b = instantiate(id);
        REQUIRE(b.herglotz);
        CHECK(b.herglotz->closed_residual < 1e-8);
        CHECK(b.herglotz->basicness.degree_residual < 1e-9);
        CHECK(b.herglotz->basicness.form_residual < 1e-9);
    }
}

TEST_CASE("closed Legendre dual matches the contact reduction") {
    const auto b = instantiate("kepler");
    const auto& hz = b.herglotz->closed;
    const auto c = legendre_to_contact(hz);
    const auto& red = b.reduction("rho").closed;
    for (const Vec& x : {Vec{0.2, 0.8, 0.3}, Vec{1.0, -0.4, -0.6}}) {
        const Vec y = legendre_point(hz, x);
        CHECK(c.hamiltonian->eval(y) == doctest::Approx(red.hamiltonian->eval(y)).epsilon(1e-12));
    }
}

TEST_CASE("lifted Lagrangian recovers a constant coupling") {
    const auto b = instantiate("kepler_hooke");
    REQUIRE(b.lifted_lagrangian);
    const auto& ll = *b.lifted_lagrangian;
    const auto s = reference_scenarios("kepler_hooke").front();
    CHECK(recovered_couplings(ll, s.x0)[0] == doctest::Approx(1.0).epsilon(1e-12));
    const auto h = as_herglotz(ll.system);
    Vec x0 = s.x0;
    x0.push_back(0.0);
    IntegratorConfig cfg;
    cfg.abs_tol = 1e-12;
    cfg.rel_tol = 1e-11;
    const auto traj = integrate(ode_problem(h), x0, 0.0, 2.0, cfg);
    REQUIRE(traj.stop_reason == "span_end");
    Vec end(traj.back().x.begin(), traj.back().x.end() - 1);
    CHECK(recovered_couplings(ll, end)[0] == doctest::Approx(1.0).epsilon(1e-6));
}
