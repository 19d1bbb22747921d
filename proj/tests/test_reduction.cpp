#include "doctest.h"

#include <cmath>

#include "cr/systems.hpp"

using namespace cr;

TEST_CASE("chart validation on the kepler charts") {
    const auto k = instantiate("kepler");
    for (const auto& r : k.reductions) {
        CAPTURE(r.generic.chart.id);
        CHECK(r.generic.report.inverse_residual < 1e-10);
        CHECK(r.generic.report.pushforward_residual < 1e-8);
        CHECK(r.generic.report.liouville_residual < 1e-8);
    }
}

TEST_CASE("a chart that does not straighten D is refused") {
    const auto k = instantiate("kepler");
    auto chart = k.reduction("rho").generic.chart;
    ScalingFunction wrong{"r", make_scalar(4, [](const auto& x) { return sqrt(x[0] * x[0] + x[1] * x[1]); })};
    CHECK_THROWS_AS(contact_reduce(k.system, k.symmetry(), wrong, chart), ContractError);
}

TEST_CASE("reduced hamiltonian identity") {
    const auto k = instantiate("kepler");
    const auto samples = sample_points(k.system, 50, 21);
    const auto& r = k.reduction("rho").generic;
    CHECK(reduction_identity_residual(r, samples) < 1e-10);
}

TEST_CASE("upstairs and reduced points round trip") {
    const auto k = instantiate("kepler");
    const auto& chart = k.reduction("rho").generic.chart;
    const Vec x{1.0, 0.2, 0.1, 1.1};
    const Vec y = reduced_point(chart, x);
    const double rho = std::pow(1.0 + 0.04, 0.25);
    const Vec back = upstairs_point(chart, y, rho);
    for (std::size_t i = 0; i < 4; ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("reduced flow follows the upstairs flow") {
    const auto k = instantiate("kepler");
    const auto& r = k.reduction("rho").generic;
    const Vec x0{1.0, 0.2, 0.1, 1.1};
    IntegratorConfig cfg;
    cfg.abs_tol = 1e-12;
    cfg.rel_tol = 1e-11;
    auto up = reparametrize(integrate(ode_problem(k.system), x0, 0.0, 3.0, cfg), *r.rho.rho, -2.0);
    const double tau_end = up.back().tau;
    const auto down = integrate(ode_problem(r.system), reduced_point(r.chart, x0), 0.0, tau_end, cfg);
    CHECK(compare_reduced(up, r.chart, down).sup < 1e-7);
}

TEST_CASE("contact hamiltonians dissipate at the Reeb rate") {
    const auto o = instantiate("oscillator2d");
    const auto& sys = o.reduction("rho").closed;
    for (const Vec& y : {Vec{0.1, -0.8, -0.15}, Vec{2.0, 0.3, 0.4}}) CHECK(std::abs(dissipation_residual(sys, y)) < 1e-10);
}

TEST_CASE("changing the scaling function rescales the reduced field") {
    const auto k = instantiate("kepler");
    const auto& a = k.reduction("rho");
    const auto& b = k.reduction("kappa");
    const Vec x{1.0, 0.2, 0.1, 1.1};
    const Vec ya = reduced_point(a.generic.chart, x);
    const auto tr = transition(a.generic.chart, b.generic.chart);
    const Eigen::VectorXd pushed = tr->jacobian(ya) * to_eigen(lambda_vf(a.generic.system, ya));
    const Vec xb = lambda_vf(b.generic.system, tr->eval(ya));
    const auto par = parallelism(to_vec(pushed), xb);
    CHECK(par.residual < 1e-8);
    const double want = scaling_change_factor(*a.generic.rho.rho, *b.generic.rho.rho, -2.0, x);
    CHECK(par.ratio == doctest::Approx(1.0 / want).epsilon(1e-7));
}

TEST_CASE("normalized reduction traces the same orbits") {
    const auto k = instantiate("kepler");
    const auto& r = k.reduction("rho").generic;
    const auto normalized = normalized_reduction(r);
    const Vec y0 = reduced_point(r.chart, {1.0, 0.2, 0.1, 1.1});
    IntegratorConfig cfg;
    cfg.abs_tol = 1e-12;
    cfg.rel_tol = 1e-11;
    const auto a = integrate(ode_problem(r.system), y0, 0.0, 2.0, cfg);
    double slowest = INFINITY;
    for (const auto& s : a.samples) {
        const double f = normalized_factor(r, s.x);
        REQUIRE(f > 0.0);
        slowest = std::min(slowest, f);
    }
    const auto b = integrate(ode_problem(normalized), y0, 0.0, 2.2 / slowest, cfg);
    ComparisonOptions opt;
    opt.periodic = {0};
    const auto c = compare_orbits(a, nullptr, b, nullptr, opt);
    CHECK(c.sup < 1e-6);
    CHECK(c.tau_end > 0.5);
}

TEST_CASE("symplectic lift returns the upstairs system") {
    const auto o = instantiate("oscillator2d");
    const auto& r = o.reduction("rho").generic;
    const auto lifted = symplectic_lift(r);
    const auto coords = lift_coordinates(r.chart);
    const Vec x{0.9, 0.4, -0.3, 0.7};
    CHECK(lifted.hamiltonian->eval(coords->eval(x)) == doctest::Approx(o.system.hamiltonian->eval(x)).epsilon(1e-12));
}
