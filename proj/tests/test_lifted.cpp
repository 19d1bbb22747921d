#include "doctest.h"

#include <cmath>

#include "cr/systems.hpp"

using namespace cr;

TEST_CASE("lifted symmetry has degree one") {
    for (const std::string id : {"kepler", "kepler_hooke", "laurent", "flrw"}) {
        CAPTURE(id);
        const auto b = instantiate(id, id == "flrw" ? std::map<std::string, double>{{"k", 1.0}}
                                                    : std::map<std::string, double>{});
        for (const auto& v : b.lifted) {
            CAPTURE(v.id);
            const auto samples = sample_points(v.lifted.system, 30, 4);
            const auto rep = check_scaling_symmetry(v.lifted.system, v.lifted.symmetry, samples);
            CHECK(rep.verdict);
            CHECK(v.lifted.symmetry.degree == 1.0);
        }
    }
}

TEST_CASE("a term of the wrong degree is refused") {
    const auto k = instantiate("kepler");
    auto terms = k.lifted_variant("linear").lifted.terms;
    auto couplings = k.lifted_variant("linear").lifted.couplings;
    couplings[1].degree = -1.0;
    CHECK_THROWS_AS(lift(k.system, k.symmetry(), terms, couplings), ContractError);
}

TEST_CASE("lifted flow projects onto the base flow") {
    const auto k = instantiate("kepler_hooke");
    const auto& v = k.lifted_variant("linear");
    const Vec x0{1.0, 0.2, 0.1, 1.1};
    IntegratorConfig cfg;
    cfg.abs_tol = 1e-12;
    cfg.rel_tol = 1e-11;
    const auto up = integrate(ode_problem(v.lifted.system), v.lifted.initial_state(x0), 0.0, 4.0, cfg);
    const auto base = integrate(ode_problem(k.system), x0, 0.0, 4.0, cfg);
    const Vec end = v.lifted.base_point(up.back().x);
    for (std::size_t i = 0; i < 4; ++i) CHECK(end[i] == doctest::Approx(base.back().x[i]).epsilon(1e-8));
}

TEST_CASE("power form couplings decay at the Reeb rate") {
    const auto k = instantiate("kepler");
    const auto& v = k.lifted_variant("power");
    const Vec y0 = reduced_point(v.chart, v.lifted.initial_state({1.0, 0.2, 0.1, 1.1}));
    const Vec a = reduced_couplings(v.lifted, y0);
    const Vec d = dissipated_couplings(v.lifted, y0);
    const Vec f = lambda_vf(v.reduced.system, y0);
    // Time derivative of the reduced coupling along the flow by a directional derivative.
    const double h = 1e-6;
    Vec yp = y0, ym = y0;
    for (std::size_t i = 0; i < y0.size(); ++i) {
        yp[i] += h * f[i];
        ym[i] -= h * f[i];
    }
    const double r = reeb_derivative(v.reduced.system, y0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double rate = (dissipated_couplings(v.lifted, yp)[i] - dissipated_couplings(v.lifted, ym)[i]) / (2 * h);
        CHECK(rate == doctest::Approx(-r * d[i]).epsilon(1e-6));
    }
}
