#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cr/expr.hpp"
#include "cr/integrate.hpp"

using namespace cr;

namespace {

constexpr double kPi = std::numbers::pi;

SymplecticSystem kepler() {
    SymplecticSystem s;
    s.id = "kepler";
    s.n_dof = 2;
    s.names = darboux_names(2);
    s.hamiltonian = expression_field(Expression::parse("(p1^2+p2^2)/2 - 1/sqrt(q1^2+q2^2)", s.names));
    s.guard = [](const Vec& x) { return std::hypot(x[0], x[1]) > 0.0; };
    s.separable = true;
    return s;
}

SymplecticSystem oscillator() {
    SymplecticSystem s;
    s.id = "oscillator";
    s.n_dof = 2;
    s.names = darboux_names(2);
    s.hamiltonian = expression_field(Expression::parse("(p1^2+p2^2+q1^2+q2^2)/2", s.names));
    s.separable = true;
    return s;
}

double dist_inf(const Vec& a, const Vec& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

} // namespace

TEST_CASE("circular kepler orbit closes after one period") {
    const Vec x0{1, 0, 0, 1};
    auto traj = integrate(ode_problem(kepler()), x0, 0.0, 2 * kPi);
    CHECK(traj.stop_reason == "span_end");
    CHECK(traj.back().t == 2 * kPi);
    CHECK(dist_inf(traj.back().x, x0) < 1e-8);
    auto g = [](const Vec& x) { return x[0] * x[3] - x[1] * x[2]; };
    CHECK(first_integral_drift(traj, g) < 1e-8);
    auto sys = kepler();
    CHECK(first_integral_drift(traj, [&](const Vec& x) { return sys.energy(x); }) < 1e-8);
}

TEST_CASE("fixed-step runs have the rounded step count") {
    IntegratorConfig cfg;
    cfg.method = Method::Rk4Fixed;
    cfg.step = 0.01;
    const Vec x0{1, 0, 0, 1};
    auto traj = integrate(ode_problem(kepler()), x0, 0.0, 2 * kPi, cfg);
    CHECK(traj.size() == 629);
    CHECK(dist_inf(traj.back().x, x0) < 1e-8);
    auto zero = integrate(ode_problem(kepler()), x0, 0.0, 0.0, cfg);
    CHECK(zero.size() == 1);
    CHECK(integrate(ode_problem(kepler()), x0, 1.0, 1.0).size() == 1);
}

TEST_CASE("homothetic data stops on the collision event") {
    IntegratorConfig cfg;
    cfg.events.push_back({"collision", [](const Vec& x) { return std::sqrt(std::hypot(x[0], x[1])); }, 1e-3});
    auto traj = integrate(ode_problem(kepler()), {1, 0, -0.1, 0}, 0.0, 10.0, cfg);
    CHECK(traj.stop_reason == "event");
    CHECK(traj.stop_event == "collision");
    CHECK(traj.back().t < 10.0);
    const double rho = std::sqrt(std::hypot(traj.back().x[0], traj.back().x[1]));
    CHECK(rho < 1e-3);
    CHECK(rho > 0.9e-3);
}

TEST_CASE("guard violations end the trajectory or are rejected at the start") {
    auto sys = kepler();
    CHECK_THROWS_AS(integrate(ode_problem(sys), {0, 0, 1, 0}, 0.0, 1.0), DomainError);
    sys.guard = [](const Vec& x) { return x[0] < 1.5; };
    auto traj = integrate(ode_problem(sys), {1, 0, 1, 0}, 0.0, 10.0);
    CHECK(traj.stop_reason == "guard");
    CHECK(traj.back().x[0] < 1.5);
    CHECK(traj.back().x[0] > 1.49);
}

TEST_CASE("stormer-verlet keeps oscillator energy bounded") {
    IntegratorConfig cfg;
    cfg.method = Method::StormerVerlet;
    cfg.step = 0.05;
    auto sys = oscillator();
    const Vec x0{1, 0, 0, 0.5};
    auto traj = integrate(ode_problem(sys), x0, 0.0, 2 * kPi * 1000, cfg);
    auto energy = [&](const Vec& x) { return sys.energy(x); };
    Trajectory head;
    head.samples.assign(traj.samples.begin(), traj.samples.begin() + 2000);
    const double early = first_integral_drift(head, energy);
    const double late = first_integral_drift(traj, energy);
    CHECK(late < 1e-3);
    CHECK(late < 1.5 * early);
    auto coupled = kepler();
    coupled.separable = false;
    CHECK_THROWS_AS(integrate(ode_problem(coupled), x0, 0, 1, [] {
                        IntegratorConfig c;
                        c.method = Method::StormerVerlet;
                        return c;
                    }()),
                    ContractError);
}

TEST_CASE("reparametrization") {
    auto traj = integrate(ode_problem(kepler()), {1, 0, 0, 1}, 0.0, 3.0);
    auto one = make_scalar(4, [](const auto& x) { return sqrt(sqrt(x[0] * x[0] + x[1] * x[1])); });
    auto same = reparametrize(traj, *one, 1.0);
    for (const auto& s : same.samples) CHECK(s.tau == s.t);
    auto circ = reparametrize(traj, *one, -2.0);
    for (const auto& s : circ.samples) CHECK(s.tau == doctest::Approx(s.t).epsilon(1e-9));
    auto two = make_scalar_fd(4, [](const Vec&) { return 2.0; });
    auto eighth = reparametrize(traj, *two, -2.0);
    CHECK(eighth.back().tau == doctest::Approx(3.0 / 8));
}

TEST_CASE("trajectory comparison") {
    auto p = ode_problem(kepler());
    auto a = integrate(p, {1, 0.2, 0.1, 1.1}, 0.0, 5.0);
    CHECK(compare_trajectories(a, nullptr, a, nullptr).sup == 0.0);
    auto b = integrate(p, {1 + 1e-3, 0.2, 0.1, 1.1}, 0.0, 5.0);
    CHECK(compare_trajectories(a, nullptr, b, nullptr).sup > 1e-3);
    auto late = integrate(p, {1, 0.2, 0.1, 1.1}, 7.0, 8.0);
    CHECK_THROWS_AS(compare_trajectories(a, nullptr, late, nullptr), ContractError);
}

TEST_CASE("orbit comparison ignores the parametrization") {
    auto slow = ode_problem(oscillator());
    auto fast = slow;
    fast.rhs = [f = slow.rhs](const Vec& x) {
        Vec r = f(x);
        for (double& v : r) v *= 3.0;
        return r;
    };
    IntegratorConfig cfg;
    cfg.abs_tol = 1e-12;
    cfg.rel_tol = 1e-11;
    const Vec x0{1.0, 0.0, 0.0, 0.5};
    const auto a = integrate(slow, x0, 0.0, 3.0, cfg);
    const auto b = integrate(fast, x0, 0.0, 1.5, cfg);
    CHECK(compare_trajectories(a, nullptr, b, nullptr).sup > 0.1);
    const auto c = compare_orbits(a, nullptr, b, nullptr);
    CHECK(c.sup < 1e-7);
    CHECK(c.tau_end > 1.0);
    auto off = integrate(fast, {1.01, 0.0, 0.0, 0.5}, 0.0, 1.5, cfg);
    CHECK(compare_orbits(a, nullptr, off, nullptr).sup > 1e-3);
}

TEST_CASE("csv output") {
    IntegratorConfig cfg;
    cfg.method = Method::Rk4Fixed;
    cfg.step = 0.5;
    auto traj = integrate(ode_problem(oscillator()), {1, 0, 0, 1}, 0.0, 1.0, cfg);
    traj.names = darboux_names(2);
    annotate(traj, "H", [](const Vec& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]); });
    std::ostringstream os;
    write_csv(os, traj);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,q1,q2,p1,p2,H");
    std::getline(is, line);
    CHECK(line == "0,1,0,0,1,1");
    int rows = 1;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 3);
}
