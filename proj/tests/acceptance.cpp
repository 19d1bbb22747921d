// Acceptance suite: one line per criterion, exit status 1 when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <optional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cr/expr.hpp"
#include "cr/systems.hpp"

using namespace cr;

namespace {

const double kPi = std::acos(-1.0);

struct Outcome {
    bool pass = false;
    std::string detail;
};

// Collects named measurements against their tolerances.
struct Ledger {
    bool pass = true;
    std::ostringstream text;

    void le(const std::string& what, double value, double tol) {
        const bool ok = std::isfinite(value) && value < tol;
        pass = pass && ok;
        text << (text.tellp() > 0 ? "; " : "") << what << " " << std::scientific << std::setprecision(2) << value
             << (ok ? " < " : " !< ") << tol;
    }
    void require(const std::string& what, bool ok) {
        pass = pass && ok;
        text << (text.tellp() > 0 ? "; " : "") << what << (ok ? " ok" : " FAILED");
    }
    Outcome done() const { return {pass, text.str()}; }
};

IntegratorConfig tight(double abs_tol = 1e-12, double rel_tol = 1e-11) {
    IntegratorConfig c;
    c.abs_tol = abs_tol;
    c.rel_tol = rel_tol;
    return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

VectorFieldPtr wrap(std::size_t n, std::size_t m, std::function<Vec(const Vec&)> f) {
    return make_vector_fd(n, m, std::move(f));
}

// 1. ------------------------------------------------------------------------------------------
Outcome symmetry_certification() {
    Ledger l;
    auto certify = [&](const std::string& label, const SymplecticSystem& sys, const ScalingSymmetry& d,
                       double degree) {
        const auto samples = sample_points(sys, 100, 2024);
        const auto r = check_scaling_symmetry(sys, d, samples);
        const double worst = std::max({r.liouville_residual, r.degree_residual, r.commutator_residual,
                                       r.condition_LH_residual});
        l.le(label, worst, 1e-6);
        l.require(label + " samples", r.samples == 100 && d.degree == degree);
    };
    const auto k = instantiate("kepler");
    certify("kepler", k.system, k.symmetry(), -2.0);
    const auto o = instantiate("oscillator2d");
    certify("oscillator", o.system, o.symmetry(), 1.0);
    const std::vector<std::pair<std::string, std::map<std::string, double>>> lifted{
        {"kepler", {}}, {"kepler_hooke", {}}, {"laurent", {}}, {"flrw", {}}, {"flrw", {{"k", 1.0}}}};
    for (const auto& [id, params] : lifted) {
        const auto b = instantiate(id, params);
        for (const auto& v : b.lifted) {
            std::string label = "lifted " + id + "/" + v.id;
            if (!params.empty()) label += " (k=1)";
            certify(label, v.lifted.system, v.lifted.symmetry, 1.0);
        }
    }
    return l.done();
}

// 2. ------------------------------------------------------------------------------------------
Outcome reduction_equivalence() {
    Ledger l;
    const auto start = std::chrono::steady_clock::now();
    const auto k = instantiate("kepler");
    const auto& red = k.reduction("rho");
    const auto& chart = red.generic.chart;
    const Vec x0{1.0, 0.2, 0.1, 1.1};
    const double energy = (0.1 * 0.1 + 1.1 * 1.1) / 2.0 - 1.0 / std::hypot(1.0, 0.2);
    const double period = 2.0 * kPi * std::pow(-1.0 / (2.0 * energy), 1.5);

    IntegratorConfig cfg;
    cfg.abs_tol = 1e-11;
    cfg.rel_tol = 1e-10;
    const auto up = reparametrize(integrate(ode_problem(k.system), x0, 0.0, period, cfg), *red.generic.rho.rho, -2.0);
    const auto down = integrate(ode_problem(red.closed), reduced_point(chart, x0), 0.0, up.back().tau, cfg);
    // Invariants (J, G, theta) = (-S/2, -pbar, theta) on both sides.
    const auto invariants = [](const Vec& y) { return Vec{-y[2] / 2.0, -y[1], y[0]}; };
    const auto pa = wrap(4, 3, [&](const Vec& x) { return invariants(reduced_point(chart, x)); });
    const auto pb = wrap(3, 3, invariants);
    ComparisonOptions opt;
    opt.periodic = {2};
    const auto cmp = compare_trajectories(up, pa, down, pb, opt);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    l.require("one radial period", up.stop_reason == "span_end" && down.stop_reason == "span_end");
    l.le("sup deviation of (J, G, theta)", cmp.sup, 1e-5);
    l.le("runtime [s]", seconds, 1.0);
    return l.done();
}

// 3. ------------------------------------------------------------------------------------------
Outcome collision_torus() {
    Ledger l;
    const auto k = instantiate("kepler");
    const auto& red = k.reduction("rho");
    double worst = 0.0;
    for (double sign : {1.0, -1.0})
        for (double theta : {0.0, 0.7, -2.5}) {
            // J = -S/2, G = -pbar.
            const Vec y{theta, 0.0, -2.0 * sign * std::sqrt(2.0)};
            worst = std::max({worst, norm_inf(lambda_vf(red.closed, y)), norm_inf(lambda_vf(red.generic.system, y))});
        }
    l.le("|field| at (+-sqrt2, 0)", worst, 1e-12);

    Scenario s;
    for (const auto& c : reference_scenarios("kepler"))
        if (c.name == "homothetic") s = c;
    l.le("start on H0 = 0", std::abs(red.closed.hamiltonian->eval(s.x0)), 1e-12);
    const double ball = 1e-4;
    auto dist = [](const Vec& y) { return std::hypot(-y[2] / 2.0 - std::sqrt(2.0), y[1]); };
    // H0 = 0 repels near the fixed point, so the closest approach is set by the integration error.
    IntegratorConfig cfg = tight(1e-13, 1e-13);
    cfg.events.push_back({"ball", dist, ball});
    const auto t = integrate(ode_problem(red.closed), s.x0, 0.0, s.t_end, cfg);
    l.require("enters the ball in finite tau", t.stop_reason == "event" && std::isfinite(t.back().t));
    l.le("final distance / ball", dist(t.back().x) / ball, 1.0 + 1e-6);
    std::ostringstream tau;
    tau << "tau " << std::fixed << std::setprecision(2) << t.back().t;
    l.require(tau.str(), true);
    return l.done();
}

// 4. ------------------------------------------------------------------------------------------
Outcome loop_actions() {
    Ledger l;
    const auto k = instantiate("kepler");
    const IntegratorConfig cfg = tight();
    for (const auto& s : reference_scenarios("kepler")) {
        if (s.name.rfind("loop_", 0) != 0) continue;
        const double energy = k.system.energy(s.x0);
        const double want = 3.0 * kPi * std::sqrt(-1.0 / (2.0 * energy));
        const auto la = loop_action(k.system, s.x0, s.t_end, 1e-6, cfg);
        l.le(s.name + " relative", std::abs(la.action - want) / want, 1e-6);
    }
    const auto o = instantiate("oscillator2d");
    for (const auto& s : reference_scenarios("oscillator2d"))
        if (s.target == "upstairs") l.le("oscillator " + s.name, std::abs(loop_action(o.system, s.x0, s.t_end, 1e-6, cfg).action), 1e-8);
    return l.done();
}

// 5. ------------------------------------------------------------------------------------------
Outcome scaling_function_independence() {
    Ledger l;
    const auto k = instantiate("kepler");
    const std::vector<std::string> ids{"rho", "kappa", "G", "J"};
    std::vector<Vec> points;
    for (const Vec& x : sample_points(k.system, 2000, 5)) {
        bool inside = true;
        for (const auto& id : ids) inside = inside && k.reduction(id).generic.chart.domain(x);
        if (inside) points.push_back(x);
        if (points.size() == 100) break;
    }
    l.require("100 points in every chart domain", points.size() == 100);
    double parallel = 0.0, ratio = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            const auto& a = k.reduction(ids[i]).generic;
            const auto& b = k.reduction(ids[j]).generic;
            const auto tr = transition(a.chart, b.chart);
            for (const Vec& x : points) {
                const Vec ya = reduced_point(a.chart, x);
                const Vec pushed = to_vec(tr->jacobian(ya) * to_eigen(lambda_vf(a.system, ya)));
                const Vec xb = lambda_vf(b.system, reduced_point(b.chart, x));
                const auto par = parallelism(xb, pushed);
                const double sigma = b.rho.rho->eval(x) / a.rho.rho->eval(x);
                parallel = std::max(parallel, par.residual);
                ratio = std::max(ratio, rel(par.ratio, std::pow(sigma, 1.0 - (-2.0))));
            }
        }
    l.le("6 pairs, parallel residual", parallel, 1e-6);
    l.le("ratio vs sigma^(1-Lambda)", ratio, 1e-6);
    return l.done();
}

// 6. ------------------------------------------------------------------------------------------
Outcome dziobek() {
    Ledger l;
    const auto k = instantiate("kepler");
    const auto& red = k.reduction("G");
    Scenario s;
    for (const auto& c : reference_scenarios("kepler"))
        if (c.name == "dziobek") s = c;
    const Vec y0 = reduced_point(red.generic.chart, s.x0);
    const auto t = integrate(ode_problem(red.closed), y0, 0.0, s.t_end, tight());
    l.require("ten radial periods", t.stop_reason == "span_end");
    // -G^2 H evaluated upstairs at the lifted points over rho_G = G = 1.
    const double g0 = s.x0[0] * s.x0[3] - s.x0[1] * s.x0[2];
    const double want = -g0 * g0 * k.system.energy(s.x0);
    const auto& chart = red.generic.chart;
    double drift = 0.0;
    for (const auto& smp : t.samples) {
        const Vec x = upstairs_point(chart, smp.x, 1.0);
        const double g = x[0] * x[3] - x[1] * x[2];
        drift = std::max(drift, std::abs(-g * g * k.system.energy(x) - want));
    }
    l.le("drift of -G^2 H", drift, 1e-8);
    return l.done();
}

// 7. ------------------------------------------------------------------------------------------
Outcome lifted_laws() {
    Ledger l;
    double up_drift = 0.0, law = 0.0, ratio = 0.0;
    for (const std::string id : {"kepler", "kepler_hooke", "laurent"}) {
        const auto b = instantiate(id);
        const Vec x0 = reference_scenarios(id).back().x0;
        for (const auto& v : b.lifted) {
            const auto& lf = v.lifted;
            const std::size_t n = lf.n(), kk = lf.k();
            const Vec z0 = lf.initial_state(x0);
            const auto up = integrate(ode_problem(lf.system), z0, 0.0, 3.0, tight());
            for (const auto& smp : up.samples)
                for (std::size_t i = 0; i < kk; ++i)
                    up_drift = std::max(up_drift, std::abs(smp.x[2 * n + kk + i] - z0[2 * n + kk + i]));

            const Vec y0 = reduced_point(v.chart, z0);
            const auto down = integrate(ode_problem(v.reduced.system), y0, 0.0, 3.0, tight());
            const Vec d0 = dissipated_couplings(lf, y0);
            for (const auto& smp : down.samples) {
                const Vec& y = smp.x;
                const Vec d = dissipated_couplings(lf, y);
                const double r = reeb_derivative(v.reduced.system, y);
                const double h = 1e-5;
                const Vec dp = dissipated_couplings(lf, axpy(h, smp.dx, y));
                const Vec dm = dissipated_couplings(lf, axpy(-h, smp.dx, y));
                for (std::size_t i = 0; i < kk; ++i) {
                    if (lf.coupling_weights[i] == 0.0) continue;
                    const double rate = (dp[i] - dm[i]) / (2 * h);
                    law = std::max(law, std::abs(rate + r * d[i]) / std::max(1.0, std::abs(r * d[i])));
                }
                for (std::size_t i = 1; i < kk; ++i) {
                    if (lf.coupling_weights[i] == 0.0 || lf.coupling_weights[0] == 0.0) continue;
                    ratio = std::max(ratio, rel(d[i] / d[0], d0[i] / d0[0]));
                }
            }
        }
    }
    l.le("upstairs coupling drift", up_drift, 1e-10);
    l.le("|d abar/dtau + R(H) abar|", law, 1e-6);
    l.le("coupling ratio drift", ratio, 1e-6);
    return l.done();
}

// 8. ------------------------------------------------------------------------------------------
Outcome herglotz_duality() {
    Ledger l;
    for (const std::string id : {"oscillator2d", "kepler"}) {
        const auto b = instantiate(id);
        const auto& hz = b.herglotz->closed;
        const Vec x0 = id == "kepler" ? Vec{0.1, 0.8, 0.3} : Vec{0.2, 0.9, 0.1};
        const auto lag = integrate(ode_problem(hz), x0, 0.0, 3.0, tight());
        const auto con = integrate(ode_problem(b.reduction("rho").closed), legendre_point(hz, x0), 0.0, 3.0, tight());
        const auto to_contact = wrap(3, 3, [&hz](const Vec& x) { return legendre_point(hz, x); });
        ComparisonOptions opt;
        opt.periodic = {0};
        const auto cmp = compare_trajectories(lag, to_contact, con, nullptr, opt);
        l.require(id + " spans", lag.stop_reason == "span_end" && con.stop_reason == "span_end");
        l.le(id + " Herglotz vs contact", cmp.sup, 1e-6);
    }

    // Reduce then Legendre against Legendre then reduce.
    const auto o = instantiate("oscillator2d");
    const auto& hc = *o.herglotz;
    const auto dual = legendre_to_contact(hc.generic);
    const auto& red = o.reduction("rho").generic;
    double point = 0.0, value = 0.0;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int i = 0; i < 20; ++i) {
        const Vec qv{u(rng), u(rng), u(rng), u(rng)};
        if (std::hypot(qv[0], qv[1]) < 0.2) continue;
        const Vec ya = legendre_point(hc.generic, reduced_herglotz_state(hc.lagrangian, *hc.symmetry, hc.chart, hc.degree, qv));
        const Vec g = hc.lagrangian.lagrangian->gradient(qv);
        const Vec qp{qv[0], qv[1], g[2], g[3]};
        const Vec yb = reduced_point(red.chart, qp);
        Vec da = ya, db = yb;
        da[0] = std::remainder(da[0] - db[0], 2 * kPi);
        db[0] = 0.0;
        for (std::size_t j = 0; j < 3; ++j) point = std::max(point, std::abs(da[j] - db[j]));
        value = std::max(value, rel(dual.hamiltonian->eval(ya), red.system.hamiltonian->eval(yb)));
    }
    l.le("square: reduced points", point, 1e-6);
    l.le("square: Hamiltonians", value, 1e-6);
    return l.done();
}

// 9. ------------------------------------------------------------------------------------------
Outcome dissipation_identity() {
    Ledger l;
    struct Flow {
        std::string label;
        const ContactSystem* sys;
        Vec y0;
    };
    const auto k = instantiate("kepler");
    const auto o = instantiate("oscillator2d");
    const auto f = instantiate("flrw");
    const auto kh = instantiate("kepler_hooke");
    const Vec ellipse{1.0, 0.2, 0.1, 1.1};
    std::vector<Flow> flows;
    for (const auto& r : k.reductions) flows.push_back({"kepler/" + r.generic.chart.id, &r.closed, reduced_point(r.generic.chart, ellipse)});
    flows.push_back({"oscillator", &o.reduction("rho").closed, {0.2, -0.5, 0.3}});
    flows.push_back({"flrw", &f.reduction("v").generic.system, {1.0, -0.5, -0.3}});
    for (const auto& v : kh.lifted) flows.push_back({"kepler_hooke lifted", &v.reduced.system, reduced_point(v.chart, v.lifted.initial_state(ellipse))});
    double worst = 0.0;
    for (const auto& fl : flows) {
        const auto t = integrate(ode_problem(*fl.sys), fl.y0, 0.0, 2.0, tight());
        l.require(fl.label, t.stop_reason == "span_end");
        for (const auto& s : t.samples) {
            const Vec g = fl.sys->hamiltonian->gradient(s.x);
            const double h = fl.sys->hamiltonian->eval(s.x);
            const double dh = dot(g, s.dx);
            const double want = -fl.sys->degree * h * g.back();
            worst = std::max(worst, std::abs(dh - want) / std::max(1.0, std::abs(want)));
        }
    }
    l.le("dH/dtau + Lambda H dH/dS", worst, 1e-9);

    // H0(tau) = H0(0) exp(int J dtau) on reduced Kepler, J = -S/2 carried as an extra coordinate.
    const auto& red = k.reduction("rho").closed;
    OdeProblem p = ode_problem(red);
    const auto base = p.rhs;
    p.dim = 4;
    p.rhs = [base](const Vec& z) {
        Vec y(z.begin(), z.end() - 1);
        Vec f = base(y);
        f.push_back(-y[2] / 2.0);
        return f;
    };
    const auto guard = p.guard;
    if (guard) p.guard = [guard](const Vec& z) { return guard(Vec(z.begin(), z.end() - 1)); };
    const Vec y0 = reduced_point(k.reduction("rho").generic.chart, ellipse);
    Vec z0 = y0;
    z0.push_back(0.0);
    const double h0 = red.hamiltonian->eval(y0);
    const auto t = integrate(p, z0, 0.0, 5.0, tight());
    double growth = 0.0;
    for (const auto& s : t.samples) {
        const Vec y(s.x.begin(), s.x.end() - 1);
        const double want = h0 * std::exp(s.x.back());
        growth = std::max(growth, std::abs(red.hamiltonian->eval(y) - want) / std::max(1.0, std::abs(want)));
    }
    l.le("H0 - H0(0) exp(int J)", growth, 1e-8);
    return l.done();
}

// 10. -----------------------------------------------------------------------------------------
Outcome flrw_friction() {
    Ledger l;
    const auto f = instantiate("flrw");
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) worst = std::max(worst, flrw_friction_residual(f, {u(rng), u(rng), u(rng)}));
    l.le("100 points", worst, 1e-10);
    return l.done();
}

// 11. -----------------------------------------------------------------------------------------
class ExpressionFuzzer {
public:
    explicit ExpressionFuzzer(std::uint64_t seed) : rng_(seed) {}

    std::string expression(int depth) {
        std::string e = node(depth);
        return pick(4) == 0 ? "(" + e + ")" : e;
    }

    Vec point() {
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        return {u(rng_), u(rng_), u(rng_), u(rng_)};
    }

private:
    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

    std::string space() { return pick(3) == 0 ? " " : ""; }

    std::string leaf() {
        static const char* vars[] = {"q1", "q2", "p1", "p2"};
        if (pick(3) > 0) return vars[pick(4)];
        if (pick(8) == 0) return "pi";
        std::uniform_real_distribution<double> u(0.1, 3.0);
        char buf[32];
        std::snprintf(buf, sizeof buf, pick(2) ? "%.3g" : "%.2e", u(rng_));
        return buf;
    }

    std::string node(int depth) {
        if (depth == 0 || pick(4) == 0) return leaf();
        const std::string a = node(depth - 1);
        switch (pick(13)) {
        case 0: return a + space() + "+" + space() + node(depth - 1);
        case 1: return a + space() + "-" + space() + "(" + node(depth - 1) + ")";
        case 2: return "(" + a + ")" + space() + "*" + space() + "(" + node(depth - 1) + ")";
        case 3: return "(" + a + ")/(" + node(depth - 1) + ")";
        case 4: {
            static const char* powers[] = {"2", "3", "-1", "-2", "0.5", "1.5"};
            return "(" + a + ")^" + powers[pick(6)];
        }
        case 5: return "-(" + a + ")";
        case 6: return "sin(" + a + ")";
        case 7: return "cos(" + a + ")";
        case 8: return "sqrt(" + a + ")";
        case 9: return "exp(" + (depth > 2 ? leaf() : a) + ")";
        case 10: return "log(" + a + ")";
        case 11: return "abs(" + a + ")";
        default: return "atan2(" + a + "," + space() + node(depth - 1) + ")";
        }
    }

    std::mt19937_64 rng_;
};

// Central differences at steps h and h/2, or nothing when the point sits too close to a
// singularity: a non-finite value, a domain error, or the two steps disagreeing.
std::optional<Vec> central_differences(const Expression& e, const Vec& x) {
    Vec out(x.size());
    try {
        if (!std::isfinite(e.eval(x)) || std::abs(e.eval(x)) > 1e8) return std::nullopt;
        for (std::size_t i = 0; i < x.size(); ++i) {
            auto diff = [&](double h) {
                Vec a = x, b = x;
                a[i] += h;
                b[i] -= h;
                return (e.eval(a) - e.eval(b)) / (2 * h);
            };
            const double h = 1e-4 * std::max(1.0, std::abs(x[i]));
            const double d1 = diff(h), d2 = diff(h / 2);
            if (!std::isfinite(d1) || !std::isfinite(d2)) return std::nullopt;
            if (std::abs(d1 - d2) > 1e-5 * std::max(1.0, std::abs(d2))) return std::nullopt;
            out[i] = (4 * d2 - d1) / 3;   // Richardson step removes the h^2 term
        }
        e.eval_with_grad(x);
    } catch (const Error&) {
        return std::nullopt;
    }
    return out;
}

Outcome expression_fuzz() {
    Ledger l;
    const std::vector<std::string> vars{"q1", "q2", "p1", "p2"};
    ExpressionFuzzer fuzz(11);
    std::size_t tested = 0, reprint = 0, points = 0, singular = 0;
    double worst = 0.0;
    while (tested < 1000) {
        const std::string text = fuzz.expression(4);
        const Expression e = Expression::parse(text, vars);
        const Expression again = Expression::parse(e.str(), vars);
        if (!e.same_tree(again) || again.str() != e.str()) {
            ++reprint;
            std::cerr << "  reprint mismatch: " << text << " -> " << e.str() << "\n";
        }
        std::size_t accepted = 0;
        for (int attempt = 0; attempt < 40 && accepted < 3; ++attempt) {
            const Vec x = fuzz.point();
            const auto fd = central_differences(e, x);
            if (!fd) {
                ++singular;
                continue;
            }
            const auto dual = e.eval_with_grad(x);
            for (std::size_t i = 0; i < x.size(); ++i)
                worst = std::max(worst, std::abs(dual.partials[i] - (*fd)[i]) / std::max(1.0, std::abs(dual.partials[i])));
            ++accepted;
        }
        if (accepted == 0) continue;   // singular nearly everywhere on the box; draw again
        points += accepted;
        ++tested;
    }
    l.le("dual vs central differences", worst, 1e-7);
    l.require("parse/print/parse on " + std::to_string(tested) + " expressions", reprint == 0);
    l.require(std::to_string(points) + " points, " + std::to_string(singular) + " near singularities skipped", true);
    return l.done();
}

// 12. -----------------------------------------------------------------------------------------
Outcome blowup() {
    Ledger l;
    const auto nb2 = instantiate("nbody_blowup", {{"n", 2.0}});
    const auto k = instantiate("kepler");
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1.5, 1.5), ang(0.0, 2 * kPi);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double a = ang(rng), c = std::cos(a) / std::sqrt(2.0), s = std::sin(a) / std::sqrt(2.0);
        const double y1 = u(rng), y2 = u(rng);
        worst = std::max(worst, two_body_residual(nb2, k, {c, s, -c, -s, y1, y2, -y1, -y2}));
    }
    l.le("two-body vs rho reduction", worst, 1e-8);

    auto energy_run = [&](const std::string& label, const BlowUp& bu, const Vec& z0) {
        OdeProblem p;
        p.id = label;
        p.dim = z0.size();
        auto field = bu.field;
        p.rhs = [field](const Vec& z) { return field->eval(z); };
        // Off the collision manifold H grows, so the drift follows the integration error.
        const auto t = integrate(p, z0, 0.0, 5.0, tight(1e-13, 1e-13));
        l.require(label + " span", t.stop_reason == "span_end");
        l.le(label + " start |H|", std::abs(bu.energy->eval(z0)), 1e-12);
        l.le(label + " energy drift", first_integral_drift(t, [&](const Vec& z) { return bu.energy->eval(z); }), 1e-7);
    };
    // Two bodies on H = 0: speed fixed by |y|^2 = 2 U(s).
    const double c = std::cos(0.3) / std::sqrt(2.0), s = std::sin(0.3) / std::sqrt(2.0);
    Vec z{c, s, -c, -s, 0.0, 0.0, 0.0, 0.0};
    const double pot = nb2.blowup->energy->eval(z);
    const Vec dir{0.6, 0.5, -0.6, -0.5};
    const double scale = std::sqrt(2.0 * pot / (0.61 * 2));
    for (int i = 0; i < 4; ++i) z[4 + i] = scale * dir[i];
    energy_run("n=2", *nb2.blowup, z);
    const auto nb3 = instantiate("nbody_blowup");
    energy_run("n=3", *nb3.blowup, reference_scenarios("nbody_blowup").front().x0);
    return l.done();
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"symmetry certification", symmetry_certification},
        {"reduction equivalence", reduction_equivalence},
        {"collision torus", collision_torus},
        {"loop-action obstruction", loop_actions},
        {"scaling-function independence", scaling_function_independence},
        {"Dziobek conservation", dziobek},
        {"lifted-system laws", lifted_laws},
        {"Herglotz duality", herglotz_duality},
        {"contact dissipation identity", dissipation_identity},
        {"FLRW friction", flrw_friction},
        {"expression engine fuzz", expression_fuzz},
        {"n-body blow-up", blowup},
    };
    int failed = 0;
    const auto suite = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::printf("%s %2zu %-30s [%.2fs] %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), s,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - suite).count();
    std::printf("%zu/%zu criteria passed in %.1fs\n", criteria.size() - failed, criteria.size(), total);
    return failed == 0 ? 0 : 1;
}
