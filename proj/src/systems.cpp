#include "cr/systems.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "cr/expr.hpp"

namespace cr {

namespace {

using Params = std::map<std::string, double>;

constexpr double kPi = 3.14159265358979323846;

Params merge_params(const std::string& id, const Params& defaults, const Params& given) {
    Params out = defaults;
    for (const auto& [k, v] : given) {
        if (!defaults.count(k)) throw ContractError("bundle " + id + " has no parameter named " + k);
        out[k] = v;
    }
    return out;
}

template <class V> auto sqnorm2(const V& x, std::size_t at) { return x[at] * x[at] + x[at + 1] * x[at + 1]; }

// Planar (q, p) from polar data r, theta and the invariants J = q.p, G = q x p.
template <class T>
std::vector<T> planar_point(const T& r, const T& th, const T& j, const T& g) {
    const T c = cos(th), s = sin(th);
    return {r * c, r * s, (j * c - g * s) / r, (j * s + g * c) / r};
}

template <class T> T cross(const std::vector<T>& x) { return x[0] * x[3] - x[1] * x[2]; }
template <class T> T inner(const std::vector<T>& x) { return x[0] * x[2] + x[1] * x[3]; }

bool planar_q_nonzero(const Vec& x) { return x[0] * x[0] + x[1] * x[1] > 0.0; }

std::vector<Vec> chart_samples(const SymplecticSystem& sys, const AdaptedChart& chart, std::size_t count,
                               std::uint64_t seed) {
    SampleSpec spec;
    spec.blocks = sys.sample_blocks();
    spec.count = count;
    spec.seed = seed;
    return sample_points(
        spec, [&](const Vec& x) { return sys.admissible(x) && (!chart.domain || chart.domain(x)); },
        sys.hamiltonian.get());
}

double rel(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

BundleReduction reduce_with_closed_form(const SymplecticSystem& sys, const ScalingSymmetry& d,
                                        const ScalingFunction& rho, const AdaptedChart& chart,
                                        const std::string& text, const std::vector<std::string>& params,
                                        const Vec& values) {
    BundleReduction b;
    b.generic = contact_reduce(sys, d, rho, chart);
    b.closed = b.generic.system;
    b.closed.id = b.generic.system.id + "/closed";
    const Expression e = Expression::parse(text, chart.reduced_names, params);
    b.closed.hamiltonian = expression_field(e, values);
    b.closed_text = e.str();
    b.generic.expression = b.closed_text;
    for (const Vec& x : chart_samples(sys, chart, 100, 7)) {
        const Vec y = reduced_point(chart, x);
        b.closed_residual = std::max(b.closed_residual,
                                     rel(b.generic.system.hamiltonian->eval(y), b.closed.hamiltonian->eval(y)));
    }
    if (b.closed_residual > 1e-10) {
        std::ostringstream os;
        os << "closed form of the " << chart.id << " reduction of " << sys.id << " is off by " << b.closed_residual;
        throw ContractError(os.str());
    }
    return b;
}

LiftedVariant make_lifted(const std::string& id, const SymplecticSystem& base, const ScalingSymmetry& d,
                          const std::vector<ScalarFieldPtr>& terms, const std::vector<CouplingSpec>& couplings,
                          CouplingForm form, const ScalingFunction& rho, const AdaptedChart& chart) {
    LiftOptions opt;
    opt.form = form;
    LiftedVariant v;
    v.id = id;
    v.lifted = lift(base, d, terms, couplings, opt);
    v.rho = lift_scaling_function(rho, v.lifted);
    v.chart = lift_chart(chart, v.lifted);
    v.reduced = reduce_lifted(v.lifted, v.rho, v.chart);
    return v;
}

// Linear lifts only. On rho = 1 the reduced Hamiltonian is sum pa_i H_i(base unit section), with
// the base contact coordinate S - sum degree_i pa_i b_i. unit_terms are the H_i over the base
// reduced names.
void attach_closed_form(LiftedVariant& v, const std::vector<std::string>& base_names,
                        const std::vector<std::string>& unit_terms) {
    const auto& names = v.chart.reduced_names;
    const auto& cs = v.lifted.couplings;
    std::string shifted = base_names.back() + " - (";
    for (std::size_t i = 0; i < cs.size(); ++i)
        shifted += (i ? " + " : "") + format_number(cs[i].degree) + "*pa_" + cs[i].name + "*b_" + cs[i].name;
    shifted += ")";
    std::vector<Expression> repl;
    for (const auto& b : base_names) repl.push_back(Expression::parse(b == base_names.back() ? shifted : b, names));
    std::string text;
    for (std::size_t i = 0; i < cs.size(); ++i)
        text += (i ? " + " : "") + ("pa_" + cs[i].name) + "*(" +
                Expression::parse(unit_terms[i], base_names).substitute(repl).str() + ")";
    const Expression e = Expression::parse(text, names);
    v.closed = v.reduced.system;
    v.closed.id = v.reduced.system.id + "/closed";
    v.closed.hamiltonian = expression_field(e);
    v.closed_text = e.str();
    v.reduced.expression = v.closed_text;
    for (const Vec& x : chart_samples(v.lifted.system, v.chart, 100, 7)) {
        const Vec y = reduced_point(v.chart, x);
        v.closed_residual =
            std::max(v.closed_residual, rel(v.reduced.system.hamiltonian->eval(y), v.closed.hamiltonian->eval(y)));
    }
    if (v.closed_residual > 1e-10) {
        std::ostringstream os;
        os << "closed form of the " << v.id << " lift of " << v.lifted.base.id << " is off by " << v.closed_residual;
        throw ContractError(os.str());
    }
}

HerglotzCounterpart make_herglotz(LagrangianSystem lag, VectorFieldPtr d, double degree, ConfigurationChart chart,
                                  const std::string& lagrangian_text, const std::string& hamiltonian_text,
                                  const std::vector<std::string>& params, const Vec& values) {
    HerglotzCounterpart h;
    h.lagrangian = std::move(lag);
    h.symmetry = std::move(d);
    h.degree = degree;
    h.chart = std::move(chart);

    SampleSpec spec;
    spec.blocks = {h.lagrangian.n, h.lagrangian.n};
    spec.seed = 11;
    const Guard g = h.lagrangian.guard;
    const auto samples = sample_points(spec, g, h.lagrangian.lagrangian.get());
    h.basicness = check_basic_symmetry(h.lagrangian, *h.symmetry, degree, samples);
    h.generic = lagrangian_scale_reduce(h.lagrangian, h.symmetry, h.chart, degree, samples);

    const std::string q = h.chart.reduced_names.at(0);
    const std::vector<std::string> lvars{q, q + "dot", "S"};
    const std::vector<std::string> hvars{q, "pbar", "S"};
    HerglotzSystem& c = h.closed;
    c.id = h.lagrangian.id + "-herglotz";
    c.n = 1;
    c.degree = degree;
    c.names = {q};
    const Expression le = Expression::parse(lagrangian_text, lvars, params);
    c.lagrangian = expression_field(le, values);
    c.expression = le.str();
    c.hamiltonian = expression_field(Expression::parse(hamiltonian_text, hvars, params), values);

    for (const Vec& x : samples) {
        const Vec y = reduced_herglotz_state(h.lagrangian, *h.symmetry, h.chart, degree, x);
        h.closed_residual = std::max(h.closed_residual, rel(h.generic.lagrangian->eval(y), c.lagrangian->eval(y)));
    }
    if (h.closed_residual > 1e-8) {
        std::ostringstream os;
        os << "closed Herglotz Lagrangian of " << h.lagrangian.id << " is off by " << h.closed_residual;
        throw ContractError(os.str());
    }
    return h;
}

// ---------------------------------------------------------------------------------------------
// Kepler

ScalingSymmetry kepler_symmetry() {
    ScalingSymmetry d;
    d.id = "D_K";
    d.degree = -2.0;
    d.field = make_vector(4, 4, [](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::value_type;
        return std::vector<T>{2.0 * x[0], 2.0 * x[1], -x[2], -x[3]};
    });
    return d;
}

ScalarFieldPtr planar_kinetic() {
    return make_scalar(4, [](const auto& x) { return sqnorm2(x, 2) * 0.5; });
}

ScalarFieldPtr planar_inverse_distance() {
    return make_scalar(4, [](const auto& x) {
        const auto r2 = sqnorm2(x, 0);
        if (value_of(r2) == 0.0) throw DomainError("collision: |q| = 0");
        return -(1.0 / sqrt(r2));
    });
}

ScalarFieldPtr planar_square_distance() {
    return make_scalar(4, [](const auto& x) { return sqnorm2(x, 0); });
}

SymplecticSystem kepler_system() {
    SymplecticSystem s;
    s.id = "kepler";
    s.n_dof = 2;
    s.names = darboux_names(2);
    s.hamiltonian = make_scalar(4, [](const auto& x) {
        const auto r2 = sqnorm2(x, 0);
        if (value_of(r2) == 0.0) throw DomainError("collision: |q| = 0");
        return sqnorm2(x, 2) * 0.5 - 1.0 / sqrt(r2);
    });
    s.guard = planar_q_nonzero;
    s.separable = true;
    return s;
}

struct KeplerCharts {
    std::vector<ScalingFunction> rho;
    std::vector<AdaptedChart> chart;
    std::vector<std::string> text;
};

KeplerCharts kepler_charts() {
    KeplerCharts k;
    auto add = [&k](std::string id, ScalarFieldPtr rho, VectorFieldPtr fwd, VectorFieldPtr inv,
                    std::vector<std::string> names, std::vector<std::size_t> periodic, Guard domain,
                    std::string text) {
        k.rho.push_back({id, std::move(rho)});
        AdaptedChart c;
        c.id = id;
        c.n_dof = 2;
        c.forward = std::move(fwd);
        c.inverse = std::move(inv);
        c.reduced_names = std::move(names);
        c.periodic = std::move(periodic);
        c.domain = std::move(domain);
        k.chart.push_back(std::move(c));
        k.text.push_back(std::move(text));
    };

    add("rho", make_scalar(4, [](const auto& x) { return pow(sqnorm2(x, 0), 0.25); }),
        make_vector(4, 4,
                    [](const auto& x) {
                        using T = typename std::decay_t<decltype(x)>::value_type;
                        const T rho = pow(sqnorm2(x, 0), 0.25);
                        return std::vector<T>{rho, -2.0 * inner(x) / rho, atan2(x[1], x[0]), -cross(x) / rho};
                    }),
        make_vector(4, 4,
                    [](const auto& c) {
                        using T = typename std::decay_t<decltype(c)>::value_type;
                        const T& rho = c[0];
                        return planar_point<T>(rho * rho, c[2], -(c[1] * rho) * 0.5, -(c[3] * rho));
                    }),
        {"theta", "pbar", "S"}, {0}, planar_q_nonzero, "1 - pbar^2/2 - S^2/8");

    add("kappa", make_scalar(4, [](const auto& x) { return 1.0 / sqrt(sqnorm2(x, 2)); }),
        make_vector(4, 4,
                    [](const auto& x) {
                        using T = typename std::decay_t<decltype(x)>::value_type;
                        const T kappa = 1.0 / sqrt(sqnorm2(x, 2));
                        return std::vector<T>{kappa, -inner(x) / kappa, atan2(x[3], x[2]), -cross(x) / kappa};
                    }),
        make_vector(4, 4,
                    [](const auto& c) {
                        using T = typename std::decay_t<decltype(c)>::value_type;
                        const T& kappa = c[0];
                        const T j = -(c[1] * kappa), g = -(c[3] * kappa);
                        const T co = cos(c[2]), si = sin(c[2]);
                        return std::vector<T>{kappa * (j * co + g * si), kappa * (j * si - g * co), co / kappa,
                                              si / kappa};
                    }),
        {"phi", "pbar", "S"}, {0}, [](const Vec& x) { return x[2] * x[2] + x[3] * x[3] > 0.0; },
        "1/sqrt(S^2 + pbar^2) - 1/2");

    add("G", make_scalar(4, [](const auto& x) { return cross(x); }),
        make_vector(4, 4,
                    [](const auto& x) {
                        using T = typename std::decay_t<decltype(x)>::value_type;
                        const T g = cross(x);
                        if (value_of(g) <= 0.0) throw DomainError("G chart needs positive angular momentum");
                        const T rho = pow(sqnorm2(x, 0), 0.25);
                        const T j = inner(x);
                        return std::vector<T>{g, atan2(x[1], x[0]) - 2.0 * j / g, rho / g, -2.0 * j / rho};
                    }),
        make_vector(4, 4,
                    [](const auto& c) {
                        using T = typename std::decay_t<decltype(c)>::value_type;
                        const T& g = c[0];
                        const T rho = g * c[2];
                        const T j = -(c[3] * rho) * 0.5;
                        return planar_point<T>(rho * rho, c[1] + 2.0 * j / g, j, g);
                    }),
        {"qbar", "pbar", "S"}, {2}, [](const Vec& x) { return x[0] * x[3] - x[1] * x[2] > 0.0; },
        "(2*qbar^2 - pbar^2*qbar^2/4 - 1)/(2*qbar^4)");

    add("J", make_scalar(4, [](const auto& x) { return inner(x); }),
        make_vector(4, 4,
                    [](const auto& x) {
                        using T = typename std::decay_t<decltype(x)>::value_type;
                        const T j = inner(x);
                        if (value_of(j) <= 0.0) throw DomainError("J chart needs positive dilational momentum");
                        const T rho = pow(sqnorm2(x, 0), 0.25);
                        return std::vector<T>{j, 2.0 * log(rho / j), atan2(x[1], x[0]), -cross(x) / j};
                    }),
        make_vector(4, 4,
                    [](const auto& c) {
                        using T = typename std::decay_t<decltype(c)>::value_type;
                        const T& j = c[0];
                        const T rho = j * exp(c[1] * 0.5);
                        return planar_point<T>(rho * rho, c[2], j, -(c[3] * j));
                    }),
        {"theta", "pbar", "S"}, {0},
        [](const Vec& x) { return x[0] * x[2] + x[1] * x[3] > 0.0; }, "(2*exp(S) - pbar^2 - 1)/(2*exp(2*S))");
    return k;
}

ConfigurationChart planar_configuration_chart(double power) {
    // rho = |q|^power, theta = arg q.
    ConfigurationChart c;
    c.id = "polar";
    c.n = 2;
    c.reduced_names = {"theta"};
    c.forward = make_vector(2, 2, [power](const auto& q) {
        using T = typename std::decay_t<decltype(q)>::value_type;
        return std::vector<T>{pow(sqnorm2(q, 0), power / 2.0), atan2(q[1], q[0])};
    });
    c.inverse = make_vector(2, 2, [power](const auto& c2) {
        using T = typename std::decay_t<decltype(c2)>::value_type;
        const T r = pow(c2[0], 1.0 / power);
        return std::vector<T>{r * cos(c2[1]), r * sin(c2[1])};
    });
    return c;
}

// |p|^2/2 on the unit section of the rho chart, where |p|^2 = J^2 + G^2 = S^2/4 + pbar^2.
const char* const kKineticUnit = "(S^2/4 + pbar^2)/2";

SystemBundle kepler_bundle(const Params& given) {
    SystemBundle b;
    b.id = "kepler";
    b.params = merge_params(b.id, {{"mu", 1.0}, {"k", 1.0}}, given);
    b.doc = "Planar Kepler problem H = |p|^2/2 - 1/|q| with the dilation D = 2q.d/dq - p.d/dp of degree -2. "
            "Reductions by the scaling functions rho = |q|^(1/2), kappa = 1/|p|, G = q x p and J = q.p; "
            "lifted variants promote the couplings of the kinetic (mu) and potential (k) terms.";
    b.system = kepler_system();
    b.symmetries.push_back(kepler_symmetry());
    const auto k = kepler_charts();
    for (std::size_t i = 0; i < k.chart.size(); ++i)
        b.reductions.push_back(
            reduce_with_closed_form(b.system, b.symmetry(), k.rho[i], k.chart[i], k.text[i], {}, {}));

    const std::vector<ScalarFieldPtr> terms{planar_kinetic(), planar_inverse_distance()};
    const std::vector<CouplingSpec> couplings{{"mu", -2.0, b.params["mu"], 0.0}, {"k", -2.0, b.params["k"], 0.0}};
    b.lifted.push_back(make_lifted("linear", b.system, b.symmetry(), terms, couplings, CouplingForm::Linear,
                                   k.rho[0], k.chart[0]));
    attach_closed_form(b.lifted.back(), k.chart[0].reduced_names, {kKineticUnit, "-1"});
    b.lifted.push_back(make_lifted("power", b.system, b.symmetry(), terms, couplings, CouplingForm::Power,
                                   k.rho[0], k.chart[0]));

    LagrangianSystem lag;
    lag.id = "kepler";
    lag.n = 2;
    lag.names = {"q1", "q2"};
    lag.lagrangian = make_scalar(4, [](const auto& x) {
        const auto r2 = sqnorm2(x, 0);
        if (value_of(r2) == 0.0) throw DomainError("collision: |q| = 0");
        return sqnorm2(x, 2) * 0.5 + 1.0 / sqrt(r2);
    });
    lag.guard = planar_q_nonzero;
    auto dl = make_vector(4, 4, [](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::value_type;
        return std::vector<T>{2.0 * x[0], 2.0 * x[1], -x[2], -x[3]};
    });
    b.herglotz = make_herglotz(lag, dl, -2.0, planar_configuration_chart(0.5), "S^2/8 - thetadot^2/2 - 1",
                               "1 - pbar^2/2 - S^2/8", {}, {});
    return b;
}

// ---------------------------------------------------------------------------------------------
// Harmonic oscillator

SystemBundle oscillator_bundle(const Params& given) {
    SystemBundle b;
    b.id = "oscillator2d";
    b.params = merge_params(b.id, {{"k", 1.0}}, given);
    const double kk = b.params["k"];
    b.doc = "Planar isotropic oscillator H = (|p|^2 + k|q|^2)/2 with the degree one symmetry "
            "D = (q.d/dq + p.d/dp)/2 and scaling function rho = |q|^2.";
    SymplecticSystem& s = b.system;
    s.id = "oscillator2d";
    s.n_dof = 2;
    s.names = darboux_names(2);
    s.params = b.params;
    s.separable = true;
    s.hamiltonian = make_scalar(4, [kk](const auto& x) { return (sqnorm2(x, 2) + kk * sqnorm2(x, 0)) * 0.5; });

    ScalingSymmetry d;
    d.id = "D_osc";
    d.degree = 1.0;
    d.field = make_vector(4, 4, [](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::value_type;
        return std::vector<T>{0.5 * x[0], 0.5 * x[1], 0.5 * x[2], 0.5 * x[3]};
    });
    b.symmetries.push_back(d);

    ScalingFunction rho{"rho", make_scalar(4, [](const auto& x) { return sqnorm2(x, 0); })};
    AdaptedChart c;
    c.id = "rho";
    c.n_dof = 2;
    c.reduced_names = {"theta", "pbar", "S"};
    c.periodic = {0};
    c.domain = planar_q_nonzero;
    c.forward = make_vector(4, 4, [](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::value_type;
        const T r2 = sqnorm2(x, 0);
        return std::vector<T>{r2, -inner(x) / (2.0 * r2), atan2(x[1], x[0]), -cross(x) / r2};
    });
    c.inverse = make_vector(4, 4, [](const auto& cc) {
        using T = typename std::decay_t<decltype(cc)>::value_type;
        const T& rho2 = cc[0];
        return planar_point<T>(sqrt(rho2), cc[2], -2.0 * cc[1] * rho2, -(cc[3] * rho2));
    });
    b.reductions.push_back(reduce_with_closed_form(s, d, rho, c, "-2*S^2 - (k + pbar^2)/2", {"k"}, {kk}));

    LagrangianSystem lag;
    lag.id = "oscillator2d";
    lag.n = 2;
    lag.names = {"q1", "q2"};
    lag.lagrangian = make_scalar(4, [kk](const auto& x) { return (sqnorm2(x, 2) - kk * sqnorm2(x, 0)) * 0.5; });
    lag.guard = planar_q_nonzero;
    auto dl = make_vector(4, 4, [](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::value_type;
        return std::vector<T>{0.5 * x[0], 0.5 * x[1], 0.5 * x[2], 0.5 * x[3]};
    });
    b.herglotz = make_herglotz(lag, dl, 1.0, planar_configuration_chart(2.0), "2*S^2 + (k - thetadot^2)/2",
                               "-2*S^2 - (k + pbar^2)/2", {"k"}, {kk});
    return b;
}

// ---------------------------------------------------------------------------------------------
// Kepler plus Hooke, and a general Laurent potential

SymplecticSystem central_sum(const std::string& id, std::vector<ScalarFieldPtr> terms, Vec coeffs) {
    SymplecticSystem s;
    s.id = id;
    s.n_dof = 2;
    s.names = darboux_names(2);
    s.guard = planar_q_nonzero;
    s.separable = true;
    s.hamiltonian = make_scalar(4, [terms, coeffs](const auto& x) {
        auto h = coeffs[0] * terms[0]->at(x);
        for (std::size_t i = 1; i < terms.size(); ++i) h = h + coeffs[i] * terms[i]->at(x);
        return h;
    });
    return s;
}

SystemBundle kepler_hooke_bundle(const Params& given) {
    SystemBundle b;
    b.id = "kepler_hooke";
    b.params = merge_params(b.id, {{"mu", 1.0}, {"k_K", 1.0}, {"k_H", 0.1}}, given);
    b.doc = "H = mu|p|^2/2 - k_K/|q| + k_H|q|^2. Under D = 2q.d/dq - p.d/dp the three terms have degrees "
            "-2, -2 and 4; the lift makes all three couplings coordinates and the symmetry degree one. "
            "The Lagrangian side lifts L = rho'^2/(8 rho) + rho theta'^2/2 - k_H rho/2 + k_K/sqrt(rho), "
            "whose last term has degree -1/2 under rho d/drho.";
    const std::vector<ScalarFieldPtr> terms{planar_kinetic(), planar_inverse_distance(), planar_square_distance()};
    const Vec coeffs{b.params["mu"], b.params["k_K"], b.params["k_H"]};
    b.system = central_sum(b.id, terms, coeffs);
    b.system.params = b.params;
    b.symmetries.push_back(kepler_symmetry());
    const auto k = kepler_charts();
    const std::vector<CouplingSpec> couplings{
        {"mu", -2.0, coeffs[0], 0.0}, {"k_K", -2.0, coeffs[1], 0.0}, {"k_H", 4.0, coeffs[2], 0.0}};
    b.lifted.push_back(make_lifted("linear", b.system, b.symmetry(), terms, couplings, CouplingForm::Linear,
                                   k.rho[0], k.chart[0]));
    attach_closed_form(b.lifted.back(), k.chart[0].reduced_names, {kKineticUnit, "-1", "1"});

    // Configuration (rho, theta) with rho = |q|^2; velocities (rho', theta').
    const double kh = b.params["k_H"], kk = b.params["k_K"];
    LagrangianSystem base;
    base.id = "kepler_hooke";
    base.n = 2;
    base.names = {"rho", "theta"};
    base.guard = [](const Vec& x) { return x[0] > 0.0; };
    base.lagrangian = make_scalar(4, [kh](const auto& x) {
        if (value_of(x[0]) <= 0.0) throw DomainError("rho must be positive");
        return x[2] * x[2] / (8.0 * x[0]) + x[0] * x[3] * x[3] * 0.5 - kh * x[0] * 0.5;
    });
    auto kepler_term = make_scalar(4, [kk](const auto& x) {
        if (value_of(x[0]) <= 0.0) throw DomainError("rho must be positive");
        return kk / sqrt(x[0]);
    });
    b.lifted_lagrangian = lift_lagrangian(base, {kepler_term}, {-0.5}, {"X"});
    return b;
}

std::string laurent_name(int j) { return j < 0 ? "a_m" + std::to_string(-j) : "a_" + std::to_string(j); }

SystemBundle laurent_bundle(const Params& given) {
    SystemBundle b;
    b.id = "laurent";
    Params defaults{{"mu", 1.0}, {"jmin", -1.0}, {"jmax", 2.0}};
    const auto pick = [&](const char* key) {
        auto it = given.find(key);
        return it != given.end() ? it->second : defaults[key];
    };
    const int jmin = static_cast<int>(pick("jmin")), jmax = static_cast<int>(pick("jmax"));
    if (jmin > jmax || pick("jmin") != jmin || pick("jmax") != jmax)
        throw ContractError("laurent needs integer jmin <= jmax");
    const std::map<int, double> preset{{-1, -1.0}, {0, 0.5}, {1, 0.2}, {2, 0.1}};
    for (int j = jmin; j <= jmax; ++j) defaults[laurent_name(j)] = preset.count(j) ? preset.at(j) : 0.1;
    b.params = merge_params(b.id, defaults, given);
    b.doc = "H = mu|p|^2/2 + sum_j a_j |q|^j for jmin <= j <= jmax. The term |q|^j has degree 2j under "
            "D = 2q.d/dq - p.d/dp; the lift turns every coefficient into a coordinate.";

    std::vector<ScalarFieldPtr> terms{planar_kinetic()};
    Vec coeffs{b.params["mu"]};
    std::vector<CouplingSpec> couplings{{"mu", -2.0, coeffs[0], 0.0}};
    for (int j = jmin; j <= jmax; ++j) {
        const double half = j / 2.0;
        terms.push_back(make_scalar(4, [half](const auto& x) {
            const auto r2 = sqnorm2(x, 0);
            if (value_of(r2) == 0.0 && half < 0.0) throw DomainError("collision: |q| = 0");
            return pow(r2, half);
        }));
        coeffs.push_back(b.params[laurent_name(j)]);
        couplings.push_back({laurent_name(j), 2.0 * j, coeffs.back(), 0.0});
    }
    b.system = central_sum(b.id, terms, coeffs);
    b.system.params = b.params;
    b.symmetries.push_back(kepler_symmetry());
    const auto k = kepler_charts();
    b.lifted.push_back(make_lifted("linear", b.system, b.symmetry(), terms, couplings, CouplingForm::Linear,
                                   k.rho[0], k.chart[0]));
    std::vector<std::string> unit(terms.size(), "1");
    unit[0] = kKineticUnit;
    attach_closed_form(b.lifted.back(), k.chart[0].reduced_names, unit);
    return b;
}

// ---------------------------------------------------------------------------------------------
// FLRW cosmology with one matter degree of freedom; layout (v, q, Pi, p).

SystemBundle flrw_bundle(const Params& given, const std::map<std::string, std::string>& texts) {
    SystemBundle b;
    b.id = "flrw";
    b.params = merge_params(b.id, {{"k", 0.0}}, given);
    const double curvature = b.params["k"];
    const auto it = texts.find("matter");
    const std::string matter_text = it != texts.end() ? it->second : "(p^2 + q^2)/2";
    const Expression hm = Expression::parse(matter_text, {"q", "p"});
    b.doc = "H = v(-3 Pi^2/(8 pi) + Hm(p/v, q)) - k v^(1/3) on (v, q, Pi, p) with matter Hamiltonian Hm = " +
            hm.str() + ". For k = 0, D = v d/dv + p d/dp has degree one and rho = v reduces to "
            "3 Pi^2/(8 pi) - Hm(p, q); for k != 0 the coupling k is lifted.";

    auto gravity = make_scalar(4, [hm](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::value_type;
        if (value_of(x[0]) <= 0.0) throw DomainError("volume must be positive");
        const T m = hm.evaluate<T>(std::vector<T>{x[1], x[3] / x[0]}, {});
        return x[0] * (-3.0 * x[2] * x[2] / (8.0 * kPi) + m);
    });
    auto curv = make_scalar(4, [](const auto& x) {
        if (value_of(x[0]) <= 0.0) throw DomainError("volume must be positive");
        return -pow(x[0], 1.0 / 3.0);
    });

    SymplecticSystem& s = b.system;
    s.id = "flrw";
    s.n_dof = 2;
    s.names = {"v", "q", "Pi", "p"};
    s.params = b.params;
    s.guard = [](const Vec& x) { return x[0] > 0.0; };
    s.hamiltonian = make_scalar(4, [gravity, curv, curvature](const auto& x) {
        return gravity->at(x) + curvature * curv->at(x);
    });

    ScalingSymmetry d;
    d.id = "D_v";
    d.degree = 1.0;
    d.field = make_vector(4, 4, [](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::value_type;
        return std::vector<T>{x[0], T(0.0), T(0.0), x[3]};
    });
    b.symmetries.push_back(d);

    ScalingFunction rho{"v", make_scalar(4, [](const auto& x) { return x[0]; })};
    AdaptedChart c;
    c.id = "v";
    c.n_dof = 2;
    c.reduced_names = {"qbar", "pbar", "S"};
    c.domain = [](const Vec& x) { return x[0] > 0.0; };
    c.forward = make_vector(4, 4, [](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::value_type;
        return std::vector<T>{x[0], -x[2], x[1], -(x[3] / x[0])};
    });
    c.inverse = make_vector(4, 4, [](const auto& cc) {
        using T = typename std::decay_t<decltype(cc)>::value_type;
        return std::vector<T>{cc[0], cc[2], -cc[1], -(cc[3] * cc[0])};
    });

    if (curvature == 0.0) {
        const auto rvars = c.reduced_names;
        const Expression q = Expression::parse("qbar", rvars), p = Expression::parse("-pbar", rvars);
        const Expression sub = hm.substitute({q, p});
        const std::string text = "3*S^2/(8*pi) - (" + sub.str() + ")";
        b.reductions.push_back(reduce_with_closed_form(s, d, rho, c, text, {}, {}));
    }

    const std::vector<CouplingSpec> couplings{{"a", 1.0, 1.0, 0.0}, {"k", 1.0 / 3.0, curvature, 0.0}};
    b.lifted.push_back(make_lifted("linear", s, d, {gravity, curv}, couplings, CouplingForm::Linear, rho, c));
    {
        const auto rvars = c.reduced_names;
        const Expression sub =
            hm.substitute({Expression::parse("qbar", rvars), Expression::parse("-pbar", rvars)});
        attach_closed_form(b.lifted.back(), rvars, {"-3*S^2/(8*pi) + " + sub.str(), "-1"});
    }
    return b;
}

// ---------------------------------------------------------------------------------------------
// n bodies with unit masses in d dimensions; U = sum 1/|q_i - q_j|.

template <class T>
T potential(const std::vector<T>& q, std::size_t n, std::size_t d) {
    T u(0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            T r2(0.0);
            for (std::size_t a = 0; a < d; ++a) {
                const T dx = q[i * d + a] - q[j * d + a];
                r2 = r2 + dx * dx;
            }
            if (value_of(r2) == 0.0) throw DomainError("collision of two bodies");
            u = u + 1.0 / sqrt(r2);
        }
    return u;
}

template <class T>
std::vector<T> potential_gradient(const std::vector<T>& q, std::size_t n, std::size_t d) {
    std::vector<T> g(n * d, T(0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            T r2(0.0);
            for (std::size_t a = 0; a < d; ++a) {
                const T dx = q[i * d + a] - q[j * d + a];
                r2 = r2 + dx * dx;
            }
            if (value_of(r2) == 0.0) throw DomainError("collision of two bodies");
            const T inv3 = 1.0 / (r2 * sqrt(r2));
            for (std::size_t a = 0; a < d; ++a) {
                const T f = (q[i * d + a] - q[j * d + a]) * inv3;
                g[i * d + a] = g[i * d + a] - f;
                g[j * d + a] = g[j * d + a] + f;
            }
        }
    return g;
}

bool bodies_apart(const Vec& x, std::size_t n, std::size_t d) {
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double r2 = 0.0;
            for (std::size_t a = 0; a < d; ++a) r2 += std::pow(x[i * d + a] - x[j * d + a], 2);
            if (!(r2 > 0.0)) return false;
        }
    return true;
}

SystemBundle nbody_bundle(const Params& given) {
    SystemBundle b;
    b.id = "nbody_blowup";
    b.params = merge_params(b.id, {{"n", 3.0}, {"d", 2.0}}, given);
    const double nn = b.params["n"], dd = b.params["d"];
    if (nn < 2 || dd < 1 || nn != std::floor(nn) || dd != std::floor(dd))
        throw ContractError("nbody_blowup needs integers n >= 2 and d >= 1");
    const auto n = static_cast<std::size_t>(nn), d = static_cast<std::size_t>(dd), m = n * d;
    b.doc = "n bodies of unit mass, H = |p|^2/2 - U(q) with U = sum 1/|q_i - q_j|, D = 2q.d/dq - p.d/dp of "
            "degree -2. The rho = |q|^(1/2) reduction in the variables s = q/rho^2, y = rho p is the "
            "McGehee blow-up s' = y - nu s, y' = nu y/2 + grad U(s) with nu = s.y.";

    SymplecticSystem& s = b.system;
    s.id = "nbody_blowup";
    s.n_dof = m;
    s.params = b.params;
    s.separable = true;
    s.guard = [n, d](const Vec& x) { return bodies_apart(x, n, d); };
    s.hamiltonian = make_scalar(2 * m, [n, d, m](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::value_type;
        T kin(0.0);
        for (std::size_t i = 0; i < m; ++i) kin = kin + x[m + i] * x[m + i];
        return kin * 0.5 - potential(std::vector<T>(x.begin(), x.begin() + m), n, d);
    });
    ScalingSymmetry sym;
    sym.id = "D_K";
    sym.degree = -2.0;
    sym.field = make_vector(2 * m, 2 * m, [m](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::value_type;
        std::vector<T> v(2 * m);
        for (std::size_t i = 0; i < m; ++i) {
            v[i] = 2.0 * x[i];
            v[m + i] = -x[m + i];
        }
        return v;
    });
    b.symmetries.push_back(sym);

    BlowUp bu;
    bu.bodies = n;
    bu.space_dim = d;
    bu.field = make_vector(2 * m, 2 * m, [n, d, m](const auto& z) {
        using T = typename std::decay_t<decltype(z)>::value_type;
        const std::vector<T> sv(z.begin(), z.begin() + m);
        T nu(0.0);
        for (std::size_t i = 0; i < m; ++i) nu = nu + z[i] * z[m + i];
        const auto g = potential_gradient(sv, n, d);
        std::vector<T> out(2 * m);
        for (std::size_t i = 0; i < m; ++i) {
            out[i] = z[m + i] - nu * z[i];
            out[m + i] = nu * z[m + i] * 0.5 + g[i];
        }
        return out;
    });
    bu.energy = make_scalar(2 * m, [n, d, m](const auto& z) {
        using T = typename std::decay_t<decltype(z)>::value_type;
        T yy(0.0);
        for (std::size_t i = 0; i < m; ++i) yy = yy + z[m + i] * z[m + i];
        return potential(std::vector<T>(z.begin(), z.begin() + m), n, d) - yy * 0.5;
    });
    bu.projection = make_vector(2 * m, 2 * m, [m](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::value_type;
        T r2(0.0);
        for (std::size_t i = 0; i < m; ++i) r2 = r2 + x[i] * x[i];
        const T r = sqrt(r2);
        const T rho = sqrt(r);
        std::vector<T> out(2 * m);
        for (std::size_t i = 0; i < m; ++i) {
            out[i] = x[i] / r;
            out[m + i] = rho * x[m + i];
        }
        return out;
    });
    b.blowup = bu;
    return b;
}

// Keplerian ellipse with periapsis on the q1 axis.
Vec ellipse_point(double energy, double e) {
    const double a = -1.0 / (2.0 * energy);
    return {a * (1.0 - e), 0.0, 0.0, std::sqrt((1.0 + e) / (a * (1.0 - e)))};
}

double kepler_period(double energy) { return 2.0 * kPi * std::pow(-1.0 / (2.0 * energy), 1.5); }

} // namespace

const BundleReduction& SystemBundle::reduction(const std::string& chart_id) const {
    for (const auto& r : reductions)
        if (r.generic.chart.id == chart_id) return r;
    throw ContractError("bundle " + id + " has no reduction by " + chart_id);
}

const LiftedVariant& SystemBundle::lifted_variant(const std::string& form) const {
    for (const auto& l : lifted)
        if (l.id == form) return l;
    throw ContractError("bundle " + id + " has no " + form + " lift");
}

std::vector<std::string> bundle_ids() {
    return {"kepler", "oscillator2d", "kepler_hooke", "laurent", "flrw", "nbody_blowup"};
}

std::map<std::string, double> bundle_defaults(const std::string& id) {
    if (id == "kepler") return {{"mu", 1.0}, {"k", 1.0}};
    if (id == "oscillator2d") return {{"k", 1.0}};
    if (id == "kepler_hooke") return {{"mu", 1.0}, {"k_K", 1.0}, {"k_H", 0.1}};
    if (id == "laurent")
        return {{"mu", 1.0}, {"jmin", -1.0}, {"jmax", 2.0}, {"a_m1", -1.0}, {"a_0", 0.5}, {"a_1", 0.2}, {"a_2", 0.1}};
    if (id == "flrw") return {{"k", 0.0}};
    if (id == "nbody_blowup") return {{"n", 3.0}, {"d", 2.0}};
    throw ContractError("unknown bundle " + id);
}

SystemBundle instantiate(const std::string& id, const std::map<std::string, double>& params,
                         const std::map<std::string, std::string>& texts) {
    for (const auto& [k, v] : texts)
        if (!(id == "flrw" && k == "matter")) throw ContractError("bundle " + id + " takes no text parameter " + k);
    if (id == "kepler") return kepler_bundle(params);
    if (id == "oscillator2d") return oscillator_bundle(params);
    if (id == "kepler_hooke") return kepler_hooke_bundle(params);
    if (id == "laurent") return laurent_bundle(params);
    if (id == "flrw") return flrw_bundle(params, texts);
    if (id == "nbody_blowup") return nbody_bundle(params);
    throw ContractError("unknown bundle " + id);
}

std::vector<Scenario> reference_scenarios(const std::string& id) {
    std::vector<Scenario> out;
    if (id == "kepler") {
        const Vec ellipse{1.0, 0.2, 0.1, 1.1};
        const double e0 = (0.1 * 0.1 + 1.1 * 1.1) / 2.0 - 1.0 / std::hypot(1.0, 0.2);
        out.push_back({"ellipse", "bound orbit compared with its rho reduction over one radial period", "upstairs",
                       "rho", ellipse, kepler_period(e0), {{"energy", e0}, {"deviation_tol", 1e-5}}});
        out.push_back({"circular", "unit circular orbit over one period", "upstairs", "", {1.0, 0.0, 0.0, 1.0},
                       2.0 * kPi, {{"closure_tol", 1e-8}}});
        out.push_back({"circular_fixed_point", "(J, G) = (0, 1): circular orbits are fixed in the invariants",
                       "reduced", "rho", {0.0, -1.0, 0.0}, 10.0, {{"J", 0.0}, {"G", 1.0}}});
        const double g0 = 0.1, j0 = -std::sqrt(2.0 - g0 * g0);
        out.push_back({"homothetic", "nearly radial parabolic orbit on H0 = 0 leaving (-sqrt2, 0) for (sqrt2, 0)",
                       "reduced", "rho", {0.0, -g0, -2.0 * j0}, 200.0,
                       {{"J", std::sqrt(2.0)}, {"G", 0.0}, {"ball", 1e-4}}});
        out.push_back({"collision", "radial infall ending in collision", "upstairs", "", {1.0, 0.0, -0.1, 0.0}, 10.0,
                       {{"collision", 1.0}}});
        for (double energy : {-0.5, -0.25, -0.125}) {
            std::ostringstream name;
            name << "loop_E" << energy;
            out.push_back({name.str(), "loop action over one period of an ellipse with eccentricity 0.3",
                           "upstairs", "", ellipse_point(energy, 0.3), kepler_period(energy),
                           {{"energy", energy}, {"action", 3.0 * kPi * std::sqrt(-1.0 / (2.0 * energy))}}});
        }
        const double g = 1.0 * 1.1 - 0.2 * 0.1;
        out.push_back({"dziobek", "G reduction of the ellipse over ten radial periods, -G^2 H conserved", "upstairs",
                       "G", ellipse, 10.0 * kepler_period(e0) / std::pow(g, 3), {{"drift_tol", 1e-8}}});
    } else if (id == "oscillator2d") {
        out.push_back({"loop", "elliptic orbit over one period; the loop action vanishes", "upstairs", "",
                       {1.0, 0.0, 0.3, 0.8}, 2.0 * kPi, {{"action", 0.0}}});
        out.push_back({"herglotz", "reduced Herglotz motion from (theta, theta', S) = (0, 1, 0)", "herglotz", "",
                       {0.0, 1.0, 0.0}, 5.0, {{"theta_ddot", 0.0}}});
    } else if (id == "kepler_hooke") {
        const double rho0 = 1.0, kk = 1.0;
        const double xdot0 = kk / (std::cbrt(-2.0) * std::sqrt(rho0));
        out.push_back({"lagrangian_lift", "lifted Lagrangian extremal; the recovered coupling stays at 1",
                       "lifted_lagrangian", "", {rho0, 0.0, 0.0, 0.1, 0.8, xdot0}, 5.0, {{"coupling", 1.0}}});
        out.push_back({"lifted", "lifted flow from an ellipse-like point", "lifted", "", {1.0, 0.2, 0.1, 1.1}, 5.0,
                       {}});
    } else if (id == "laurent") {
        out.push_back({"lifted", "lifted flow", "lifted", "", {1.0, 0.0, 0.0, 0.9}, 5.0, {}});
    } else if (id == "flrw") {
        out.push_back({"friction", "matter oscillator with Hubble friction", "reduced", "v", {1.0, -0.5, -0.3}, 5.0,
                       {}});
    } else if (id == "nbody_blowup") {
        // Equilateral triangle on the unit sphere with y chosen on the collision manifold H = 0.
        Vec z(12, 0.0);
        const double c = 1.0 / std::sqrt(3.0);
        for (int i = 0; i < 3; ++i) {
            z[2 * i] = c * std::cos(2.0 * kPi * i / 3.0);
            z[2 * i + 1] = c * std::sin(2.0 * kPi * i / 3.0);
        }
        const double side = std::sqrt(3.0) * c;
        const double u = 3.0 / side;
        const double speed = std::sqrt(2.0 * u);
        for (int i = 0; i < 3; ++i) {
            z[6 + 2 * i] = speed * (-0.8 * z[2 * i] - 0.6 * z[2 * i + 1]);
            z[6 + 2 * i + 1] = speed * (0.6 * z[2 * i] - 0.8 * z[2 * i + 1]);
        }
        out.push_back({"collision_manifold", "three bodies on H = 0", "blowup", "", z, 5.0, {{"energy_tol", 1e-7}}});
    } else {
        throw ContractError("unknown bundle " + id);
    }
    return out;
}

VectorFieldPtr kepler_invariant_coordinates(const std::string& chart_id) {
    if (chart_id == "rho" || chart_id == "kappa") {
        const double w = chart_id == "rho" ? 0.5 : 1.0;
        return make_vector(3, 3, [w](const auto& y) {
            using T = typename std::decay_t<decltype(y)>::value_type;
            return std::vector<T>{-(y[2] * w), -y[1], y[0]};
        });
    }
    if (chart_id == "G")
        return make_vector(3, 3, [](const auto& y) {
            using T = typename std::decay_t<decltype(y)>::value_type;
            return std::vector<T>{-(y[1] * y[0]) * 0.5, y[0], y[2] - y[1] * y[0]};
        });
    if (chart_id == "J")
        return make_vector(3, 3, [](const auto& y) {
            using T = typename std::decay_t<decltype(y)>::value_type;
            return std::vector<T>{-y[1], exp(y[2] * 0.5), y[0]};
        });
    throw ContractError("unknown Kepler chart " + chart_id);
}

Vec kepler_invariant_rhs(const std::string& chart_id, const Vec& z) {
    if (chart_id == "rho") {
        const double j = z[0], g = z[1];
        const double h = 1.0 - (j * j + g * g) / 2.0;
        return {g * g / 2.0 - h, -j * g / 2.0, g};
    }
    if (chart_id == "kappa") {
        const double j = z[0], g = z[1];
        const double r = std::hypot(j, g), r3 = r * r * r;
        const double h = 1.0 / r - 0.5;
        return {-2.0 * h + g * g / r3, -g * j / r3, g / r3};
    }
    if (chart_id == "G") {
        const double j = z[0], r = z[1];
        const double h = (2.0 * r * r - j * j - 1.0) / (2.0 * std::pow(r, 4));
        return {1.0 / (r * r) - 2.0 * h, j / (2.0 * r * r * r), 1.0 / std::pow(r, 4)};
    }
    if (chart_id == "J") {
        const double g = z[0], r = z[1];
        const double h = (2.0 * r * r - g * g - 1.0) / (2.0 * std::pow(r, 4));
        return {g * (2.0 * h - 1.0 / (r * r)), r * h - g * g / (2.0 * r * r * r), g / std::pow(r, 4)};
    }
    throw ContractError("unknown Kepler chart " + chart_id);
}

double kepler_invariant_residual(const SystemBundle& kepler, const std::string& chart_id, const Vec& y) {
    const auto& red = kepler.reduction(chart_id).generic.system;
    const auto coords = kepler_invariant_coordinates(chart_id);
    const Eigen::VectorXd push = coords->jacobian(y) * to_eigen(lambda_vf(red, y));
    const Vec want = kepler_invariant_rhs(chart_id, coords->eval(y));
    double worst = 0.0;
    const double scale = std::max(1.0, norm_inf(want));
    for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, std::abs(push(static_cast<Eigen::Index>(i)) - want[i]) / scale);
    return worst;
}

double flrw_friction_residual(const SystemBundle& flrw, const Vec& y) {
    const auto& red = flrw.reduction("v").generic.system;
    const Vec x = lambda_vf(red, y);
    const double q = y[0], p = -y[1], pi = -y[2];
    // Matter Hamiltonian recovered from the upstairs system at v = 1, Pi = 0.
    const Vec g = flrw.system.hamiltonian->gradient({1.0, q, 0.0, p});
    const double dq = x[0], dp = -x[1];
    const double want_q = g[3];
    const double want_p = -g[1] + 3.0 * pi * p / (4.0 * kPi);
    return std::max(std::abs(dq - want_q) / std::max(1.0, std::abs(want_q)),
                    std::abs(dp - want_p) / std::max(1.0, std::abs(want_p)));
}

Vec two_body_invariants(const Vec& sy) {
    if (sy.size() != 8) throw ContractError("two_body_invariants expects two planar bodies");
    const double w = std::pow(2.0, 0.25);
    double nu = 0.0, g = 0.0;
    for (std::size_t i = 0; i < 4; ++i) nu += sy[i] * sy[4 + i];
    for (std::size_t b = 0; b < 2; ++b) g += sy[2 * b] * sy[4 + 2 * b + 1] - sy[2 * b + 1] * sy[4 + 2 * b];
    return {w * nu, w * g, std::atan2(sy[1] - sy[3], sy[0] - sy[2])};
}

double two_body_residual(const SystemBundle& nbody, const SystemBundle& kepler, const Vec& sy) {
    (void)kepler;
    if (!nbody.blowup || nbody.blowup->bodies != 2 || nbody.blowup->space_dim != 2)
        throw ContractError("two_body_residual needs the planar two-body blow-up");
    auto phi = make_vector(8, 3, [](const auto& z) {
        using T = typename std::decay_t<decltype(z)>::value_type;
        const double w = std::pow(2.0, 0.25);
        T nu(0.0), g(0.0);
        for (std::size_t i = 0; i < 4; ++i) nu = nu + z[i] * z[4 + i];
        for (std::size_t b = 0; b < 2; ++b) g = g + z[2 * b] * z[4 + 2 * b + 1] - z[2 * b + 1] * z[4 + 2 * b];
        return std::vector<T>{nu * w, g * w, atan2(z[1] - z[3], z[0] - z[2])};
    });
    const Eigen::VectorXd lhs = phi->jacobian(sy) * to_eigen(nbody.blowup->field->eval(sy));
    const Vec rhs = kepler_invariant_rhs("rho", phi->eval(sy));
    const double c = std::pow(2.0, -0.25);
    double worst = 0.0;
    const double scale = std::max(1.0, norm_inf(rhs));
    for (std::size_t i = 0; i < 3; ++i)
        worst = std::max(worst, std::abs(lhs(static_cast<Eigen::Index>(i)) - c * rhs[i]) / scale);
    return worst;
}

} // namespace cr
