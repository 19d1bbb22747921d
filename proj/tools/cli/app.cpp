#include "app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "cr/errors.hpp"
#include "cr/expr.hpp"
#include "cr/parallel.hpp"
#include "cr/systems.hpp"

namespace cr::cli {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------------------------
// Report

void RunReport::metric(const std::string& key, double value) { lines.push_back({key, value, std::nullopt, true}); }

void RunReport::check(const std::string& key, double value, double tol) {
    lines.push_back({key, value, tol, std::isfinite(value) && value <= tol});
}

void RunReport::note(const std::string& key, const std::string& text) { info.emplace_back(key, text); }

bool RunReport::pass() const {
    return std::all_of(lines.begin(), lines.end(), [](const ReportLine& l) { return l.pass; });
}

std::string RunReport::str() const {
    std::ostringstream os;
    os << "command: " << command << "\n";
    for (const auto& [k, v] : info) os << k << ": " << v << "\n";
    for (const auto& l : lines) {
        os << l.key << ": " << std::setprecision(10) << l.value;
        if (l.tol) os << "  tol " << std::setprecision(3) << *l.tol << "  " << (l.pass ? "PASS" : "FAIL");
        os << "\n";
    }
    os << "wall_seconds: " << std::setprecision(4) << seconds << "\n";
    os << "verdict: " << (numerical_failure ? "NUMERICAL FAILURE" : pass() ? "PASS" : "FAIL") << "\n";
    return os.str();
}

int exit_code(const RunReport& report) {
    if (report.numerical_failure) return 3;
    return report.pass() ? 0 : 1;
}

namespace {

[[noreturn]] void schema_fail(const YAML::Node& node, const std::string& what) {
    const auto m = node.Mark();
    if (m.is_null()) throw SchemaError(what);
    throw SchemaError(what, m.line + 1, m.column + 1);
}

std::map<std::string, double> number_map(const YAML::Node& n) {
    std::map<std::string, double> out;
    if (n)
        for (const auto& kv : n) out[kv.first.as<std::string>()] = kv.second.as<double>();
    return out;
}

std::map<std::string, std::string> text_map(const YAML::Node& n) {
    std::map<std::string, std::string> out;
    if (n)
        for (const auto& kv : n) out[kv.first.as<std::string>()] = kv.second.as<std::string>();
    return out;
}

std::vector<std::string> string_list(const YAML::Node& n) {
    std::vector<std::string> out;
    if (n)
        for (const auto& v : n) out.push_back(v.as<std::string>());
    return out;
}

std::vector<std::size_t> indices_of(const std::vector<std::string>& names, const std::vector<std::string>& wanted,
                                    const YAML::Node& where) {
    std::vector<std::size_t> out;
    for (const auto& w : wanted) {
        const auto it = std::find(names.begin(), names.end(), w);
        if (it == names.end()) schema_fail(where, "unknown coordinate '" + w + "'");
        out.push_back(static_cast<std::size_t>(it - names.begin()));
    }
    return out;
}

// Everything a command may need, resolved from the system and scaling sections.
struct Setup {
    std::shared_ptr<const SystemBundle> bundle;
    int variant = -1;
    std::optional<SymplecticSystem> upstairs;
    std::optional<ScalingSymmetry> symmetry;
    std::optional<ScalingFunction> rho;
    std::optional<AdaptedChart> chart;
    std::optional<ReducedContactSystem> reduction;
    std::optional<ContactSystem> reduced;      // the system integrated for reduced runs
    std::string reduced_text;                  // its closed form, when known
    std::vector<std::string> text_params;
    Vec text_values;
    std::vector<std::size_t> periodic;
    std::map<std::string, double> bundle_params;
    std::map<std::string, std::string> bundle_texts;

    const LiftedVariant* lifted() const { return variant < 0 ? nullptr : &bundle->lifted[variant]; }
};

std::shared_ptr<const SystemBundle> make_bundle(const std::string& id, const std::map<std::string, double>& params,
                                                const std::map<std::string, std::string>& texts,
                                                const YAML::Node& where) {
    try {
        return std::make_shared<const SystemBundle>(instantiate(id, params, texts));
    } catch (const ContractError& e) {
        // Parameter problems are configuration errors.
        if (std::string(e.what()).find("closed form") == std::string::npos) schema_fail(where, e.what());
        throw;
    }
}

int variant_index(const SystemBundle& b, const std::string& form, const YAML::Node& where) {
    for (std::size_t i = 0; i < b.lifted.size(); ++i)
        if (b.lifted[i].id == form) return static_cast<int>(i);
    schema_fail(where, "bundle " + b.id + " has no " + form + " lift");
}

void load_reduced_description(Setup& s, const YAML::Node& red) {
    const auto names = string_list(red["variables"]);
    if (names.size() % 2 == 0) schema_fail(red["variables"], "reduced variables must be (qbar..., pbar..., S)");
    const double degree = red["degree"].as<double>();
    if (red["hamiltonian"]) {
        const auto params = number_map(red["params"]);
        for (const auto& [k, v] : params) {
            s.text_params.push_back(k);
            s.text_values.push_back(v);
        }
        s.reduced_text = red["hamiltonian"].as<std::string>();
        ContactSystem c;
        c.id = "reduced";
        c.n_dof = names.size() / 2;
        c.degree = degree;
        c.names = names;
        c.hamiltonian = expression_field(Expression::parse(s.reduced_text, names, s.text_params), s.text_values);
        s.reduced = c;
    } else {
        const YAML::Node src = red["source"];
        if (!src) schema_fail(red, "a reduced description needs a hamiltonian or a source");
        const auto b = make_bundle(src["bundle"].as<std::string>(), number_map(src["params"]),
                                   text_map(src["texts"]), src);
        s.bundle = b;
        if (src["lifted"]) {
            s.variant = variant_index(*b, src["lifted"].as<std::string>(), src["lifted"]);
            s.reduced = s.lifted()->reduced.system;
        } else {
            if (!red["chart"]) schema_fail(red, "a reduced description from a bundle needs its chart");
            s.reduced = b->reduction(red["chart"].as<std::string>()).closed;
        }
        if (s.reduced->names != names) schema_fail(red["variables"], "variables do not match the source reduction");
    }
    s.periodic = indices_of(names, string_list(red["periodic"]), red);
}

// Reduced Hamiltonian -H(inverse(1, S, qbar, pbar)) as text, by substitution.
std::string symbolic_reduction(const Expression& h, const std::vector<Expression>& inverse,
                               const std::vector<std::string>& reduced_names, const Vec& params) {
    const std::size_t m = reduced_names.size();
    std::vector<Expression> chart_coords;
    chart_coords.push_back(Expression::parse("1", reduced_names));
    chart_coords.push_back(Expression::parse(reduced_names.back(), reduced_names));
    for (std::size_t i = 0; i + 1 < m; ++i) chart_coords.push_back(Expression::parse(reduced_names[i], reduced_names));
    std::vector<Expression> section;
    for (const auto& e : inverse) section.push_back(e.substitute(chart_coords, params));
    return "-(" + h.substitute(section, params).str() + ")";
}

Setup build_setup(const ScenarioConfig& cfg) {
    Setup s;
    const YAML::Node sys = cfg.root["system"];
    const YAML::Node sc = cfg.root["scaling"];
    if (sys["reduced"]) {
        if (sys.size() != 1) schema_fail(sys, "system.reduced cannot be combined with other system keys");
        if (sc) schema_fail(sc, "a reduced description takes no scaling section");
        load_reduced_description(s, sys["reduced"]);
        return s;
    }
    if (sys["bundle"]) {
        if (sys["hamiltonian"] || sys["variables"]) schema_fail(sys, "give either a bundle or an inline hamiltonian");
        s.bundle_params = number_map(sys["params"]);
        s.bundle_texts = text_map(sys["texts"]);
        s.bundle = make_bundle(sys["bundle"].as<std::string>(), s.bundle_params, s.bundle_texts, sys);
        const SystemBundle& b = *s.bundle;
        for (const auto& [k, v] : b.params) {
            s.text_params.push_back(k);
            s.text_values.push_back(v);
        }
        if (sc && (sc["field"] || sc["rho"] || sc["inline_chart"]))
            schema_fail(sc, "bundles bring their own symmetry and charts");
        if (sc && sc["lifted"]) {
            s.variant = variant_index(b, sc["lifted"].as<std::string>(), sc["lifted"]);
            const LiftedVariant& v = *s.lifted();
            if (sc["chart"] && sc["chart"].as<std::string>() + "^" != v.chart.id)
                schema_fail(sc["chart"], "the lift of " + b.id + " is reduced by chart " +
                                             v.chart.id.substr(0, v.chart.id.size() - 1));
            s.upstairs = v.lifted.system;
            s.symmetry = v.lifted.symmetry;
            s.rho = v.rho;
            s.chart = v.chart;
            s.reduction = v.reduced;
            s.reduced = v.closed_text.empty() ? v.reduced.system : v.closed;
            s.reduced_text = v.closed_text;
            s.text_params.clear();
            s.text_values.clear();
        } else {
            s.upstairs = b.system;
            s.symmetry = b.symmetry();
            if (sc && sc["chart"]) {
                const std::string id = sc["chart"].as<std::string>();
                const auto it = std::find_if(b.reductions.begin(), b.reductions.end(),
                                             [&](const BundleReduction& r) { return r.generic.chart.id == id; });
                if (it == b.reductions.end()) schema_fail(sc["chart"], "bundle " + b.id + " has no chart " + id);
                s.rho = it->generic.rho;
                s.chart = it->generic.chart;
                s.reduction = it->generic;
                s.reduced = it->closed;
                s.reduced_text = it->closed_text;
            }
        }
    } else {
        if (!sys["hamiltonian"] || !sys["variables"])
            schema_fail(sys, "system needs a bundle, a reduced description or hamiltonian plus variables");
        const auto names = string_list(sys["variables"]);
        if (names.size() % 2 != 0) schema_fail(sys["variables"], "variables must be laid out (q..., p...)");
        for (const auto& [k, v] : number_map(sys["params"])) {
            s.text_params.push_back(k);
            s.text_values.push_back(v);
        }
        const Expression h = Expression::parse(sys["hamiltonian"].as<std::string>(), names, s.text_params);
        SymplecticSystem u;
        u.id = "inline";
        u.n_dof = names.size() / 2;
        u.names = names;
        u.params = number_map(sys["params"]);
        u.separable = sys["separable"] && sys["separable"].as<bool>();
        u.hamiltonian = expression_field(h, s.text_values);
        s.upstairs = u;
        if (sc && sc["lifted"]) schema_fail(sc["lifted"], "lifting needs a bundle");
        if (sc && sc["field"]) {
            if (!sc["degree"]) schema_fail(sc, "an inline scaling field needs its degree");
            ScalingSymmetry d;
            d.id = "D";
            d.degree = sc["degree"].as<double>();
            const auto comps = string_list(sc["field"]);
            if (comps.size() != names.size()) schema_fail(sc["field"], "field needs one component per variable");
            d.field = expression_vector(parse_all(comps, names, s.text_params), s.text_values);
            s.symmetry = d;
        }
        if (sc && sc["rho"])
            s.rho = ScalingFunction{
                "rho", expression_field(Expression::parse(sc["rho"].as<std::string>(), names, s.text_params),
                                        s.text_values)};
        if (sc && sc["inline_chart"]) {
            const YAML::Node ic = sc["inline_chart"];
            if (!s.symmetry || !s.rho) schema_fail(ic, "an inline chart needs scaling.field and scaling.rho");
            const auto rnames = string_list(ic["reduced_names"]);
            if (rnames.size() + 1 != names.size()) schema_fail(ic["reduced_names"], "need 2n - 1 reduced names");
            std::vector<std::string> cvars{"rho", rnames.back()};
            cvars.insert(cvars.end(), rnames.begin(), rnames.end() - 1);
            const auto fwd = parse_all(string_list(ic["forward"]), names, s.text_params);
            const auto inv = parse_all(string_list(ic["inverse"]), cvars, s.text_params);
            if (fwd.size() != names.size() || inv.size() != names.size())
                schema_fail(ic, "forward and inverse need one expression per variable");
            AdaptedChart c;
            c.id = ic["id"] ? ic["id"].as<std::string>() : "inline";
            c.n_dof = u.n_dof;
            c.forward = expression_vector(fwd, s.text_values);
            c.inverse = expression_vector(inv, s.text_values);
            c.reduced_names = rnames;
            c.periodic = indices_of(rnames, string_list(ic["periodic"]), ic);
            s.chart = c;
            s.reduced_text = symbolic_reduction(h, inv, rnames, s.text_values);
        }
    }

    if (sc && sc["degree"] && s.symmetry && sc["degree"].as<double>() != s.symmetry->degree)
        s.symmetry->degree = sc["degree"].as<double>();

    if (s.bundle && s.reduction && s.reduction->system.degree != s.symmetry->degree) {
        // A declared degree that differs from the true one: same reduced Hamiltonian, the
        // declared degree in the field and in the time change.
        s.reduction->symmetry.degree = s.symmetry->degree;
        s.reduction->system.degree = s.symmetry->degree;
        s.reduced->degree = s.symmetry->degree;
    } else if (!s.bundle && s.chart && s.symmetry && s.rho) {
        s.reduction = contact_reduce(*s.upstairs, *s.symmetry, *s.rho, *s.chart);
        ContactSystem c = s.reduction->system;
        c.hamiltonian = expression_field(Expression::parse(s.reduced_text, c.names, s.text_params), s.text_values);
        s.reduced = c;
    }
    if (s.chart) s.periodic = s.chart->periodic;
    return s;
}

IntegratorConfig integrator_config(const YAML::Node& n) {
    IntegratorConfig c;
    if (!n) return c;
    if (n["method"]) c.method = parse_method(n["method"].as<std::string>());
    if (n["step"]) c.step = n["step"].as<double>();
    if (n["abs_tol"]) c.abs_tol = n["abs_tol"].as<double>();
    if (n["rel_tol"]) c.rel_tol = n["rel_tol"].as<double>();
    if (n["max_step"]) c.max_step = n["max_step"].as<double>();
    if (n["max_steps"]) c.max_steps = n["max_steps"].as<std::size_t>();
    if (!(c.step > 0.0) || !(c.abs_tol > 0.0) || !(c.rel_tol > 0.0)) schema_fail(n, "integrator steps and tolerances must be positive");
    return c;
}

std::vector<std::string> indexed_names(const std::string& a, const std::string& b, std::size_t m) {
    std::vector<std::string> out;
    for (const auto& stem : {a, b})
        for (std::size_t i = 1; i <= m; ++i) out.push_back(stem + std::to_string(i));
    return out;
}

struct Prepared {
    Setup setup;
    OdeProblem problem;
    std::vector<std::string> names;
    Vec x0;
    double t0 = 0.0, t1 = 0.0;
    std::string target;
    IntegratorConfig integrator;
};

const Scenario* find_scenario(const std::vector<Scenario>& list, const std::string& name) {
    for (const auto& s : list)
        if (s.name == name) return &s;
    return nullptr;
}

Prepared prepare(const ScenarioConfig& cfg_in) {
    ScenarioConfig cfg{YAML::Clone(cfg_in.root), cfg_in.base_dir};
    const YAML::Node run = cfg.root["run"];
    std::optional<Scenario> scenario;
    if (run && run["scenario"]) {
        const YAML::Node sys = cfg.root["system"];
        if (!sys["bundle"]) schema_fail(run["scenario"], "named scenarios need a bundle");
        const auto list = reference_scenarios(sys["bundle"].as<std::string>());
        const Scenario* sp = find_scenario(list, run["scenario"].as<std::string>());
        if (!sp) schema_fail(run["scenario"], "bundle has no scenario " + run["scenario"].as<std::string>());
        scenario = *sp;
        if (!scenario->chart.empty() && !(cfg.root["scaling"] && cfg.root["scaling"]["chart"]) &&
            !(cfg.root["scaling"] && cfg.root["scaling"]["lifted"]))
            cfg.root["scaling"]["chart"] = scenario->chart;
        if (scenario->target == "lifted" && !(cfg.root["scaling"] && cfg.root["scaling"]["lifted"]))
            cfg.root["scaling"]["lifted"] = "linear";
    }

    Prepared p;
    p.setup = build_setup(cfg);
    Setup& s = p.setup;
    p.integrator = integrator_config(cfg.root["integrator"]);

    std::string target = run && run["target"] ? run["target"].as<std::string>()
                         : scenario                ? scenario->target
                         : s.upstairs              ? "upstairs"
                                                   : "reduced";
    if (target == "lifted") {
        if (!s.lifted()) schema_fail(run ? run : cfg.root, "target lifted needs scaling.lifted");
        target = "upstairs";
    }
    p.target = target;

    Vec x0;
    if (target == "upstairs") {
        if (!s.upstairs) schema_fail(cfg.root["system"], "no upstairs system for this target");
        p.problem = ode_problem(*s.upstairs);
        p.names = s.upstairs->names.empty() ? darboux_names(s.upstairs->n_dof) : s.upstairs->names;
        x0.assign(p.problem.dim, std::numeric_limits<double>::quiet_NaN());
        if (const LiftedVariant* v = s.lifted()) {
            const Vec base = scenario && scenario->x0.size() == v->lifted.base.dim() ? scenario->x0
                                                                                     : Vec(v->lifted.base.dim(), 0.0);
            x0 = v->lifted.initial_state(base);
            if (!(scenario && scenario->x0.size() == base.size()))
                for (std::size_t i = 0; i < v->lifted.n(); ++i) {
                    x0[i] = std::numeric_limits<double>::quiet_NaN();
                    x0[v->lifted.n() + v->lifted.k() + i] = std::numeric_limits<double>::quiet_NaN();
                }
        }
    } else if (target == "reduced") {
        if (!s.reduced) schema_fail(cfg.root["system"], "target reduced needs scaling.chart or a reduced description");
        p.problem = ode_problem(*s.reduced);
        p.names = s.reduced->names;
        x0.assign(p.problem.dim, std::numeric_limits<double>::quiet_NaN());
    } else if (target == "herglotz") {
        if (!s.bundle || !s.bundle->herglotz) schema_fail(cfg.root["system"], "bundle has no Herglotz counterpart");
        const HerglotzSystem& h = s.bundle->herglotz->closed;
        p.problem = ode_problem(h);
        p.names = {h.names[0], h.names[0] + "dot", "S"};
        x0.assign(3, std::numeric_limits<double>::quiet_NaN());
        x0[2] = 0.0;
    } else if (target == "lifted_lagrangian") {
        if (!s.bundle || !s.bundle->lifted_lagrangian)
            schema_fail(cfg.root["system"], "bundle has no lifted Lagrangian");
        const LagrangianSystem& l = s.bundle->lifted_lagrangian->system;
        p.problem = ode_problem(as_herglotz(l));
        p.names = l.names;
        for (const auto& n : l.names) p.names.push_back(n + "dot");
        p.names.push_back("S");
        x0.assign(p.problem.dim, std::numeric_limits<double>::quiet_NaN());
        x0.back() = 0.0;
    } else if (target == "blowup") {
        if (!s.bundle || !s.bundle->blowup) schema_fail(cfg.root["system"], "bundle has no blow-up");
        const BlowUp& bu = *s.bundle->blowup;
        const std::size_t m = bu.bodies * bu.space_dim;
        auto field = bu.field;
        p.problem.id = s.bundle->id + "/blowup";
        p.problem.dim = 2 * m;
        p.problem.rhs = [field](const Vec& z) { return field->eval(z); };
        p.names = indexed_names("s", "y", m);
        x0.assign(2 * m, std::numeric_limits<double>::quiet_NaN());
    }
    if (scenario && scenario->x0.size() == x0.size()) x0 = scenario->x0;
    if (scenario && target == "lifted_lagrangian" && scenario->x0.size() + 1 == x0.size())
        std::copy(scenario->x0.begin(), scenario->x0.end(), x0.begin());
    if (run && run["initial"])
        for (const auto& kv : run["initial"]) {
            const std::string name = kv.first.as<std::string>();
            const auto it = std::find(p.names.begin(), p.names.end(), name);
            if (it == p.names.end()) schema_fail(kv.first, "unknown coordinate '" + name + "' for target " + target);
            x0[static_cast<std::size_t>(it - p.names.begin())] = kv.second.as<double>();
        }
    for (std::size_t i = 0; i < x0.size(); ++i)
        if (std::isnan(x0[i])) schema_fail(run ? run : cfg.root, "missing initial value for " + p.names[i]);
    p.x0 = x0;

    if (run && run["t_span"]) {
        p.t0 = run["t_span"][0].as<double>();
        p.t1 = run["t_span"][1].as<double>();
    } else if (scenario) {
        p.t1 = scenario->t_end;
    } else {
        schema_fail(run ? run : cfg.root, "run.t_span is required");
    }
    if (!(p.t1 >= p.t0)) schema_fail(run["t_span"], "t_span must be increasing");

    if (run && run["events"])
        for (const auto& ev : run["events"]) {
            const Expression e = Expression::parse(ev["value"].as<std::string>(), p.names);
            p.integrator.events.push_back(
                {ev["name"].as<std::string>(), [e](const Vec& x) { return e.eval(x); },
                 ev["threshold"] ? ev["threshold"].as<double>() : 0.0});
        }
    return p;
}

Trajectory integrate_prepared(const Prepared& p) {
    Trajectory t = integrate(p.problem, p.x0, p.t0, p.t1, p.integrator);
    t.names = p.names;
    const Setup& s = p.setup;
    if (p.target == "upstairs" && s.rho && s.symmetry && t.stop_reason == "span_end")
        t = reparametrize(std::move(t), *s.rho->rho, s.symmetry->degree);
    return t;
}

bool failed_stop(const std::string& reason) {
    return reason == "numerical_failure" || reason == "guard" || reason == "max_steps";
}

std::string select_columns(const std::string& csv, const std::vector<std::string>& columns) {
    if (columns.empty()) return csv;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    std::vector<std::size_t> keep;
    for (const auto& c : columns) {
        const auto it = std::find(header.begin(), header.end(), c);
        if (it == header.end()) throw SchemaError("output.columns names unknown column '" + c + "'");
        keep.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < keep.size(); ++i) out << (i ? "," : "") << cells[keep[i]];
        out << "\n";
    };
    emit(header);
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        emit(cells);
    }
    return out.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::string trajectory_csv(const Trajectory& t, const std::vector<std::string>& columns) {
    std::ostringstream os;
    write_csv(os, t);
    return select_columns(os.str(), columns);
}

std::string plot_script(const std::string& csv_name, std::size_t columns) {
    std::ostringstream os;
    os << "# gnuplot script for " << csv_name << "\n"
       << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set xlabel 't'\n"
       << "plot for [i=2:" << columns << "] '" << csv_name << "' using 1:i with lines\n";
    return os.str();
}

std::string output_name(const ScenarioConfig& cfg, const char* key, const std::string& fallback) {
    const YAML::Node o = cfg.root["output"];
    return o && o[key] ? o[key].as<std::string>() : fallback;
}

std::vector<Vec> chart_domain_samples(const SymplecticSystem& sys, const std::vector<const AdaptedChart*>& charts,
                                      std::size_t count, std::uint64_t seed) {
    SampleSpec spec;
    spec.blocks = sys.sample_blocks();
    spec.count = count;
    spec.seed = seed;
    return sample_points(
        spec,
        [&](const Vec& x) {
            if (!sys.admissible(x)) return false;
            for (const auto* c : charts)
                if (c->domain && !c->domain(x)) return false;
            return true;
        },
        sys.hamiltonian.get());
}

} // namespace

// ---------------------------------------------------------------------------------------------
// Commands

Simulation simulate(const ScenarioConfig& cfg, const Options&) {
    const Prepared p = prepare(cfg);
    return {integrate_prepared(p), p.x0, p.target};
}

RunReport cmd_check(const ScenarioConfig& cfg, const Options& opts) {
    RunReport r;
    r.command = "check";
    const Setup s = build_setup(cfg);
    if (!s.upstairs || !s.symmetry) throw SchemaError("check needs a system with a scaling symmetry");
    const YAML::Node sc = cfg.root["scaling"];
    const std::size_t count = sc && sc["samples"] ? sc["samples"].as<std::size_t>() : 100;
    const double tol = opts.tol.value_or(1e-6);
    const auto samples = sample_points(*s.upstairs, count, opts.seed.value_or(42));
    const SymmetryReport rep = check_scaling_symmetry(*s.upstairs, *s.symmetry, samples, tol, Exec::Parallel);
    r.note("system", s.upstairs->id);
    r.note("symmetry", s.symmetry->id);
    std::ostringstream deg;
    deg << s.symmetry->degree;
    r.note("degree", deg.str());
    r.metric("samples", static_cast<double>(rep.samples));
    r.metric("skipped", static_cast<double>(rep.skipped));
    r.check("liouville_residual", rep.liouville_residual, tol);
    r.check("degree_residual", rep.degree_residual, tol);
    r.check("commutator_residual", rep.commutator_residual, tol);
    r.check("condition_LH_residual", rep.condition_LH_residual, tol);
    if (s.rho) {
        std::vector<Vec> inside;
        for (const auto& x : samples)
            if (!s.chart || !s.chart->domain || s.chart->domain(x)) inside.push_back(x);
        r.check("scaling_function_residual", check_scaling_function(*s.symmetry, *s.rho, inside), tol);
    }
    return r;
}

RunReport cmd_reduce(const ScenarioConfig& cfg, const Options& opts) {
    RunReport r;
    r.command = "reduce";
    const Setup s = build_setup(cfg);
    if (!s.reduction || !s.reduced) throw SchemaError("reduce needs a scaling section with a chart");
    const ChartReport& c = s.reduction->report;
    r.check("chart_inverse_residual", c.inverse_residual, 1e-10);
    r.check("chart_rho_residual", c.rho_residual, 1e-8);
    r.check("chart_pushforward_residual", c.pushforward_residual, 1e-8);
    r.check("chart_liouville_residual", c.liouville_residual, 1e-8);
    const auto samples = chart_domain_samples(*s.upstairs, {&*s.chart}, 100, opts.seed.value_or(42));
    r.check("reduction_identity_residual", reduction_identity_residual(*s.reduction, samples), 1e-9);
    if (!s.reduced_text.empty()) {
        double worst = 0.0;
        for (const auto& x : samples) {
            const Vec y = reduced_point(*s.chart, x);
            const double a = s.reduction->system.hamiltonian->eval(y), b = s.reduced->hamiltonian->eval(y);
            worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
        }
        r.check("closed_form_residual", worst, 1e-10);
        r.note("hamiltonian", s.reduced_text);
    }
    std::ostringstream deg;
    deg << s.reduced->degree;
    r.note("degree", deg.str());
    r.note("chart", s.chart->id);

    YAML::Emitter e;
    e.SetDoublePrecision(17);
    e << YAML::Comment("reduced contact system written by contact-reduce reduce");
    e << YAML::BeginMap << YAML::Key << "system" << YAML::Value << YAML::BeginMap << YAML::Key << "reduced"
      << YAML::Value << YAML::BeginMap;
    if (!s.reduced_text.empty()) {
        e << YAML::Key << "hamiltonian" << YAML::Value << YAML::DoubleQuoted << s.reduced_text;
        if (!s.text_params.empty()) {
            e << YAML::Key << "params" << YAML::Value << YAML::Flow << YAML::BeginMap;
            for (std::size_t i = 0; i < s.text_params.size(); ++i)
                e << YAML::Key << s.text_params[i] << YAML::Value << s.text_values[i];
            e << YAML::EndMap;
        }
    }
    e << YAML::Key << "variables" << YAML::Value << YAML::Flow << s.reduced->names;
    e << YAML::Key << "degree" << YAML::Value << s.reduced->degree;
    const std::string chart_id = s.lifted() ? s.chart->id.substr(0, s.chart->id.size() - 1) : s.chart->id;
    e << YAML::Key << "chart" << YAML::Value << chart_id;
    std::vector<std::string> periodic;
    for (std::size_t i : s.periodic) periodic.push_back(s.reduced->names[i]);
    e << YAML::Key << "periodic" << YAML::Value << YAML::Flow << periodic;
    if (s.bundle) {
        e << YAML::Key << "source" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "bundle" << YAML::Value << s.bundle->id;
        e << YAML::Key << "params" << YAML::Value << YAML::Flow << s.bundle->params;
        if (!s.bundle_texts.empty()) e << YAML::Key << "texts" << YAML::Value << s.bundle_texts;
        if (s.lifted()) e << YAML::Key << "lifted" << YAML::Value << s.lifted()->id;
        e << YAML::EndMap;
    }
    e << YAML::EndMap << YAML::EndMap << YAML::EndMap;
    const fs::path path = opts.out / output_name(cfg, "reduced", "reduced.yaml");
    write_text(path, std::string(e.c_str()) + "\n");
    r.note("description", path.string());
    return r;
}

RunReport cmd_run(const ScenarioConfig& cfg, const Options& opts) {
    RunReport r;
    r.command = "run";
    const Prepared p = prepare(cfg);
    const Trajectory t = integrate_prepared(p);
    const auto columns = string_list(cfg.root["output"] ? cfg.root["output"]["columns"] : YAML::Node());
    const std::string name = output_name(cfg, "csv", "trajectory.csv");
    const std::string csv = trajectory_csv(t, columns);
    write_text(opts.out / name, csv);
    const YAML::Node o = cfg.root["output"];
    if (o && o["plot_script"] && o["plot_script"].as<bool>()) {
        const std::size_t ncol = std::count(csv.begin(), csv.begin() + csv.find('\n'), ',') + 1;
        write_text(opts.out / (name + ".gp"), plot_script(name, ncol));
    }
    r.note("target", p.target);
    r.note("csv", (opts.out / name).string());
    r.note("stop_reason", t.stop_reason);
    if (!t.stop_event.empty()) r.note("stop_event", t.stop_event);
    if (!t.stop_message.empty()) r.note("stop_message", t.stop_message);
    r.metric("rows", static_cast<double>(t.size()));
    r.metric("t_end", t.back().t);
    for (std::size_t i = 0; i < t.names.size(); ++i) r.metric("final_" + t.names[i], t.back().x[i]);
    if (p.target == "upstairs" && p.setup.upstairs) {
        const auto& sys = *p.setup.upstairs;
        r.metric("energy_drift", first_integral_drift(t, [&sys](const Vec& x) { return sys.energy(x); }));
    }
    if (p.target == "blowup") {
        auto e = p.setup.bundle->blowup->energy;
        r.metric("energy_drift", first_integral_drift(t, [e](const Vec& x) { return e->eval(x); }));
    }
    r.numerical_failure = failed_stop(t.stop_reason);
    return r;
}

RunReport cmd_compare(const ScenarioConfig& cfg, const Options& opts) {
    RunReport r;
    r.command = "compare";
    const YAML::Node cmp = cfg.root["compare"];
    const double tol = cmp && cmp["tolerance"] ? cmp["tolerance"].as<double>() : opts.tol.value_or(1e-5);

    if (cmp && cmp["chart"]) {
        const Setup s = build_setup(cfg);
        if (!s.bundle || s.lifted() || !s.reduction)
            throw SchemaError("comparing scaling functions needs a bundle and scaling.chart");
        const SystemBundle& b = *s.bundle;
        const std::string other = cmp["chart"].as<std::string>();
        const auto it = std::find_if(b.reductions.begin(), b.reductions.end(),
                                     [&](const BundleReduction& br) { return br.generic.chart.id == other; });
        if (it == b.reductions.end()) schema_fail(cmp["chart"], "bundle " + b.id + " has no chart " + other);
        const ReducedContactSystem& ra = *s.reduction;
        const ReducedContactSystem& rb = it->generic;
        const std::size_t n = cmp["points"] ? cmp["points"].as<std::size_t>() : 100;
        const auto samples = chart_domain_samples(*s.upstairs, {&ra.chart, &rb.chart}, n, opts.seed.value_or(42));
        const auto tr = transition(ra.chart, rb.chart);
        double par_worst = 0.0, ratio_worst = 0.0;
        for (const auto& x : samples) {
            const Vec ya = reduced_point(ra.chart, x);
            const Eigen::VectorXd pushed = tr->jacobian(ya) * to_eigen(lambda_vf(ra.system, ya));
            const Parallelism par = parallelism(to_vec(pushed), lambda_vf(rb.system, tr->eval(ya)));
            const double sigma = scaling_change_factor(*ra.rho.rho, *rb.rho.rho, s.symmetry->degree, x);
            par_worst = std::max(par_worst, par.residual);
            ratio_worst = std::max(ratio_worst, std::abs(par.ratio * sigma - 1.0));
        }
        r.note("charts", ra.chart.id + " vs " + rb.chart.id);
        r.metric("points", static_cast<double>(samples.size()));
        r.check("parallel_residual", par_worst, tol);
        r.check("ratio_residual", ratio_worst, tol);
        return r;
    }

    const Prepared p = prepare(cfg);
    const Setup& s = p.setup;
    if (p.target != "upstairs" || !s.reduction || !s.reduced)
        throw SchemaError("compare needs an upstairs run and a scaling chart");
    const Trajectory up = integrate_prepared(p);
    r.note("upstairs_stop", up.stop_reason);
    if (up.stop_reason != "span_end") {
        r.numerical_failure = failed_stop(up.stop_reason);
        r.check("deviation", std::numeric_limits<double>::infinity(), tol);
        return r;
    }
    const double tau_end = up.back().tau;
    const Trajectory down = integrate(ode_problem(*s.reduced), reduced_point(*s.chart, p.x0), 0.0, tau_end, p.integrator);
    r.note("reduced_stop", down.stop_reason);
    r.metric("tau_end", tau_end);
    if (down.stop_reason != "span_end") {
        r.check("deviation", std::numeric_limits<double>::infinity(), tol);
        return r;
    }
    const Comparison c = compare_reduced(up, *s.chart, down);
    const auto& names = s.reduced->names;
    for (std::size_t i = 0; i < c.per_coordinate.size() && i < names.size(); ++i)
        r.metric("deviation_" + names[i], c.per_coordinate[i]);
    r.check("deviation", c.sup, tol);
    return r;
}

RunReport cmd_sweep(const ScenarioConfig& cfg, const Options& opts) {
    RunReport r;
    r.command = "sweep";
    const YAML::Node sw = cfg.root["sweep"];
    if (!sw) throw SchemaError("sweep needs a sweep section");
    const std::string diagnostic = sw["diagnostic"] ? sw["diagnostic"].as<std::string>() : "final";

    struct Point {
        std::string label;
        ScenarioConfig cfg;
    };
    std::vector<Point> points;
    if (sw["scenarios"]) {
        if (sw["params"] || sw["initial"]) schema_fail(sw, "sweep over scenarios or over a grid, not both");
        for (const auto& name : sw["scenarios"]) {
            Point pt{name.as<std::string>(), {YAML::Clone(cfg.root), cfg.base_dir}};
            pt.cfg.root["run"]["scenario"] = name.as<std::string>();
            points.push_back(std::move(pt));
        }
    } else {
        // Cartesian product, last axis fastest.
        struct Axis {
            std::string section, key;
            std::vector<double> values;
        };
        std::vector<Axis> axes;
        for (const char* section : {"params", "initial"})
            if (sw[section])
                for (const auto& kv : sw[section]) {
                    Axis a{section, kv.first.as<std::string>(), {}};
                    for (const auto& v : kv.second) a.values.push_back(v.as<double>());
                    axes.push_back(std::move(a));
                }
        if (axes.empty()) schema_fail(sw, "sweep needs params, initial or scenarios");
        std::size_t total = 1;
        for (const auto& a : axes) total *= a.values.size();
        for (std::size_t idx = 0; idx < total; ++idx) {
            Point pt{"", {YAML::Clone(cfg.root), cfg.base_dir}};
            std::size_t rest = idx;
            for (std::size_t k = axes.size(); k-- > 0;) {
                const Axis& a = axes[k];
                const double v = a.values[rest % a.values.size()];
                rest /= a.values.size();
                if (a.section == std::string("params"))
                    pt.cfg.root["system"]["params"][a.key] = v;
                else
                    pt.cfg.root["run"]["initial"][a.key] = v;
                std::ostringstream os;
                os << a.key << "=" << v;
                pt.label = os.str() + (pt.label.empty() ? "" : ";" + pt.label);
            }
            points.push_back(std::move(pt));
        }
    }
    for (auto& pt : points) pt.cfg.root.remove("sweep");

    struct Outcome {
        std::string stop = "error";
        std::string error;
        std::vector<std::string> keys;
        Vec values;
    };
    std::vector<Outcome> outcomes(points.size());
    const fs::path dir = opts.out / "sweep";
    fs::create_directories(dir);
    auto csv_name = [](std::size_t i) {
        std::ostringstream os;
        os << "point_" << std::setw(3) << std::setfill('0') << i << ".csv";
        return os.str();
    };

    for_each_index(points.size(), Exec::Parallel, [&](std::size_t i) {
        Outcome& o = outcomes[i];
        try {
            const Prepared p = prepare(points[i].cfg);
            const Trajectory t = integrate_prepared(p);
            write_text(dir / csv_name(i), trajectory_csv(t, {}));
            o.stop = t.stop_reason;
            if (diagnostic == "final") {
                o.keys = t.names;
                o.values = t.back().x;
            } else if (diagnostic == "energy_drift") {
                if (p.target != "upstairs") throw ContractError("energy_drift needs the upstairs target");
                const auto& sys = *p.setup.upstairs;
                o.keys = {"energy_drift"};
                o.values = {first_integral_drift(t, [&sys](const Vec& x) { return sys.energy(x); })};
            } else {
                if (p.target != "upstairs") throw ContractError("loop_action needs the upstairs target");
                const LoopAction la = loop_action(*p.setup.upstairs, p.x0, p.t1, 1e-6, p.integrator);
                o.keys = {"energy", "action", "period", "closure_gap"};
                o.values = {p.setup.upstairs->energy(p.x0), la.action, la.period, la.closure_gap};
            }
        } catch (const std::exception& e) {
            o.stop = "error";
            o.error = e.what();
        }
    });

    std::vector<std::string> keys;
    for (const auto& o : outcomes)
        if (!o.keys.empty()) {
            keys = o.keys;
            break;
        }
    std::ostringstream summary;
    summary << "index,label,csv,stop_reason";
    for (const auto& k : keys) summary << "," << k;
    summary << ",error\n" << std::setprecision(17);
    std::size_t ok = 0, events = 0, failures = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const Outcome& o = outcomes[i];
        summary << i << "," << points[i].label << "," << csv_name(i) << "," << o.stop;
        for (std::size_t k = 0; k < keys.size(); ++k) {
            summary << ",";
            if (k < o.values.size()) summary << o.values[k];
        }
        std::string err = o.error;
        std::replace(err.begin(), err.end(), ',', ';');
        summary << "," << err << "\n";
        if (o.stop == "span_end") ++ok;
        else if (o.stop == "event") ++events;
        else ++failures;
    }
    write_text(dir / "summary.csv", summary.str());
    r.note("summary", (dir / "summary.csv").string());
    r.note("diagnostic", diagnostic);
    r.metric("points", static_cast<double>(points.size()));
    r.metric("completed", static_cast<double>(ok));
    r.metric("event_stops", static_cast<double>(events));
    r.metric("failures", static_cast<double>(failures));
    r.numerical_failure = !points.empty() && failures == points.size();
    return r;
}

// ---------------------------------------------------------------------------------------------

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"contact-reduce: scaling symmetries, contact reduction and trajectory comparison"};
    app.require_subcommand(1);
    Options opts;
    std::string config, outdir = ".";
    std::uint64_t seed = 0;
    double tol = 0.0;
    const std::vector<std::pair<const char*, const char*>> commands{
        {"check", "verify the scaling symmetry conditions"},
        {"reduce", "build the reduced contact system and write its description"},
        {"run", "integrate a scenario and write the trajectory CSV"},
        {"compare", "integrate upstairs and reduced systems and compare them"},
        {"sweep", "run a grid of scenarios and write a summary table"}};
    std::vector<CLI::App*> subs;
    std::vector<CLI::Option*> seed_opts, tol_opts;
    for (const auto& [name, desc] : commands) {
        auto* sc = app.add_subcommand(name, desc);
        sc->add_option("--config", config, "scenario file")->required();
        sc->add_option("--out", outdir, "output directory");
        seed_opts.push_back(sc->add_option("--seed", seed, "sampling seed"));
        tol_opts.push_back(sc->add_option("--tol", tol, "pass/fail tolerance"));
        sc->add_flag("--quiet", opts.quiet, "suppress the report on stdout");
        subs.push_back(sc);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }
    opts.config = config;
    opts.out = outdir;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (*seed_opts[i]) opts.seed = seed;
        if (*tol_opts[i]) opts.tol = tol;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        const ScenarioConfig cfg = load_config(opts.config);
        const std::string cmd = app.get_subcommands().front()->get_name();
        RunReport rep = cmd == "check"    ? cmd_check(cfg, opts)
                        : cmd == "reduce" ? cmd_reduce(cfg, opts)
                        : cmd == "run"    ? cmd_run(cfg, opts)
                        : cmd == "compare" ? cmd_compare(cfg, opts)
                                           : cmd_sweep(cfg, opts);
        rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_text(opts.out / output_name(cfg, "report", cmd + "_report.txt"), rep.str());
        if (!opts.quiet) out << rep.str();
        return exit_code(rep);
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        err << "expression error: " << e.what() << "\n";
        return 2;
    } catch (const YAML::Exception& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const ContractError& e) {
        err << "check failed: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

} // namespace cr::cli
