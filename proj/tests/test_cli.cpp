#include "doctest.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "cli/app.hpp"
#include "cr/systems.hpp"

using namespace cr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("contact_reduce_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    args.insert(args.begin(), "contact-reduce");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int rc = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return rc;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST_CASE("check exit codes") {
    const auto dir = scratch("check");
    const auto good = write(dir, "good.yaml", "system: {bundle: kepler}\nscaling: {degree: -2}\n");
    const auto bad = write(dir, "bad.yaml", "system: {bundle: kepler}\nscaling: {degree: 2}\n");
    CHECK(run_cli({"check", "--config", good.string(), "--out", dir.string(), "--quiet"}) == 0);
    std::string out;
    CHECK(run_cli({"check", "--config", bad.string(), "--out", dir.string()}, &out) == 1);
    CHECK(out.find("degree_residual") != std::string::npos);
    CHECK(out.find("FAIL") != std::string::npos);
}

TEST_CASE("schema errors carry line and column") {
    const auto dir = scratch("schema");
    const auto f = write(dir, "bad.yaml", "system:\n  bundle: kepler\nrun:\n  t_spam: [0, 1]\n");
    std::string err;
    CHECK(run_cli({"run", "--config", f.string(), "--out", dir.string()}, nullptr, &err) == 2);
    CHECK(err.find("run.t_spam") != std::string::npos);
    CHECK(err.find("line 4, column 3") != std::string::npos);

    const auto p = write(dir, "param.yaml", "system: {bundle: kepler, params: {mass: 2}}\n");
    CHECK(run_cli({"check", "--config", p.string(), "--out", dir.string()}, nullptr, &err) == 2);
    CHECK(run_cli({"check", "--config", (dir / "missing.yaml").string()}, nullptr, &err) == 2);
    CHECK(run_cli({"frobnicate"}, nullptr, &err) == 2);
    const auto y = write(dir, "yaml.yaml", "system: [unclosed\n");
    CHECK(run_cli({"check", "--config", y.string()}, nullptr, &err) == 2);
}

TEST_CASE("circular orbit at fixed step closes after one period") {
    const auto dir = scratch("circular");
    const auto f = write(dir, "c.yaml", R"(system: {bundle: kepler}
integrator: {method: rk4-fixed, step: 0.01}
run:
  t_span: [0, 6.283185307179586]
  initial: {q1: 1, q2: 0, p1: 0, p2: 1}
output: {csv: c.csv, plot_script: true}
)");
    REQUIRE(run_cli({"run", "--config", f.string(), "--out", dir.string(), "--quiet"}) == 0);
    const std::string csv = slurp(dir / "c.csv");
    CHECK(count_lines(csv) == 630);   // header plus 629 rows
    std::istringstream in(csv);
    std::string line, last;
    while (std::getline(in, line)) last = line;
    std::vector<double> v;
    std::stringstream ls(last);
    for (std::string cell; std::getline(ls, cell, ',');) v.push_back(std::stod(cell));
    CHECK(std::abs(v[1] - 1) < 1e-8);
    CHECK(std::abs(v[2]) < 1e-8);
    CHECK(std::abs(v[3]) < 1e-8);
    CHECK(std::abs(v[4] - 1) < 1e-8);
    CHECK(fs::exists(dir / "c.csv.gp"));
}

TEST_CASE("zero span run writes one row") {
    const auto dir = scratch("zero");
    const auto f = write(dir, "z.yaml", R"(system: {bundle: oscillator2d}
run: {t_span: [0, 0], initial: {q1: 1, q2: 0, p1: 0, p2: 1}}
output: {columns: [t, q1]}
)");
    REQUIRE(run_cli({"run", "--config", f.string(), "--out", dir.string(), "--quiet"}) == 0);
    CHECK(slurp(dir / "trajectory.csv") == "t,q1\n0,1\n");
}

TEST_CASE("missing initial values are schema errors") {
    const auto dir = scratch("missing");
    const auto f = write(dir, "m.yaml", "system: {bundle: kepler}\nrun: {t_span: [0, 1], initial: {q1: 1}}\n");
    CHECK(run_cli({"run", "--config", f.string(), "--out", dir.string(), "--quiet"}) == 2);
}

TEST_CASE("reduced descriptions reload bit for bit") {
    for (const std::string lifted : {"", "linear"}) {
        CAPTURE(lifted);
        const auto dir = scratch("roundtrip" + lifted);
        std::string cfg = "system: {bundle: kepler}\nscaling: {chart: rho";
        if (!lifted.empty()) cfg += ", lifted: " + lifted;
        cfg += "}\noutput: {reduced: red.yaml}\n";
        const auto r = write(dir, "r.yaml", cfg);
        REQUIRE(run_cli({"reduce", "--config", r.string(), "--out", dir.string(), "--quiet"}) == 0);

        const auto b = instantiate("kepler");
        const ContactSystem& sys = lifted.empty() ? b.reduction("rho").closed : b.lifted_variant(lifted).closed;
        const std::map<std::string, double> init = {{"theta", 0.3}, {"pbar", -0.9}, {"S", 0.2}, {"b_mu", 0.1},
                                                    {"b_k", 0.05}, {"pa_mu", -1.0}, {"pa_k", -1.0}};
        Vec y0(sys.dim(), 0.0);
        for (std::size_t i = 0; i < sys.names.size(); ++i) y0[i] = init.at(sys.names[i]);
        std::ostringstream run;
        run << "system: {include: red.yaml}\nintegrator: {method: rk4-fixed, step: 0.01}\nrun:\n  t_span: [0, 2]\n"
            << "  initial: {";
        for (std::size_t i = 0; i < sys.names.size(); ++i)
            run << (i ? ", " : "") << sys.names[i] << ": " << std::setprecision(17) << y0[i];
        run << "}\noutput: {csv: out.csv}\n";
        const auto f = write(dir, "run.yaml", run.str());
        REQUIRE(run_cli({"run", "--config", f.string(), "--out", dir.string(), "--quiet"}) == 0);

        IntegratorConfig ic;
        ic.method = Method::Rk4Fixed;
        ic.step = 0.01;
        Trajectory t = integrate(ode_problem(sys), y0, 0.0, 2.0, ic);
        t.names = sys.names;
        std::ostringstream want;
        write_csv(want, t);
        CHECK(slurp(dir / "out.csv") == want.str());
    }
}

TEST_CASE("reduce describes flat FLRW and lifted Kepler") {
    const auto dir = scratch("describe");
    const auto f = write(dir, "f.yaml", "system: {bundle: flrw}\nscaling: {chart: v}\n");
    std::string out;
    REQUIRE(run_cli({"reduce", "--config", f.string(), "--out", dir.string()}, &out) == 0);
    CHECK(out.find("hamiltonian: 3*S^2/(8*pi)") != std::string::npos);
    const auto k = write(dir, "k.yaml", "system: {bundle: kepler}\nscaling: {chart: rho, lifted: linear}\n");
    REQUIRE(run_cli({"reduce", "--config", k.string(), "--out", dir.string(), "--quiet"}) == 0);
    const std::string desc = slurp(dir / "reduced.yaml");
    CHECK(desc.find("degree: 1") != std::string::npos);
    CHECK(desc.find("pa_mu") != std::string::npos);
}

TEST_CASE("compare passes for the true degree and fails for a wrong one") {
    const auto dir = scratch("compare");
    const std::string base = "system: {bundle: kepler}\nintegrator: {abs_tol: 1.0e-12, rel_tol: 1.0e-12}\n"
                             "run: {scenario: ellipse}\ncompare: {tolerance: 1.0e-5}\n";
    const auto good = write(dir, "g.yaml", base + "scaling: {chart: rho}\n");
    const auto bad = write(dir, "b.yaml", base + "scaling: {chart: rho, degree: 1}\n");
    CHECK(run_cli({"compare", "--config", good.string(), "--out", dir.string(), "--quiet"}) == 0);
    CHECK(run_cli({"compare", "--config", bad.string(), "--out", dir.string(), "--quiet"}) == 1);
    const auto two = write(dir, "t.yaml", "system: {bundle: kepler}\nscaling: {chart: rho}\ncompare: {chart: J}\n");
    CHECK(run_cli({"compare", "--config", two.string(), "--out", dir.string(), "--quiet", "--tol", "1e-6"}) == 0);
}

TEST_CASE("sweeps record every point") {
    const auto dir = scratch("sweep");
    const auto f = write(dir, "s.yaml", R"(system: {bundle: kepler}
run:
  t_span: [0, 3]
  initial: {q1: 1, q2: 0, p1: -1, p2: 1}
  events: [{name: collision, value: "q1^2 + q2^2", threshold: 1.0e-4}]
sweep:
  initial: {q2: [0.0, 0.5, 1.0], p2: [0.0, 0.8, 1.0]}
)");
    REQUIRE(run_cli({"sweep", "--config", f.string(), "--out", dir.string(), "--quiet"}) == 0);
    std::size_t csvs = 0;
    for (const auto& e : fs::directory_iterator(dir / "sweep")) csvs += e.path().filename().string().rfind("point_", 0) == 0;
    CHECK(csvs == 9);
    const std::string summary = slurp(dir / "sweep" / "summary.csv");
    CHECK(count_lines(summary) == 10);
    std::size_t events = 0, pos = 0;
    while ((pos = summary.find(",event,", pos)) != std::string::npos) ++events, ++pos;
    CHECK(events == 1);

    const auto l = write(dir, "l.yaml", R"(system: {bundle: kepler}
integrator: {abs_tol: 1.0e-12, rel_tol: 1.0e-12}
sweep: {scenarios: [loop_E-0.5, loop_E-0.25, loop_E-0.125], diagnostic: loop_action}
)");
    REQUIRE(run_cli({"sweep", "--config", l.string(), "--out", (dir / "loops").string(), "--quiet"}) == 0);
    const std::string ls = slurp(dir / "loops" / "sweep" / "summary.csv");
    std::istringstream in(ls);
    std::string line;
    std::getline(in, line);
    const double want[] = {3 * M_PI, 3 * M_PI * std::sqrt(2.0), 6 * M_PI};
    for (double w : want) {
        REQUIRE(std::getline(in, line));
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        CHECK(std::stod(cells[5]) == doctest::Approx(w).epsilon(1e-6));
    }
}
