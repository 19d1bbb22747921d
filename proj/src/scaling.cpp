#include "cr/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace cr {

std::string SymmetryReport::to_text() const {
    std::ostringstream os;
    os.precision(6);
    os << std::scientific;
    os << "liouville_residual: " << liouville_residual << '\n'
       << "degree_residual: " << degree_residual << '\n'
       << "commutator_residual: " << commutator_residual << '\n'
       << "condition_LH_residual: " << condition_LH_residual << '\n'
       << "tolerance: " << tolerance << '\n'
       << "samples: " << samples << '\n'
       << "skipped: " << skipped << '\n'
       << "verdict: " << (verdict ? "pass" : "fail") << '\n';
    return os.str();
}

namespace {

// [Y, X] = J_X Y - J_Y X.
Eigen::VectorXd bracket(const VectorField& y, const VectorField& x, const Vec& at, Eigen::VectorXd& xv) {
    xv = to_eigen(x.eval(at));
    const Eigen::VectorXd yv = to_eigen(y.eval(at));
    return x.jacobian(at) * yv - y.jacobian(at) * xv;
}

// Parallel loops write per-sample slots and reduce afterwards, so both paths give identical sums.
double max_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

} // namespace

SimilarityResult check_dynamical_similarity(const VectorField& x, const VectorField& y,
                                            const std::vector<Vec>& samples, Exec exec) {
    if (x.dim_in() != y.dim_in() || x.dim_out() != y.dim_out())
        throw ContractError("dynamical similarity needs fields on the same space");
    SimilarityResult r;
    r.f.assign(samples.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<double> res(samples.size(), 0.0);
    for_each_index(samples.size(), exec, [&](std::size_t i) {
        Eigen::VectorXd xv;
        const Eigen::VectorXd b = bracket(y, x, samples[i], xv);
        const double xx = xv.squaredNorm();
        if (xx == 0.0) return;
        const double f = b.dot(xv) / xx;
        r.f[i] = f;
        res[i] = (b - f * xv).norm() / std::sqrt(xx);
    });
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (std::isnan(r.f[i])) r.skipped.push_back(i);
    r.residual = max_of(res);
    return r;
}

SymmetryReport check_scaling_symmetry(const SymplecticSystem& sys, const ScalingSymmetry& d,
                                      const std::vector<Vec>& samples, double tol, Exec exec) {
    if (d.field->dim_in() != sys.dim() || d.field->dim_out() != sys.dim())
        throw ContractError("scaling symmetry " + d.id + " does not act on the phase space of " + sys.id);
    const VectorFieldPtr xh = hamiltonian_field(sys);
    const Mat omega = darboux_matrix(sys.n_dof);
    const double lam = d.degree;
    const std::size_t n = samples.size();
    std::vector<double> liou(n, 0.0), deg(n, 0.0), comm(n, 0.0), cond(n, 0.0);
    std::vector<char> skip(n, 0);
    for_each_index(n, exec, [&](std::size_t i) {
        const Vec& x = samples[i];
        const Mat jd = d.field->jacobian(x);
        liou[i] = (jd.transpose() * omega + omega * jd - omega).cwiseAbs().maxCoeff();

        const Eigen::VectorXd dv = to_eigen(d.field->eval(x));
        const double h = sys.energy(x);
        const Eigen::VectorXd grad = to_eigen(sys.gradient(x));
        deg[i] = std::abs(grad.dot(dv) - lam * h);

        Eigen::VectorXd xv;
        const Eigen::VectorXd b = bracket(*d.field, *xh, x, xv);
        cond[i] = std::abs(dv.dot(omega * xv) - lam * h);
        const double xx = xv.squaredNorm();
        if (xx == 0.0) {
            skip[i] = 1;
            return;
        }
        comm[i] = (b - (lam - 1.0) * xv).norm() / std::sqrt(xx);
    });
    SymmetryReport r;
    r.liouville_residual = max_of(liou);
    r.degree_residual = max_of(deg);
    r.commutator_residual = max_of(comm);
    r.condition_LH_residual = max_of(cond);
    r.samples = n;
    r.skipped = static_cast<std::size_t>(std::count(skip.begin(), skip.end(), 1));
    r.tolerance = tol;
    r.verdict = r.liouville_residual < tol && r.degree_residual < tol && r.commutator_residual < tol &&
                r.condition_LH_residual < tol;
    return r;
}

double check_scaling_function(const ScalingSymmetry& d, const ScalingFunction& rho,
                              const std::vector<Vec>& samples) {
    double worst = 0.0;
    for (const Vec& x : samples) {
        const double r = rho.rho->eval(x);
        const double dr = dot(rho.rho->gradient(x), d.field->eval(x));
        worst = std::max(worst, std::abs(dr - r));
    }
    return worst;
}

std::vector<Vec> sample_points(const SampleSpec& spec, const Guard& guard, const ScalarField* f) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(std::log(spec.r_min), std::log(spec.r_max));
    std::size_t dim = 0;
    for (std::size_t b : spec.blocks) dim += b;
    std::vector<Vec> out;
    const std::size_t max_attempts = 1000 * std::max<std::size_t>(spec.count, 1);
    for (std::size_t attempt = 0; out.size() < spec.count; ++attempt) {
        if (attempt >= max_attempts)
            throw NumericalError("could not draw " + std::to_string(spec.count) + " admissible samples");
        Vec x;
        x.reserve(dim);
        for (std::size_t b : spec.blocks) {
            Vec dir(b);
            double norm = 0.0;
            do {
                for (double& c : dir) c = normal(rng);
                norm = norm2(dir);
            } while (norm == 0.0);
            const double radius = std::exp(uniform(rng));
            for (double c : dir) x.push_back(radius * c / norm);
        }
        if (guard && !guard(x)) continue;
        if (f) {
            try {
                if (!std::isfinite(f->eval(x))) continue;
                const Vec g = f->gradient(x);
                if (!std::all_of(g.begin(), g.end(), [](double c) { return std::isfinite(c); })) continue;
            } catch (const DomainError&) {
                continue;
            }
        }
        out.push_back(std::move(x));
    }
    return out;
}

std::vector<Vec> sample_points(const SymplecticSystem& sys, std::size_t count, std::uint64_t seed) {
    SampleSpec spec;
    spec.blocks = sys.sample_blocks();
    spec.count = count;
    spec.seed = seed;
    return sample_points(spec, sys.guard, sys.hamiltonian.get());
}

ScalingSymmetry add_hamiltonian_field(const ScalingSymmetry& d, const SymplecticSystem& f) {
    VectorFieldPtr xf = hamiltonian_field(f);
    VectorFieldPtr base = d.field;
    ScalingSymmetry out;
    out.id = d.id + "+X_" + f.id;
    out.degree = d.degree;
    out.field = make_vector(base->dim_in(), base->dim_out(), [base, xf](const auto& x) {
        auto a = base->at(x);
        auto b = xf->at(x);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] + b[i];
        return a;
    });
    return out;
}

namespace {

OdeProblem action_problem(const SymplecticSystem& sys) {
    OdeProblem p;
    p.id = sys.id + "+action";
    p.dim = sys.dim() + 1;
    p.n_dof = sys.n_dof;
    const std::size_t m = sys.dim();
    p.guard = [sys, m](const Vec& x) { return sys.admissible(Vec(x.begin(), x.begin() + m)); };
    p.rhs = [sys, m](const Vec& x) {
        const Vec z(x.begin(), x.begin() + m);
        const Vec g = sys.gradient(z);
        const std::size_t n = sys.n_dof;
        Vec v(m + 1);
        double pv = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            v[a] = g[n + a];
            v[n + a] = -g[a];
            pv += z[n + a] * g[n + a];
        }
        v[m] = pv - sys.hamiltonian->eval(z);
        return v;
    };
    return p;
}

} // namespace

Trajectory local_action_solution(const SymplecticSystem& sys, const Vec& x0, double t_max,
                                 const IntegratorConfig& config) {
    sys.require_admissible(x0);
    Vec y0 = x0;
    y0.push_back(0.0);
    Trajectory traj = integrate(action_problem(sys), y0, 0.0, t_max, config);
    traj.names = sys.names.empty() ? darboux_names(sys.n_dof) : sys.names;
    traj.names.push_back("S");
    return traj;
}

LoopAction loop_action(const SymplecticSystem& sys, const Vec& x0, double period_estimate,
                       double closure_tol, const IntegratorConfig& config) {
    if (!(period_estimate > 0.0)) throw ContractError("loop action needs a positive period estimate");
    const std::size_t m = sys.dim();
    Trajectory traj = local_action_solution(sys, x0, 1.5 * period_estimate, config);
    if (traj.stop_reason != "span_end")
        throw ContractError("orbit through the initial point ended early (" + traj.stop_reason + ")");
    const Interpolant ip = Interpolant::of(traj);
    // d/dt |x - x0|^2 / 2 on the phase coordinates.
    auto approach = [&](const Vec& x, const Vec& v) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += (x[i] - x0[i]) * v[i];
        return s;
    };
    const double half = 0.5 * period_estimate;
    double lo = 0.0, hi = 0.0;
    bool found = false;
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const Sample& a = traj.samples[i];
        const Sample& b = traj.samples[i + 1];
        if (b.t < half) continue;
        if (approach(a.x, a.dx) < 0.0 && approach(b.x, b.dx) >= 0.0) {
            lo = std::max(a.t, half);
            hi = b.t;
            found = true;
            break;
        }
    }
    if (!found) throw ContractError("orbit does not return towards its initial point");
    while (hi - lo > 1e-13 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (approach(ip(mid), ip.derivative(mid)) < 0.0) lo = mid;
        else hi = mid;
    }
    const double period = 0.5 * (lo + hi);
    // Integrate again so the endpoint lands exactly on the return time.
    Trajectory exact = local_action_solution(sys, x0, period, config);
    const Vec& end = exact.back().x;
    double gap = 0.0;
    for (std::size_t i = 0; i < m; ++i) gap = std::max(gap, std::abs(end[i] - x0[i]));
    if (gap > closure_tol) {
        std::ostringstream os;
        os << "orbit does not close: gap " << gap << " exceeds " << closure_tol;
        throw ContractError(os.str());
    }
    return {end[m], period, gap};
}

} // namespace cr
