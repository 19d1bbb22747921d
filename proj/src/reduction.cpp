#include "cr/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cr {

namespace {

// (rho, S, qbar, pbar) <-> (qbar, pbar, S) index bookkeeping.
template <class T> std::vector<T> chart_to_reduced(const std::vector<T>& c) {
    std::vector<T> y(c.begin() + 2, c.end());
    y.push_back(c[1]);
    return y;
}

template <class T> std::vector<T> reduced_to_chart(const std::vector<T>& y, const T& rho) {
    std::vector<T> c;
    c.reserve(y.size() + 1);
    c.push_back(rho);
    c.push_back(y.back());
    c.insert(c.end(), y.begin(), y.end() - 1);
    return c;
}

bool on_domain(const SymplecticSystem& sys, const AdaptedChart& chart, const Vec& x) {
    return sys.admissible(x) && (!chart.domain || chart.domain(x));
}

double rel(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

} // namespace

ChartReport validate_chart(const SymplecticSystem& sys, const ScalingSymmetry& d, const ScalingFunction& rho,
                           const AdaptedChart& chart, const std::vector<Vec>& samples) {
    const std::size_t m = sys.dim();
    if (chart.forward->dim_in() != m || chart.forward->dim_out() != m || chart.inverse->dim_in() != m ||
        chart.inverse->dim_out() != m)
        throw ContractError("chart " + chart.id + " does not match the phase space of " + sys.id);
    const Mat omega = darboux_matrix(sys.n_dof);
    const std::size_t n1 = sys.n_dof - 1;
    ChartReport r;
    for (const Vec& x : samples) {
        const Vec c = chart.forward->eval(x);
        const Vec back = chart.inverse->eval(c);
        for (std::size_t i = 0; i < m; ++i) r.inverse_residual = std::max(r.inverse_residual, rel(back[i], x[i]));
        r.rho_residual = std::max(r.rho_residual, rel(c[0], rho.rho->eval(x)));

        const Mat jf = chart.forward->jacobian(x);
        const Eigen::VectorXd dv = to_eigen(d.field->eval(x));
        const Eigen::VectorXd push = jf * dv;
        const double scale = std::max(1.0, (jf.cwiseAbs() * dv.cwiseAbs()).maxCoeff());
        for (Eigen::Index k = 0; k < push.size(); ++k) {
            const double want = k == 0 ? c[0] : 0.0;
            r.pushforward_residual = std::max(r.pushforward_residual, std::abs(push(k) - want) / scale);
        }

        // Row vectors of both one-forms in the x basis.
        const Eigen::RowVectorXd lam = dv.transpose() * omega;
        Eigen::RowVectorXd form = jf.row(1);
        for (std::size_t a = 0; a < n1; ++a) form -= c[2 + n1 + a] * jf.row(static_cast<Eigen::Index>(2 + a));
        form *= c[0];
        const double fscale = std::max({1.0, lam.cwiseAbs().maxCoeff(), form.cwiseAbs().maxCoeff()});
        r.liouville_residual = std::max(r.liouville_residual, (lam - form).cwiseAbs().maxCoeff() / fscale);
    }
    r.samples = samples.size();
    return r;
}

Vec reduced_point(const AdaptedChart& chart, const Vec& x) { return chart_to_reduced(chart.forward->eval(x)); }

Vec upstairs_point(const AdaptedChart& chart, const Vec& reduced, double rho) {
    return chart.inverse->eval(reduced_to_chart(reduced, rho));
}

VectorFieldPtr reduced_projection(const AdaptedChart& chart) {
    auto fwd = chart.forward;
    const std::size_t m = fwd->dim_in();
    return make_vector(m, m - 1, [fwd](const auto& x) { return chart_to_reduced(fwd->at(x)); });
}

VectorFieldPtr unit_section(const AdaptedChart& chart) {
    auto inv = chart.inverse;
    const std::size_t m = inv->dim_in();
    return make_vector(m - 1, m, [inv](const auto& y) {
        using T = typename std::decay_t<decltype(y)>::value_type;
        return inv->at(reduced_to_chart(y, T(1.0)));
    });
}

VectorFieldPtr transition(const AdaptedChart& from, const AdaptedChart& to) {
    auto sec = unit_section(from);
    auto proj = reduced_projection(to);
    return compose(proj, sec);
}

ReducedContactSystem contact_reduce(const SymplecticSystem& sys, const ScalingSymmetry& d,
                                    const ScalingFunction& rho, const AdaptedChart& chart,
                                    const ReductionOptions& options) {
    if (sys.n_dof < 1) throw ContractError("reduction needs at least one degree of freedom");
    SampleSpec spec;
    spec.blocks = sys.sample_blocks();
    spec.count = options.samples;
    spec.seed = options.seed;
    const auto samples = sample_points(
        spec, [&](const Vec& x) { return on_domain(sys, chart, x); }, sys.hamiltonian.get());

    ReducedContactSystem red;
    red.report = validate_chart(sys, d, rho, chart, samples);
    const ChartReport& r = red.report;
    const double id_tol = options.tol.identities;
    if (r.inverse_residual > options.tol.inverse || r.rho_residual > id_tol || r.pushforward_residual > id_tol ||
        r.liouville_residual > id_tol) {
        std::ostringstream os;
        os << "chart " << chart.id << " is not adapted to " << d.id << ": inverse " << r.inverse_residual
           << ", rho " << r.rho_residual << ", pushforward " << r.pushforward_residual << ", liouville "
           << r.liouville_residual;
        throw ContractError(os.str());
    }

    auto sec = unit_section(chart);
    auto h = sys.hamiltonian;
    const std::size_t k = sys.dim() - 1;
    ContactSystem c;
    c.id = sys.id + "/" + chart.id;
    c.n_dof = sys.n_dof - 1;
    c.degree = d.degree;
    c.names = chart.reduced_names.empty() ? darboux_names(c.n_dof, true) : chart.reduced_names;
    c.hamiltonian = make_scalar(k, [sec, h](const auto& y) { return -h->at(sec->at(y)); });
    c.guard = [sys, chart, sec](const Vec& y) {
        Vec x;
        try {
            x = sec->eval(y);
        } catch (const DomainError&) {
            return false;
        }
        return on_domain(sys, chart, x);
    };
    red.system = std::move(c);
    red.parent = sys;
    red.symmetry = d;
    red.rho = rho;
    red.chart = chart;

    const double ident = reduction_identity_residual(red, samples);
    if (ident > id_tol) {
        std::ostringstream os;
        os << "reduced Hamiltonian of " << sys.id << " misses -H/rho^degree by " << ident;
        throw NumericalError(os.str());
    }
    return red;
}

double reduction_identity_residual(const ReducedContactSystem& red, const std::vector<Vec>& samples) {
    double worst = 0.0;
    for (const Vec& x : samples) {
        const double h0 = red.system.hamiltonian->eval(reduced_point(red.chart, x));
        const double want = -red.parent.hamiltonian->eval(x) / std::pow(red.rho.rho->eval(x), red.symmetry.degree);
        worst = std::max(worst, rel(h0, want));
    }
    return worst;
}

ContactSystem normalized_reduction(const ReducedContactSystem& red, double band) {
    const double lam = red.system.degree;
    if (lam == 0.0) throw ContractError("normalized reduction needs a nonzero degree");
    auto h0 = red.system.hamiltonian;
    ContactSystem c = red.system;
    c.id = red.system.id + "/normalized";
    c.degree = 1.0;
    c.hamiltonian = make_scalar(h0->dim(), [h0, lam, band](const auto& y) {
        auto v = h0->at(y);
        if (std::abs(value_of(v)) <= band)
            throw DomainError("point lies in the excluded band around the zero level of the reduced Hamiltonian");
        return -pow(abs(v), 1.0 / lam);
    });
    return c;
}

double normalized_factor(const ReducedContactSystem& red, const Vec& y) {
    const double lam = red.system.degree;
    const double h = red.system.hamiltonian->eval(y);
    const double sign = h > 0.0 ? 1.0 : -1.0;
    return -sign / lam * std::pow(std::abs(h), 1.0 / lam - 1.0);
}

double scaling_change_factor(const ScalarField& rho, const ScalarField& rho_tilde, double degree, const Vec& x) {
    const double r = rho.eval(x);
    const double rt = rho_tilde.eval(x);
    if (r == 0.0 || rt == 0.0) throw DomainError("scaling function vanishes at the point");
    const double sigma = rt / r;
    const double e = 1.0 - degree;
    if (sigma < 0.0 && e != std::round(e))
        throw DomainError("negative ratio of scaling functions under a non-integer power");
    return std::pow(sigma, e);
}

VectorFieldPtr lift_coordinates(const AdaptedChart& chart) {
    auto fwd = chart.forward;
    const std::size_t m = fwd->dim_in();
    return make_vector(m, m, [fwd, m](const auto& x) {
        auto c = fwd->at(x);
        const std::size_t n1 = m / 2 - 1;
        using T = typename std::decay_t<decltype(c)>::value_type;
        std::vector<T> out;
        out.reserve(m);
        out.push_back(c[1]);
        for (std::size_t a = 0; a < n1; ++a) out.push_back(c[2 + a]);
        out.push_back(c[0]);
        for (std::size_t a = 0; a < n1; ++a) out.push_back(-(c[0] * c[2 + n1 + a]));
        return out;
    });
}

SymplecticSystem symplectic_lift(const ReducedContactSystem& red) {
    const std::size_t n = red.parent.n_dof;
    const double lam = red.system.degree;
    auto h0 = red.system.hamiltonian;
    SymplecticSystem s;
    s.id = red.system.id + "/lift";
    s.n_dof = n;
    s.names.push_back("S");
    for (std::size_t a = 0; a + 1 < n; ++a) s.names.push_back(red.system.names[a]);
    s.names.push_back("rho");
    for (std::size_t a = 0; a + 1 < n; ++a) s.names.push_back("P" + std::to_string(a + 1));
    s.hamiltonian = make_scalar(2 * n, [h0, lam, n](const auto& z) {
        using T = typename std::decay_t<decltype(z)>::value_type;
        const T& p0 = z[n];
        if (value_of(p0) <= 0.0) throw DomainError("symplectic lift needs rho > 0");
        std::vector<T> y;
        y.reserve(2 * n - 1);
        for (std::size_t a = 1; a < n; ++a) y.push_back(z[a]);
        for (std::size_t a = 1; a < n; ++a) y.push_back(-(z[n + a] / p0));
        y.push_back(z[0]);
        return -(pow(p0, lam) * h0->at(y));
    });
    s.guard = [n](const Vec& z) { return z[n] > 0.0; };
    return s;
}

Parallelism parallelism(const Vec& a, const Vec& b) {
    const double bb = dot(b, b);
    const double na = norm2(a);
    if (bb == 0.0 || na == 0.0) return {0.0, bb == 0.0 && na == 0.0 ? 0.0 : 1.0};
    Parallelism p;
    p.ratio = dot(a, b) / bb;
    p.residual = norm2(axpy(-p.ratio, b, a)) / na;
    return p;
}

double dissipation_residual(const ContactSystem& sys, const Vec& y) {
    const Vec g = sys.gradient(y);
    const Vec v = lambda_vf(sys, y);
    const double h = sys.hamiltonian->eval(y);
    return dot(g, v) + sys.degree * h * g.back();
}

Comparison compare_reduced(const Trajectory& up, const AdaptedChart& chart, const Trajectory& down,
                           std::size_t grid) {
    if (!up.has_tau) throw ContractError("upstairs trajectory must be reparametrized before comparison");
    const Vec y0 = reduced_point(chart, up.front().x);
    double gap = 0.0;
    for (std::size_t i = 0; i < y0.size(); ++i) {
        double d = std::abs(y0[i] - down.front().x[i]);
        if (std::find(chart.periodic.begin(), chart.periodic.end(), i) != chart.periodic.end())
            d = std::abs(std::remainder(y0[i] - down.front().x[i], 2.0 * M_PI));
        gap = std::max(gap, d / std::max(1.0, std::abs(y0[i])));
    }
    if (gap > 1e-10) throw ContractError("initial points do not correspond through chart " + chart.id);
    ComparisonOptions opt;
    opt.grid = grid;
    opt.periodic = chart.periodic;
    return compare_trajectories(up, reduced_projection(chart), down, nullptr, opt);
}

} // namespace cr
