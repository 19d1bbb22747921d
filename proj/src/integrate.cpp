#include "cr/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace cr {

OdeProblem ode_problem(const SymplecticSystem& sys) {
    OdeProblem p;
    p.id = sys.id;
    p.dim = sys.dim();
    p.rhs = [sys](const Vec& x) { return symplectic_vf(sys, x); };
    p.guard = sys.guard;
    p.separable = sys.separable;
    p.n_dof = sys.n_dof;
    return p;
}

OdeProblem ode_problem(const ContactSystem& sys) {
    OdeProblem p;
    p.id = sys.id;
    p.dim = sys.dim();
    p.rhs = [sys](const Vec& x) { return lambda_vf(sys, x); };
    p.guard = sys.guard;
    p.n_dof = sys.n_dof;
    return p;
}

Method parse_method(const std::string& name) {
    if (name == "rk45-adaptive" || name == "rk45") return Method::Rk45;
    if (name == "rk4-fixed" || name == "rk4") return Method::Rk4Fixed;
    if (name == "stormer-verlet") return Method::StormerVerlet;
    throw ContractError("unknown integration method '" + name + "'");
}

std::string method_name(Method m) {
    switch (m) {
    case Method::Rk45: return "rk45-adaptive";
    case Method::Rk4Fixed: return "rk4-fixed";
    case Method::StormerVerlet: return "stormer-verlet";
    }
    return "?";
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

Vec combo(const Vec& x, double h, std::initializer_list<std::pair<double, const Vec*>> terms) {
    Vec r = x;
    for (const auto& [c, k] : terms) {
        if (c == 0.0) continue;
        for (std::size_t i = 0; i < r.size(); ++i) r[i] += h * c * (*k)[i];
    }
    return r;
}

class Stepper {
public:
    Stepper(const OdeProblem& p, const IntegratorConfig& c) : p_(p), c_(c) {}

    Vec rhs(const Vec& x) const {
        if (p_.guard && !p_.guard(x)) throw DomainError("state left the admissible region of " + p_.id);
        Vec v = p_.rhs(x);
        require_finite(v, "right-hand side of " + p_.id);
        return v;
    }

    bool admissible(const Vec& x) const {
        for (double c : x)
            if (!std::isfinite(c)) return false;
        return !p_.guard || p_.guard(x);
    }

    // One Dormand-Prince step; returns the fifth-order state and fills the error estimate and the
    // derivative at the new state (first-same-as-last).
    Vec dopri(const Vec& x, const Vec& k1, double h, Vec& err, Vec& k7) const {
        Vec k2 = rhs(combo(x, h, {{a21, &k1}}));
        Vec k3 = rhs(combo(x, h, {{a31, &k1}, {a32, &k2}}));
        Vec k4 = rhs(combo(x, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        Vec k5 = rhs(combo(x, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        Vec k6 = rhs(combo(x, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        Vec y = combo(x, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        k7 = rhs(y);
        err.assign(x.size(), 0.0);
        for (std::size_t i = 0; i < x.size(); ++i)
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        return y;
    }

    Vec rk4(const Vec& x, const Vec& k1, double h) const {
        Vec k2 = rhs(combo(x, h, {{0.5, &k1}}));
        Vec k3 = rhs(combo(x, h, {{0.5, &k2}}));
        Vec k4 = rhs(combo(x, h, {{1.0, &k3}}));
        return combo(x, h, {{1.0 / 6, &k1}, {1.0 / 3, &k2}, {1.0 / 3, &k3}, {1.0 / 6, &k4}});
    }

    // Kick-drift-kick leapfrog; valid because the q-rate depends on p only and the p-rate on q only.
    Vec verlet(const Vec& x, const Vec& k1, double h) const {
        const std::size_t n = p_.n_dof;
        Vec y = x;
        for (std::size_t a = 0; a < n; ++a) y[n + a] += 0.5 * h * k1[n + a];
        Vec mid = rhs(y);
        for (std::size_t a = 0; a < n; ++a) y[a] += h * mid[a];
        Vec end = rhs(y);
        for (std::size_t a = 0; a < n; ++a) y[n + a] += 0.5 * h * end[n + a];
        return y;
    }

    Vec single(const Vec& x, const Vec& k1, double h) const {
        switch (c_.method) {
        case Method::Rk45: {
            Vec err, k7;
            return dopri(x, k1, h, err, k7);
        }
        case Method::Rk4Fixed: return rk4(x, k1, h);
        case Method::StormerVerlet: return verlet(x, k1, h);
        }
        return x;
    }

    double error_norm(const Vec& err, const Vec& x, const Vec& y) const {
        double s = 0.0;
        for (std::size_t i = 0; i < err.size(); ++i) {
            const double sc = c_.abs_tol + c_.rel_tol * std::max(std::abs(x[i]), std::abs(y[i]));
            s += (err[i] / sc) * (err[i] / sc);
        }
        return std::sqrt(s / static_cast<double>(err.size()));
    }

    // Starting step after Hairer, Norsett and Wanner, section II.4.
    double initial_step(const Vec& x, const Vec& f, double span) const {
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double sc = c_.abs_tol + c_.rel_tol * std::abs(x[i]);
            d0 += (x[i] / sc) * (x[i] / sc);
            d1 += (f[i] / sc) * (f[i] / sc);
        }
        d0 = std::sqrt(d0 / x.size());
        d1 = std::sqrt(d1 / x.size());
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min({h0, span, c_.max_step});
        try {
            Vec x1 = combo(x, h0, {{1.0, &f}});
            Vec f1 = rhs(x1);
            double d2 = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double sc = c_.abs_tol + c_.rel_tol * std::abs(x[i]);
                d2 += ((f1[i] - f[i]) / sc) * ((f1[i] - f[i]) / sc);
            }
            d2 = std::sqrt(d2 / x.size()) / h0;
            const double m = std::max(d1, d2);
            const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
            return std::min({100 * h0, h1, span, c_.max_step});
        } catch (const Error&) {
            return h0;
        }
    }

private:
    const OdeProblem& p_;
    const IntegratorConfig& c_;
};

Sample make_sample(double t, Vec x, Vec dx) {
    Sample s;
    s.t = t;
    s.tau = t;
    s.x = std::move(x);
    s.dx = std::move(dx);
    return s;
}

// Index of the first event below its threshold at x, or -1.
int triggered(const std::vector<Event>& events, const Vec& x) {
    for (std::size_t i = 0; i < events.size(); ++i)
        if (events[i].value(x) < events[i].threshold) return static_cast<int>(i);
    return -1;
}

} // namespace

Trajectory integrate(const OdeProblem& problem, const Vec& x0, double t0, double t1,
                     const IntegratorConfig& config) {
    if (x0.size() != problem.dim)
        throw ContractError("initial state has length " + std::to_string(x0.size()) + ", " + problem.id +
                            " expects " + std::to_string(problem.dim));
    if (!(t1 >= t0)) throw ContractError("integration span must satisfy t1 >= t0");
    if (config.method == Method::StormerVerlet && !problem.separable)
        throw ContractError("stormer-verlet needs a separable Hamiltonian; " + problem.id + " is not");
    if (config.method != Method::Rk45 && !(config.step > 0.0))
        throw ContractError("fixed-step methods need a positive step");

    Stepper st(problem, config);
    if (!st.admissible(x0)) throw DomainError("initial state outside the admissible region of " + problem.id);

    Trajectory traj;
    traj.system_id = problem.id;
    traj.method = method_name(config.method);
    traj.samples.push_back(make_sample(t0, x0, st.rhs(x0)));
    if (int e = triggered(config.events, x0); e >= 0) {
        traj.stop_reason = "event";
        traj.stop_event = config.events[e].name;
        return traj;
    }

    const double span = t1 - t0;
    if (span == 0.0) {
        traj.stop_reason = "span_end";
        return traj;
    }

    // Bisect the step length for the first time an event fires, using fresh single steps.
    auto locate_event = [&](const Sample& from, double h_hi, int which) {
        double lo = 0.0, hi = h_hi;
        Vec x_hi = st.single(from.x, from.dx, hi);
        while (hi - lo > config.event_tol) {
            const double mid = 0.5 * (lo + hi);
            Vec xm = st.single(from.x, from.dx, mid);
            if (triggered(config.events, xm) >= 0) {
                hi = mid;
                x_hi = std::move(xm);
            } else {
                lo = mid;
            }
        }
        Sample s = make_sample(from.t + hi, x_hi, st.rhs(x_hi));
        traj.samples.push_back(std::move(s));
        traj.stop_reason = "event";
        traj.stop_event = config.events[which].name;
    };

    auto fail = [&](const char* reason, const std::string& message) {
        traj.stop_reason = reason;
        traj.stop_message = message;
    };

    if (config.method != Method::Rk45) {
        const auto steps = std::max<long long>(1, std::llround(span / config.step));
        const double h = span / static_cast<double>(steps);
        for (long long k = 0; k < steps; ++k) {
            if (static_cast<std::size_t>(k) >= config.max_steps) {
                fail("max_steps", "step limit reached");
                return traj;
            }
            const Sample& cur = traj.samples.back();
            Vec y;
            Vec dy;
            try {
                y = st.single(cur.x, cur.dx, h);
                if (!st.admissible(y)) throw DomainError("state left the admissible region of " + problem.id);
                dy = st.rhs(y);
            } catch (const DomainError& e) {
                fail("guard", e.what());
                return traj;
            } catch (const NumericalError& e) {
                fail("numerical_failure", e.what());
                return traj;
            }
            if (int e = triggered(config.events, y); e >= 0) {
                locate_event(traj.samples.back(), h, e);
                return traj;
            }
            const double t = k + 1 == steps ? t1 : t0 + static_cast<double>(k + 1) * h;
            traj.samples.push_back(make_sample(t, std::move(y), std::move(dy)));
        }
        traj.stop_reason = "span_end";
        return traj;
    }

    const Sample& first = traj.samples.front();
    double h = st.initial_step(first.x, first.dx, span);
    std::size_t steps = 0;
    std::string last_failure;
    bool last_domain = true;
    while (true) {
        const Sample& cur = traj.samples.back();
        const double remaining = t1 - cur.t;
        if (remaining <= 0.0) break;
        if (steps++ >= config.max_steps) {
            fail("max_steps", "step limit reached");
            return traj;
        }
        const bool last = h >= remaining * (1.0 - 1e-12);
        const double step = last ? remaining : h;
        const double h_min = 1e-14 * std::max(1.0, std::abs(cur.t));
        if (step < h_min && !last) {
            if (last_domain) fail("guard", last_failure);
            else fail("numerical_failure", last_failure);
            return traj;
        }
        Vec err, k7, y;
        try {
            y = st.dopri(cur.x, cur.dx, step, err, k7);
        } catch (const DomainError& e) {
            last_failure = e.what();
            last_domain = true;
            h = 0.25 * step;
            continue;
        } catch (const NumericalError& e) {
            last_failure = e.what();
            last_domain = false;
            h = 0.25 * step;
            continue;
        }
        const double en = st.error_norm(err, cur.x, y);
        if (!std::isfinite(en)) {
            last_failure = "non-finite error estimate";
            last_domain = false;
            h = 0.25 * step;
            continue;
        }
        if (en > 1.0) {
            h = step * std::max(0.2, 0.9 * std::pow(en, -0.2));
            continue;
        }
        if (int e = triggered(config.events, y); e >= 0) {
            locate_event(cur, step, e);
            return traj;
        }
        const double t = last ? t1 : cur.t + step;
        traj.samples.push_back(make_sample(t, std::move(y), std::move(k7)));
        const double grow = en == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2)));
        h = std::min(step * grow, config.max_step);
        if (last) break;
    }
    traj.stop_reason = "span_end";
    return traj;
}

Trajectory reparametrize(Trajectory traj, const ScalarField& rho, double degree) {
    if (traj.samples.empty()) return traj;
    const double e = degree - 1.0;
    const bool integer_power = e == std::round(e);
    double sign = 0.0;
    // g = rho^(degree-1) and its time derivative along the flow.
    auto rate = [&](const Sample& s, double& g, double& gdot) {
        const double r = rho.eval(s.x);
        if (r == 0.0) throw DomainError("scaling function vanishes along the trajectory");
        const double sg = r > 0.0 ? 1.0 : -1.0;
        if (sign == 0.0) sign = sg;
        if (sg != sign) throw DomainError("scaling function changes sign along the trajectory");
        if (r < 0.0 && !integer_power)
            throw DomainError("non-integer power of a negative scaling function");
        g = std::pow(r, e);
        gdot = e == 0.0 ? 0.0 : e * std::pow(r, e - 1.0) * dot(rho.gradient(s.x), s.dx);
    };
    double g0 = 0.0, gd0 = 0.0;
    rate(traj.samples[0], g0, gd0);
    traj.samples[0].tau = 0.0;
    traj.samples[0].dtau_dt = g0;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        double g1 = 0.0, gd1 = 0.0;
        rate(traj.samples[i], g1, gd1);
        const double h = traj.samples[i].t - traj.samples[i - 1].t;
        traj.samples[i].tau = traj.samples[i - 1].tau + 0.5 * h * (g0 + g1) + h * h / 12.0 * (gd0 - gd1);
        traj.samples[i].dtau_dt = g1;
        g0 = g1;
        gd0 = gd1;
    }
    traj.has_tau = true;
    return traj;
}

std::size_t Interpolant::segment(double at) const {
    if (s.size() < 2) throw ContractError("interpolation needs at least two samples");
    const bool increasing = s.back() >= s.front();
    auto it = increasing ? std::upper_bound(s.begin(), s.end(), at)
                         : std::upper_bound(s.begin(), s.end(), at, std::greater<double>());
    std::size_t i = it == s.begin() ? 0 : static_cast<std::size_t>(it - s.begin()) - 1;
    return std::min(i, s.size() - 2);
}

Vec Interpolant::operator()(double at) const {
    if (s.size() == 1) return y[0];
    const std::size_t i = segment(at);
    const double h = s[i + 1] - s[i];
    const double u = h == 0.0 ? 0.0 : (at - s[i]) / h;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
    const double h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u);
    const double h11 = u * u * (u - 1);
    Vec r(y[i].size());
    for (std::size_t k = 0; k < r.size(); ++k)
        r[k] = h00 * y[i][k] + h10 * h * dy[i][k] + h01 * y[i + 1][k] + h11 * h * dy[i + 1][k];
    return r;
}

Vec Interpolant::derivative(double at) const {
    if (s.size() == 1) return dy[0];
    const std::size_t i = segment(at);
    const double h = s[i + 1] - s[i];
    if (h == 0.0) return dy[i];
    const double u = (at - s[i]) / h;
    const double d00 = 6 * u * (u - 1) / h;
    const double d10 = (1 - u) * (1 - 3 * u);
    const double d01 = -d00;
    const double d11 = u * (3 * u - 2);
    Vec r(y[i].size());
    for (std::size_t k = 0; k < r.size(); ++k)
        r[k] = d00 * y[i][k] + d10 * dy[i][k] + d01 * y[i + 1][k] + d11 * dy[i + 1][k];
    return r;
}

Interpolant Interpolant::of(const Trajectory& traj, bool use_tau) {
    Interpolant ip;
    const bool tau = use_tau && traj.has_tau;
    for (const Sample& smp : traj.samples) {
        ip.s.push_back(tau ? smp.tau : smp.t);
        ip.y.push_back(smp.x);
        Vec rate = smp.dx;
        if (tau)
            for (double& r : rate) r /= smp.dtau_dt;
        ip.dy.push_back(std::move(rate));
    }
    return ip;
}

namespace {

// Project a trajectory into the compared coordinates with derivatives in tau.
Interpolant project(const Trajectory& traj, const VectorFieldPtr& p, const std::vector<std::size_t>& periodic) {
    Interpolant ip;
    for (const Sample& s : traj.samples) {
        const double param = traj.has_tau ? s.tau : s.t;
        const double dt_dtau = traj.has_tau ? 1.0 / s.dtau_dt : 1.0;
        Vec rate = s.dx;
        for (double& r : rate) r *= dt_dtau;
        ip.s.push_back(param);
        if (p) {
            ip.y.push_back(p->eval(s.x));
            ip.dy.push_back(to_vec(p->jacobian(s.x) * to_eigen(rate)));
        } else {
            ip.y.push_back(s.x);
            ip.dy.push_back(rate);
        }
    }
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t k : periodic) {
        for (std::size_t i = 1; i < ip.y.size(); ++i) {
            const double jump = ip.y[i][k] - ip.y[i - 1][k];
            ip.y[i][k] -= two_pi * std::round(jump / two_pi);
        }
    }
    return ip;
}

} // namespace

Comparison compare_trajectories(const Trajectory& a, const VectorFieldPtr& pa, const Trajectory& b,
                                const VectorFieldPtr& pb, const ComparisonOptions& options) {
    if (a.samples.empty() || b.samples.empty()) throw ContractError("cannot compare empty trajectories");
    Interpolant ia = project(a, pa, options.periodic);
    Interpolant ib = project(b, pb, options.periodic);
    if (ia.y[0].size() != ib.y[0].size())
        throw ContractError("compared trajectories project to different dimensions");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t k : options.periodic) {
        const double shift = two_pi * std::round((ib.y[0][k] - ia.y[0][k]) / two_pi);
        for (auto& y : ib.y) y[k] -= shift;
    }
    auto range = [](const Interpolant& ip) {
        return std::pair{std::min(ip.s.front(), ip.s.back()), std::max(ip.s.front(), ip.s.back())};
    };
    const auto [alo, ahi] = range(ia);
    const auto [blo, bhi] = range(ib);
    Comparison c;
    c.tau_begin = std::max(alo, blo);
    c.tau_end = std::min(ahi, bhi);
    if (c.tau_end < c.tau_begin) throw ContractError("trajectory parameter ranges do not overlap");
    c.per_coordinate.assign(ia.y[0].size(), 0.0);
    const std::size_t n = std::max<std::size_t>(2, options.grid);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = c.tau_begin + (c.tau_end - c.tau_begin) * static_cast<double>(i) / (n - 1);
        const Vec ya = ia(s);
        const Vec yb = ib(s);
        for (std::size_t k = 0; k < ya.size(); ++k) {
            c.per_coordinate[k] = std::max(c.per_coordinate[k], std::abs(ya[k] - yb[k]));
            c.sup = std::max(c.sup, c.per_coordinate[k]);
        }
    }
    return c;
}

namespace {

// Dense polyline through the projected curve with its cumulative arc length.
struct Polyline {
    std::vector<Vec> points;
    std::vector<double> length;

    Vec at(double s) const {
        const auto it = std::upper_bound(length.begin(), length.end(), s);
        if (it == length.begin()) return points.front();
        if (it == length.end()) return points.back();
        const std::size_t i = static_cast<std::size_t>(it - length.begin()) - 1;
        const double h = length[i + 1] - length[i];
        const double u = h > 0.0 ? (s - length[i]) / h : 0.0;
        return axpy(u, axpy(-1.0, points[i], points[i + 1]), points[i]);
    }
};

Polyline polyline(const Interpolant& ip, std::size_t dense) {
    Polyline p;
    const double lo = ip.s.front(), hi = ip.s.back();
    const std::size_t n = std::max<std::size_t>(2, dense);
    for (std::size_t i = 0; i < n; ++i) {
        p.points.push_back(ip(lo + (hi - lo) * static_cast<double>(i) / (n - 1)));
        p.length.push_back(i == 0 ? 0.0 : p.length.back() + norm2(axpy(-1.0, p.points[i - 1], p.points.back())));
    }
    return p;
}

} // namespace

Comparison compare_orbits(const Trajectory& a, const VectorFieldPtr& pa, const Trajectory& b, const VectorFieldPtr& pb,
                          const ComparisonOptions& options, std::size_t dense) {
    if (a.samples.empty() || b.samples.empty()) throw ContractError("cannot compare empty trajectories");
    const Polyline la = polyline(project(a, pa, options.periodic), dense);
    const Polyline lb = polyline(project(b, pb, options.periodic), dense);
    if (la.points[0].size() != lb.points[0].size())
        throw ContractError("compared orbits project to different dimensions");
    Comparison c;
    c.tau_end = std::min(la.length.back(), lb.length.back());
    c.per_coordinate.assign(la.points[0].size(), 0.0);
    const std::size_t n = std::max<std::size_t>(2, options.grid);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = c.tau_end * static_cast<double>(i) / (n - 1);
        const Vec ya = la.at(s), yb = lb.at(s);
        for (std::size_t k = 0; k < ya.size(); ++k) {
            c.per_coordinate[k] = std::max(c.per_coordinate[k], std::abs(ya[k] - yb[k]));
            c.sup = std::max(c.sup, c.per_coordinate[k]);
        }
    }
    return c;
}

double first_integral_drift(const Trajectory& traj, const std::function<double(const Vec&)>& f) {
    if (traj.samples.empty()) return 0.0;
    const double f0 = f(traj.samples.front().x);
    double worst = 0.0;
    for (const Sample& s : traj.samples) worst = std::max(worst, std::abs(f(s.x) - f0));
    return worst;
}

void annotate(Trajectory& traj, const std::string& name, const std::function<double(const Vec&)>& f) {
    traj.diag_names.push_back(name);
    for (Sample& s : traj.samples) {
        s.diag.resize(traj.diag_names.size() - 1);
        s.diag.push_back(f(s.x));
    }
}

void write_csv(std::ostream& out, const Trajectory& traj) {
    std::vector<std::string> header{"t"};
    if (traj.has_tau) header.emplace_back("tau");
    const std::size_t dim = traj.samples.empty() ? traj.names.size() : traj.samples[0].x.size();
    for (std::size_t i = 0; i < dim; ++i)
        header.push_back(i < traj.names.size() ? traj.names[i] : "x" + std::to_string(i + 1));
    header.insert(header.end(), traj.diag_names.begin(), traj.diag_names.end());
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    char buf[40];
    auto put = [&](double v, bool first) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        if (!first) out << ',';
        out << buf;
    };
    for (const Sample& s : traj.samples) {
        put(s.t, true);
        if (traj.has_tau) put(s.tau, false);
        for (double v : s.x) put(v, false);
        for (double v : s.diag) put(v, false);
        out << '\n';
    }
}

} // namespace cr
