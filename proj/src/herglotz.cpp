#include "cr/herglotz.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>

namespace cr {

namespace {

double condition_of(const Mat& a) {
    Eigen::JacobiSVD<Mat> svd(a);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return 1.0;
    const double lo = s(s.size() - 1);
    return lo > 0.0 ? s(0) / lo : std::numeric_limits<double>::infinity();
}

bool is_integer(double e) { return std::abs(e - std::round(e)) < 1e-14; }

// base^e for real bases, refusing negative bases with fractional exponents.
template <class T>
T signed_power(const T& base, double e, const char* what) {
    if (value_of(base) < 0.0 && !is_integer(e))
        throw DomainError(std::string(what) + ": negative base raised to a fractional power");
    if (value_of(base) == 0.0 && e < 0.0) throw DomainError(std::string(what) + ": zero base");
    return pow(base, e);
}

Mat block(const Mat& m, std::size_t r, std::size_t c, std::size_t rows, std::size_t cols) {
    return m.block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c),
                   static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

} // namespace

void HerglotzSystem::require_admissible(const Vec& x) const {
    if (x.size() != dim())
        throw ContractError("state of length " + std::to_string(x.size()) + " given to " + id +
                            " which expects " + std::to_string(dim()));
    for (double c : x)
        if (!std::isfinite(c)) throw DomainError("non-finite state given to " + id);
    if (guard && !guard(x)) throw DomainError("point outside the admissible region of " + id);
}

HerglotzSystem as_herglotz(const LagrangianSystem& sys) {
    HerglotzSystem h;
    h.id = sys.id;
    h.n = sys.n;
    h.names = sys.names;
    const std::size_t m = sys.dim();
    auto drop_s = make_vector(m + 1, m, [m](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::value_type;
        return std::vector<T>(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m));
    });
    h.lagrangian = compose(sys.lagrangian, drop_s);
    if (sys.guard) {
        Guard g = sys.guard;
        h.guard = [g, m](const Vec& x) { return g(Vec(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m))); };
    }
    return h;
}

double velocity_condition(const HerglotzSystem& sys, const Vec& x) {
    sys.require_admissible(x);
    return condition_of(block(sys.lagrangian->hessian(x), sys.n, sys.n, sys.n, sys.n));
}

double herglotz_energy(const HerglotzSystem& sys, const Vec& x) {
    sys.require_admissible(x);
    const Vec g = sys.lagrangian->gradient(x);
    double e = -sys.lagrangian->eval(x);
    for (std::size_t i = 0; i < sys.n; ++i) e += g[sys.n + i] * x[sys.n + i];
    return e;
}

Vec lambda_herglotz_rhs(const HerglotzSystem& sys, const Vec& x) {
    sys.require_admissible(x);
    const std::size_t n = sys.n;
    const auto ni = static_cast<Eigen::Index>(n);
    const double l = sys.lagrangian->eval(x);
    const Vec g = sys.lagrangian->gradient(x);
    const Mat h = sys.lagrangian->hessian(x);

    double pv = 0.0;
    for (std::size_t i = 0; i < n; ++i) pv += g[n + i] * x[n + i];
    const double sdot = l + (1.0 - sys.degree) * (pv - l);

    const Mat a = block(h, n, n, n, n);
    const double cond = condition_of(a);
    if (!(cond < 1e12)) {
        std::ostringstream msg;
        msg << "velocity Hessian of " << sys.id << " is singular (condition " << cond << ")";
        throw RegularityError(msg.str(), cond);
    }
    Eigen::VectorXd rhs(ni);
    for (std::size_t i = 0; i < n; ++i) {
        double r = g[2 * n] * g[n + i] + g[i] - h(static_cast<Eigen::Index>(n + i), static_cast<Eigen::Index>(2 * n)) * sdot;
        for (std::size_t j = 0; j < n; ++j)
            r -= h(static_cast<Eigen::Index>(n + i), static_cast<Eigen::Index>(j)) * x[n + j];
        rhs(static_cast<Eigen::Index>(i)) = r;
    }
    const Eigen::VectorXd acc = a.fullPivLu().solve(rhs);

    Vec out(2 * n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = x[n + i];
        out[n + i] = acc(static_cast<Eigen::Index>(i));
    }
    out[2 * n] = sdot;
    require_finite(out, "Herglotz field of " + sys.id);
    return out;
}

Vec herglotz_rhs(const HerglotzSystem& sys, const Vec& x) {
    if (sys.degree != 1.0)
        throw ContractError("herglotz_rhs needs a degree one system, " + sys.id + " has degree " +
                            std::to_string(sys.degree) + "; use lambda_herglotz_rhs");
    return lambda_herglotz_rhs(sys, x);
}

OdeProblem ode_problem(const HerglotzSystem& sys) {
    OdeProblem p;
    p.id = sys.id;
    p.dim = sys.dim();
    p.rhs = [sys](const Vec& x) { return lambda_herglotz_rhs(sys, x); };
    p.guard = sys.guard;
    p.n_dof = sys.n;
    return p;
}

Vec legendre_point(const HerglotzSystem& sys, const Vec& x) {
    sys.require_admissible(x);
    const Vec g = sys.lagrangian->gradient(x);
    Vec y = x;
    for (std::size_t i = 0; i < sys.n; ++i) y[sys.n + i] = g[sys.n + i];
    return y;
}

Vec inverse_legendre_point(const HerglotzSystem& sys, const Vec& y, const LegendreOptions& options) {
    const std::size_t n = sys.n;
    if (y.size() != sys.dim()) throw ContractError("contact point of wrong length given to " + sys.id);
    double pscale = 1.0;
    for (std::size_t i = 0; i < n; ++i) pscale = std::max(pscale, std::abs(y[n + i]));

    // Residual dL/dv - p, or empty when the state is not admissible.
    auto residual = [&](const Vec& x, Vec& r) {
        try {
            sys.require_admissible(x);
            const Vec g = sys.lagrangian->gradient(x);
            r.assign(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) r[i] = g[n + i] - y[n + i];
            return std::isfinite(norm_inf(r));
        } catch (const DomainError&) {
            return false;
        }
    };

    Vec x = y;
    Vec r;
    for (std::size_t i = 0; i < n; ++i) x[n + i] = 0.0;
    if (!residual(x, r)) {
        x = y;
        if (!residual(x, r)) throw DomainError("no admissible starting velocity for the Legendre inverse of " + sys.id);
    }

    double cond = 1.0;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        if (norm_inf(r) <= options.tol * pscale) return x;
        const Mat a = block(sys.lagrangian->hessian(x), n, n, n, n);
        cond = condition_of(a);
        if (!(cond < options.max_condition)) {
            std::ostringstream msg;
            msg << "Legendre map of " << sys.id << " is singular (condition " << cond << ")";
            throw RegularityError(msg.str(), cond);
        }
        const Eigen::VectorXd step = a.fullPivLu().solve(-to_eigen(r));
        double t = 1.0;
        bool moved = false;
        for (int half = 0; half < 40; ++half, t *= 0.5) {
            Vec trial = x;
            for (std::size_t i = 0; i < n; ++i) trial[n + i] += t * step(static_cast<Eigen::Index>(i));
            Vec rt;
            if (residual(trial, rt) && norm_inf(rt) < norm_inf(r)) {
                x = std::move(trial);
                r = std::move(rt);
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    if (norm_inf(r) <= 1e3 * options.tol * pscale) return x;
    std::ostringstream msg;
    msg << "Legendre inversion of " << sys.id << " did not converge (residual " << norm_inf(r) << ")";
    throw RegularityError(msg.str(), cond);
}

namespace {

class LegendreDual final : public ScalarField {
public:
    LegendreDual(HerglotzSystem sys, LegendreOptions options) : sys_(std::move(sys)), options_(options) {}
    std::size_t dim() const override { return sys_.dim(); }

    double eval(const Vec& y) const override {
        const Vec x = inverse_legendre_point(sys_, y, options_);
        double h = -sys_.lagrangian->eval(x);
        for (std::size_t i = 0; i < sys_.n; ++i) h += y[sys_.n + i] * x[sys_.n + i];
        return h;
    }

    // dH/dq = -dL/dq, dH/dp = v, dH/dS = -dL/dS at the solved velocity.
    Vec gradient(const Vec& y) const override {
        const Vec x = inverse_legendre_point(sys_, y, options_);
        const Vec g = sys_.lagrangian->gradient(x);
        const std::size_t n = sys_.n;
        Vec out(2 * n + 1);
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = -g[i];
            out[n + i] = x[n + i];
        }
        out[2 * n] = -g[2 * n];
        return out;
    }

private:
    HerglotzSystem sys_;
    LegendreOptions options_;
};

} // namespace

ContactSystem legendre_to_contact(const HerglotzSystem& sys, const LegendreOptions& options) {
    ContactSystem c;
    c.id = sys.id + "-legendre";
    c.n_dof = sys.n;
    c.degree = sys.degree;
    c.hamiltonian = sys.hamiltonian ? sys.hamiltonian : std::make_shared<LegendreDual>(sys, options);
    for (const auto& q : sys.names) c.names.push_back(q);
    for (const auto& q : sys.names) c.names.push_back("p_" + q);
    c.names.emplace_back("S");
    return c;
}

namespace {

double contract_lambda(const LagrangianSystem& sys, const VectorField& d, const Vec& x) {
    const Vec g = sys.lagrangian->gradient(x);
    const Vec dv = d.eval(x);
    double s = 0.0;
    for (std::size_t i = 0; i < sys.n; ++i) s += dv[i] * g[sys.n + i];
    return s;
}

} // namespace

BasicnessReport check_basic_symmetry(const LagrangianSystem& sys, const VectorField& d, double degree,
                                     const std::vector<Vec>& samples) {
    const std::size_t n = sys.n, m = 2 * n;
    if (d.dim_in() != m || d.dim_out() != m)
        throw ContractError("symmetry of " + sys.id + " must act on (q, v)");
    BasicnessReport rep;
    for (const Vec& x : samples) {
        const double l = sys.lagrangian->eval(x);
        const Vec g = sys.lagrangian->gradient(x);
        const Mat h = sys.lagrangian->hessian(x);
        const Vec dv = d.eval(x);
        const Mat jd = d.jacobian(x);

        rep.degree_residual = std::max(rep.degree_residual, std::abs(dot(g, dv) - degree * l) / std::max(1.0, std::abs(l)));

        Vec lam(m, 0.0);
        for (std::size_t j = 0; j < n; ++j) lam[j] = g[n + j];
        const double scale = std::max(1.0, norm_inf(lam));
        for (std::size_t j = 0; j < m; ++j) {
            double lie = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                if (j < n) lie += dv[i] * h(static_cast<Eigen::Index>(n + j), static_cast<Eigen::Index>(i));
                lie += lam[i] * jd(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
            rep.form_residual = std::max(rep.form_residual, std::abs(lie - lam[j]) / scale);
        }
        ++rep.samples;
    }
    return rep;
}

Vec reduced_herglotz_state(const LagrangianSystem& sys, const VectorField& d, const ConfigurationChart& chart,
                           double degree, const Vec& x) {
    const std::size_t n = sys.n;
    const Vec q(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
    const Vec c = chart.forward->eval(q);
    const Mat j = chart.forward->jacobian(q);
    const Eigen::VectorXd cv = j * Eigen::Map<const Eigen::VectorXd>(x.data() + n, static_cast<Eigen::Index>(n));
    const double rho = c[0];
    const double speed = std::pow(rho, 1.0 - degree);
    Vec y(2 * n - 1);
    for (std::size_t i = 1; i < n; ++i) {
        y[i - 1] = c[i];
        y[n - 1 + i - 1] = cv(static_cast<Eigen::Index>(i)) * speed;
    }
    y[2 * n - 2] = -contract_lambda(sys, d, x) / rho;
    return y;
}

HerglotzSystem lagrangian_scale_reduce(const LagrangianSystem& sys, const VectorFieldPtr& d,
                                       const ConfigurationChart& chart, double degree,
                                       const std::vector<Vec>& samples,
                                       const LagrangianReductionOptions& options) {
    const BasicnessReport rep = check_basic_symmetry(sys, *d, degree, samples);
    if (!(rep.degree_residual < options.tol) || !(rep.form_residual < options.tol)) {
        std::ostringstream msg;
        msg << "not a basic scaling symmetry of " << sys.id << ": degree residual " << rep.degree_residual
            << ", form residual " << rep.form_residual;
        throw ContractError(msg.str());
    }
    if (chart.n != sys.n) throw ContractError("configuration chart dimension does not match " + sys.id);

    const std::size_t n = sys.n, r = n - 1;
    const double tol = options.newton_tol;
    auto value = [sys, d, chart, n, r, tol](const Vec& y) {
        Vec c(n);
        c[0] = 1.0;
        for (std::size_t i = 0; i < r; ++i) c[1 + i] = y[i];
        const double s = y[2 * r];
        const Vec q = chart.inverse->eval(c);
        const Mat jinv = chart.inverse->jacobian(c);

        auto state = [&](double rdot) {
            Eigen::VectorXd cv(static_cast<Eigen::Index>(n));
            cv(0) = rdot;
            for (std::size_t i = 0; i < r; ++i) cv(static_cast<Eigen::Index>(1 + i)) = y[r + i];
            const Eigen::VectorXd v = jinv * cv;
            Vec x = q;
            for (std::size_t i = 0; i < n; ++i) x.push_back(v(static_cast<Eigen::Index>(i)));
            return x;
        };
        auto mismatch = [&](double rdot) { return -contract_lambda(sys, *d, state(rdot)) - s; };

        double rdot = 0.0;
        double f = mismatch(rdot);
        for (int it = 0; it < 60 && std::abs(f) > tol * std::max(1.0, std::abs(s)); ++it) {
            const double h = fd_step(rdot);
            const double slope = (mismatch(rdot + h) - mismatch(rdot - h)) / (2.0 * h);
            if (slope == 0.0 || !std::isfinite(slope))
                throw NumericalError("radial velocity of " + sys.id + " is not determined by S");
            rdot -= f / slope;
            f = mismatch(rdot);
        }
        if (!(std::abs(f) <= 1e3 * tol * std::max(1.0, std::abs(s))))
            throw NumericalError("radial velocity solve of " + sys.id + " did not converge");
        return -(sys.lagrangian->eval(state(rdot)) + rdot * s);
    };

    HerglotzSystem h;
    h.id = sys.id + "-reduced";
    h.n = r;
    h.degree = degree;
    h.names = chart.reduced_names;
    h.lagrangian = make_scalar_fd(2 * r + 1, value);
    return h;
}

LiftedLagrangian lift_lagrangian(const LagrangianSystem& base, std::vector<ScalarFieldPtr> terms, Vec degrees,
                                 std::vector<std::string> lift_names) {
    const std::size_t n = base.n, k = terms.size();
    if (degrees.size() != k) throw ContractError("lift_lagrangian needs one degree per term");
    for (double e : degrees)
        if (e == 0.0) throw ContractError("lift_lagrangian: degree zero terms cannot be lifted");
    for (const auto& t : terms)
        if (t->dim() != 2 * n) throw ContractError("lifted terms must act on (q, v) of " + base.id);
    if (lift_names.empty())
        for (std::size_t j = 0; j < k; ++j) lift_names.push_back("X" + std::to_string(j + 1));

    LiftedLagrangian out;
    out.base = base.lagrangian;
    out.terms = terms;
    out.degrees = degrees;
    out.n = n;

    bool smooth = base.lagrangian->differentiable();
    for (const auto& t : terms) smooth = smooth && t->differentiable();

    auto body = [base = base.lagrangian, terms, degrees, n, k](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::value_type;
        std::vector<T> qv;
        qv.reserve(2 * n);
        for (std::size_t i = 0; i < n; ++i) qv.push_back(x[i]);
        for (std::size_t i = 0; i < n; ++i) qv.push_back(x[n + k + i]);
        T total = base->at(qv);
        for (std::size_t j = 0; j < k; ++j) {
            const T& xdot = x[2 * n + k + j];
            total = total + xdot * signed_power(terms[j]->at(qv) / xdot, 1.0 / degrees[j], "lifted term");
        }
        return total;
    };

    LagrangianSystem& s = out.system;
    s.id = base.id + "-lifted";
    s.n = n + k;
    s.names = base.names;
    for (const auto& nm : lift_names) s.names.push_back(nm);
    if (smooth)
        s.lagrangian = make_scalar(2 * (n + k), body);
    else
        s.lagrangian = make_scalar_fd(2 * (n + k), [body](const Vec& x) { return body(x); });
    if (base.guard) {
        Guard g = base.guard;
        s.guard = [g, n, k](const Vec& x) {
            Vec qv(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
            qv.insert(qv.end(), x.begin() + static_cast<std::ptrdiff_t>(n + k),
                      x.begin() + static_cast<std::ptrdiff_t>(2 * n + k));
            return g(qv);
        };
    }
    return out;
}

Vec recovered_couplings(const LiftedLagrangian& lifted, const Vec& x) {
    const std::size_t n = lifted.n, k = lifted.k();
    Vec qv(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
    qv.insert(qv.end(), x.begin() + static_cast<std::ptrdiff_t>(n + k), x.begin() + static_cast<std::ptrdiff_t>(2 * n + k));
    Vec a(k);
    for (std::size_t j = 0; j < k; ++j) {
        const double e = lifted.degrees[j];
        const double ratio = x[2 * n + k + j] / lifted.terms[j]->eval(qv);
        a[j] = signed_power(ratio, 1.0 - 1.0 / e, "recovered coupling") / e;
    }
    return a;
}

LagrangianSystem coupled_lagrangian(const LiftedLagrangian& lifted, const Vec& couplings) {
    if (couplings.size() != lifted.k()) throw ContractError("one coupling per lifted term expected");
    const auto base = lifted.base;
    const auto terms = lifted.terms;
    bool smooth = base->differentiable();
    for (const auto& t : terms) smooth = smooth && t->differentiable();
    auto body = [base, terms, couplings](const auto& x) {
        auto total = base->at(x);
        for (std::size_t j = 0; j < terms.size(); ++j) total = total + couplings[j] * terms[j]->at(x);
        return total;
    };
    LagrangianSystem s;
    s.id = lifted.system.id + "-coupled";
    s.n = lifted.n;
    s.names.assign(lifted.system.names.begin(),
                   lifted.system.names.begin() + static_cast<std::ptrdiff_t>(lifted.n));
    const std::size_t m = 2 * lifted.n;
    if (smooth)
        s.lagrangian = make_scalar(m, body);
    else
        s.lagrangian = make_scalar_fd(m, [body](const Vec& x) { return body(x); });
    return s;
}

} // namespace cr
