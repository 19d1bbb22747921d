#include "cr/lifted.hpp"

#include <cmath>
#include <sstream>

namespace cr {

namespace {

void check_power_degree(const CouplingSpec& c) {
    if (c.degree == 1.0)
        throw ContractError("coupling " + c.name + " has degree 1 and cannot use the power form");
}

double alpha_of(const CouplingSpec& c, double target, CouplingForm form) {
    if (form == CouplingForm::Power) {
        check_power_degree(c);
        return (target - c.degree) / (1.0 - c.degree);
    }
    return target - c.degree;
}

} // namespace

double LiftedSystem::coordinate_of(std::size_t i, double value) const {
    if (form == CouplingForm::Linear) return value;
    if (value == 0.0) throw DomainError("coupling " + couplings[i].name + " must be nonzero in the power form");
    return std::pow(std::abs(value), 1.0 / (1.0 - couplings[i].degree));
}

Vec LiftedSystem::initial_state(const Vec& x) const {
    const std::size_t nn = n();
    if (x.size() != 2 * nn) throw ContractError("base point has the wrong length for " + system.id);
    Vec out(x.begin(), x.begin() + nn);
    for (const auto& c : couplings) out.push_back(c.momentum);
    out.insert(out.end(), x.begin() + nn, x.end());
    for (std::size_t i = 0; i < k(); ++i) out.push_back(coordinate_of(i, couplings[i].value));
    return out;
}

Vec LiftedSystem::base_point(const Vec& xl) const {
    const std::size_t nn = n(), kk = k();
    Vec x(xl.begin(), xl.begin() + nn);
    x.insert(x.end(), xl.begin() + nn + kk, xl.begin() + 2 * nn + kk);
    return x;
}

ScalingSymmetry lifted_scaling_symmetry(const ScalingSymmetry& d, const std::vector<CouplingSpec>& couplings,
                                        double target_degree, CouplingForm form) {
    Vec alpha, beta;
    for (const auto& c : couplings) {
        alpha.push_back(alpha_of(c, target_degree, form));
        beta.push_back(1.0 - alpha.back());
    }
    auto base = d.field;
    const std::size_t n = base->dim_in() / 2, k = couplings.size();
    ScalingSymmetry out;
    out.id = d.id + "^";
    out.degree = target_degree;
    out.field = make_vector(2 * (n + k), 2 * (n + k), [base, alpha, beta, n, k](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::value_type;
        std::vector<T> z(x.begin(), x.begin() + n);
        z.insert(z.end(), x.begin() + n + k, x.begin() + 2 * n + k);
        const std::vector<T> dz = base->at(z);
        std::vector<T> v;
        v.reserve(x.size());
        v.insert(v.end(), dz.begin(), dz.begin() + n);
        for (std::size_t i = 0; i < k; ++i) v.push_back(beta[i] * x[n + i]);
        v.insert(v.end(), dz.begin() + n, dz.end());
        for (std::size_t i = 0; i < k; ++i) v.push_back(alpha[i] * x[2 * n + k + i]);
        return v;
    });
    return out;
}

LiftedSystem lift(const SymplecticSystem& base, const ScalingSymmetry& d, std::vector<ScalarFieldPtr> terms,
                  std::vector<CouplingSpec> couplings, const LiftOptions& options) {
    if (terms.size() != couplings.size()) throw ContractError("lift needs one coupling per term");
    const std::size_t n = base.n_dof, k = terms.size();
    for (const auto& t : terms)
        if (t->dim() != 2 * n) throw ContractError("lifted term does not live on the base phase space");

    // Homogeneity of each term under D.
    SampleSpec spec;
    spec.blocks = base.sample_blocks();
    spec.count = options.samples;
    spec.seed = options.seed;
    const auto samples = sample_points(spec, base.guard, nullptr);
    std::ostringstream failures;
    bool failed = false;
    for (std::size_t i = 0; i < k; ++i) {
        double worst = 0.0;
        for (const Vec& x : samples) {
            const double h = terms[i]->eval(x);
            const double dh = dot(terms[i]->gradient(x), d.field->eval(x));
            worst = std::max(worst, std::abs(dh - couplings[i].degree * h) / std::max(1.0, std::abs(h)));
        }
        failures << " " << couplings[i].name << "=" << worst;
        failed = failed || worst > options.tol;
    }
    if (failed) throw ContractError("lifted terms are not homogeneous under " + d.id + ":" + failures.str());

    LiftedSystem l;
    l.base = base;
    l.base_symmetry = d;
    l.terms = terms;
    l.couplings = couplings;
    l.form = options.form;
    for (const auto& c : couplings) {
        l.coupling_weights.push_back(alpha_of(c, options.target_degree, options.form));
        l.momentum_weights.push_back(1.0 - l.coupling_weights.back());
        l.signs.push_back(c.value < 0.0 ? -1.0 : 1.0);
    }

    SymplecticSystem& s = l.system;
    s.id = base.id + "^lift";
    s.n_dof = n + k;
    const auto base_names = base.names.empty() ? darboux_names(n) : base.names;
    s.names.assign(base_names.begin(), base_names.begin() + n);
    for (const auto& c : couplings) s.names.push_back("b_" + c.name);
    s.names.insert(s.names.end(), base_names.begin() + n, base_names.end());
    for (const auto& c : couplings) s.names.push_back(c.name);
    for (const auto& c : couplings) s.params[c.name] = c.value;
    s.blocks = {n, k, n, k};

    Vec expo, signs = l.signs;
    for (const auto& c : couplings) expo.push_back(1.0 - c.degree);
    const bool power = options.form == CouplingForm::Power;
    s.hamiltonian = make_scalar(2 * (n + k), [terms, n, k, power, expo, signs](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::value_type;
        std::vector<T> z(x.begin(), x.begin() + n);
        z.insert(z.end(), x.begin() + n + k, x.begin() + 2 * n + k);
        T h(0.0);
        for (std::size_t i = 0; i < k; ++i) {
            const T& c = x[2 * n + k + i];
            if (power) {
                if (value_of(c) <= 0.0) throw DomainError("power-form coupling must stay positive");
                h = h + signs[i] * pow(c, expo[i]) * terms[i]->at(z);
            } else {
                h = h + c * terms[i]->at(z);
            }
        }
        return h;
    });
    const Guard bg = base.guard;
    s.guard = [bg, n, k, power](const Vec& x) {
        if (power)
            for (std::size_t i = 0; i < k; ++i)
                if (!(x[2 * n + k + i] > 0.0)) return false;
        if (!bg) return true;
        Vec z(x.begin(), x.begin() + n);
        z.insert(z.end(), x.begin() + n + k, x.begin() + 2 * n + k);
        return bg(z);
    };
    l.symmetry = lifted_scaling_symmetry(d, couplings, options.target_degree, options.form);
    return l;
}

Vec lifted_vf(const LiftedSystem& lifted, const Vec& x) { return symplectic_vf(lifted.system, x); }

AdaptedChart lift_chart(const AdaptedChart& base, const LiftedSystem& lifted) {
    const std::size_t n = lifted.n(), k = lifted.k(), n1 = n - 1;
    const Vec alpha = lifted.coupling_weights, beta = lifted.momentum_weights;
    auto fwd = base.forward;
    auto inv = base.inverse;
    AdaptedChart c;
    c.id = base.id + "^";
    c.n_dof = n + k;
    c.periodic = {};
    for (std::size_t i : base.periodic) c.periodic.push_back(i < n1 ? i : i + k);
    {
        auto names = base.reduced_names.empty() ? darboux_names(n1, true) : base.reduced_names;
        std::vector<std::string> r(names.begin(), names.begin() + n1);
        for (const auto& cp : lifted.couplings) r.push_back("b_" + cp.name);
        r.insert(r.end(), names.begin() + n1, names.begin() + 2 * n1);
        for (const auto& cp : lifted.couplings) r.push_back("pa_" + cp.name);
        r.push_back(names.back());
        c.reduced_names = std::move(r);
    }
    const Guard dom = base.domain;
    c.domain = [dom, n, k](const Vec& x) {
        if (!dom) return true;
        Vec z(x.begin(), x.begin() + n);
        z.insert(z.end(), x.begin() + n + k, x.begin() + 2 * n + k);
        return dom(z);
    };
    c.forward = make_vector(2 * (n + k), 2 * (n + k), [fwd, alpha, beta, n, k, n1](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::value_type;
        std::vector<T> z(x.begin(), x.begin() + n);
        z.insert(z.end(), x.begin() + n + k, x.begin() + 2 * n + k);
        const std::vector<T> bc = fwd->at(z);
        const T& rho = bc[0];
        if (value_of(rho) <= 0.0) throw DomainError("lifted chart needs a positive scaling function");
        std::vector<T> abar(k), bbar(k);
        T shift(0.0);
        for (std::size_t i = 0; i < k; ++i) {
            abar[i] = x[2 * n + k + i] / pow(rho, alpha[i]);
            bbar[i] = x[n + i] / pow(rho, beta[i]);
            shift = shift + beta[i] * abar[i] * bbar[i];
        }
        std::vector<T> out;
        out.reserve(x.size());
        out.push_back(rho);
        out.push_back(bc[1] - shift);
        out.insert(out.end(), bc.begin() + 2, bc.begin() + 2 + n1);
        out.insert(out.end(), bbar.begin(), bbar.end());
        out.insert(out.end(), bc.begin() + 2 + n1, bc.end());
        for (std::size_t i = 0; i < k; ++i) out.push_back(-abar[i]);
        return out;
    });
    c.inverse = make_vector(2 * (n + k), 2 * (n + k), [inv, alpha, beta, n, k, n1](const auto& cc) {
        using T = typename std::decay_t<decltype(cc)>::value_type;
        const T& rho = cc[0];
        if (value_of(rho) <= 0.0) throw DomainError("lifted chart needs a positive scaling function");
        T shift(0.0);
        std::vector<T> a(k), b(k);
        for (std::size_t i = 0; i < k; ++i) {
            const T abar = -cc[2 + n1 + k + n1 + i];
            const T& bbar = cc[2 + n1 + i];
            shift = shift + beta[i] * abar * bbar;
            a[i] = abar * pow(rho, alpha[i]);
            b[i] = bbar * pow(rho, beta[i]);
        }
        std::vector<T> bc;
        bc.reserve(2 * n);
        bc.push_back(rho);
        bc.push_back(cc[1] + shift);
        bc.insert(bc.end(), cc.begin() + 2, cc.begin() + 2 + n1);
        bc.insert(bc.end(), cc.begin() + 2 + n1 + k, cc.begin() + 2 + n1 + k + n1);
        const std::vector<T> z = inv->at(bc);
        std::vector<T> x(z.begin(), z.begin() + n);
        x.insert(x.end(), b.begin(), b.end());
        x.insert(x.end(), z.begin() + n, z.end());
        x.insert(x.end(), a.begin(), a.end());
        return x;
    });
    return c;
}

ScalingFunction lift_scaling_function(const ScalingFunction& rho, const LiftedSystem& lifted) {
    auto r = rho.rho;
    const std::size_t n = lifted.n(), k = lifted.k();
    ScalingFunction out;
    out.id = rho.id;
    out.rho = make_scalar(2 * (n + k), [r, n, k](const auto& x) {
        using T = typename std::decay_t<decltype(x)>::value_type;
        std::vector<T> z(x.begin(), x.begin() + n);
        z.insert(z.end(), x.begin() + n + k, x.begin() + 2 * n + k);
        return r->at(z);
    });
    return out;
}

ReducedContactSystem reduce_lifted(const LiftedSystem& lifted, const ScalingFunction& rho_hat,
                                   const AdaptedChart& chart_hat, const ReductionOptions& options) {
    return contact_reduce(lifted.system, lifted.symmetry, rho_hat, chart_hat, options);
}

Vec reduced_couplings(const LiftedSystem& lifted, const Vec& y) {
    const std::size_t n1 = lifted.n() - 1, k = lifted.k();
    Vec a(k);
    for (std::size_t i = 0; i < k; ++i) a[i] = -y[n1 + k + n1 + i];
    return a;
}

Vec dissipated_couplings(const LiftedSystem& lifted, const Vec& y) {
    Vec a = reduced_couplings(lifted, y);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double w = lifted.coupling_weights[i];
        if (w == 0.0) continue;
        const double s = a[i] < 0.0 ? -1.0 : 1.0;
        a[i] = s * std::pow(std::abs(a[i]), 1.0 / w);
    }
    return a;
}

double reeb_derivative(const ContactSystem& sys, const Vec& y) { return sys.gradient(y).back(); }

} // namespace cr
