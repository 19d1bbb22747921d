#include "cr/core.hpp"

#include <cmath>

namespace cr {

namespace {

void check_size(const Vec& x, std::size_t n, const std::string& id) {
    if (x.size() != n)
        throw ContractError("point of length " + std::to_string(x.size()) + " given to " + id +
                            " which expects " + std::to_string(n));
}

} // namespace

void require_finite(const Vec& v, const std::string& what) {
    for (double c : v)
        if (!std::isfinite(c)) throw NumericalError("non-finite value in " + what);
}

bool SymplecticSystem::admissible(const Vec& x) const {
    if (x.size() != dim()) return false;
    for (double c : x)
        if (!std::isfinite(c)) return false;
    return !guard || guard(x);
}

void SymplecticSystem::require_admissible(const Vec& x) const {
    check_size(x, dim(), id);
    if (!admissible(x)) throw DomainError("point outside the admissible region of " + id);
}

double SymplecticSystem::energy(const Vec& x) const {
    require_admissible(x);
    return hamiltonian->eval(x);
}

Vec SymplecticSystem::gradient(const Vec& x) const {
    require_admissible(x);
    Vec g = hamiltonian->gradient(x);
    require_finite(g, "gradient of " + id);
    return g;
}

std::vector<std::size_t> SymplecticSystem::sample_blocks() const {
    if (!blocks.empty()) return blocks;
    return {n_dof, n_dof};
}

bool ContactSystem::admissible(const Vec& x) const {
    if (x.size() != dim()) return false;
    for (double c : x)
        if (!std::isfinite(c)) return false;
    return !guard || guard(x);
}

void ContactSystem::require_admissible(const Vec& x) const {
    check_size(x, dim(), id);
    if (!admissible(x)) throw DomainError("point outside the admissible region of " + id);
}

double ContactSystem::energy(const Vec& x) const {
    require_admissible(x);
    return hamiltonian->eval(x);
}

Vec ContactSystem::gradient(const Vec& x) const {
    require_admissible(x);
    Vec g = hamiltonian->gradient(x);
    require_finite(g, "gradient of " + id);
    return g;
}

std::vector<std::string> darboux_names(std::size_t n, bool contact) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= n; ++i) names.push_back("q" + std::to_string(i));
    for (std::size_t i = 1; i <= n; ++i) names.push_back("p" + std::to_string(i));
    if (contact) names.emplace_back("S");
    return names;
}

Vec symplectic_vf(const SymplecticSystem& sys, const Vec& x) {
    const Vec g = sys.gradient(x);
    const std::size_t n = sys.n_dof;
    Vec v(2 * n);
    for (std::size_t a = 0; a < n; ++a) {
        v[a] = g[n + a];
        v[n + a] = -g[a];
    }
    return v;
}

Vec lambda_vf(const ContactSystem& sys, const Vec& x) {
    const Vec g = sys.gradient(x);
    const double k = sys.hamiltonian->eval(x);
    const std::size_t n = sys.n_dof;
    const double ks = g[2 * n];
    Vec v(2 * n + 1);
    double pkp = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        v[a] = g[n + a];
        v[n + a] = -g[a] - x[n + a] * ks;
        pkp += x[n + a] * g[n + a];
    }
    v[2 * n] = pkp - sys.degree * k;
    require_finite(v, "contact field of " + sys.id);
    return v;
}

Vec contact_vf(const ContactSystem& sys, const Vec& x) {
    if (sys.degree != 1.0)
        throw ContractError("contact_vf needs a degree one system, " + sys.id + " has degree " +
                            std::to_string(sys.degree) + "; use lambda_vf");
    return lambda_vf(sys, x);
}

namespace {

class HamiltonianField final : public VectorField {
public:
    explicit HamiltonianField(SymplecticSystem sys) : sys_(std::move(sys)) {}
    std::size_t dim_in() const override { return sys_.dim(); }
    std::size_t dim_out() const override { return sys_.dim(); }
    Vec eval(const Vec& x) const override { return symplectic_vf(sys_, x); }
    bool differentiable() const override { return sys_.hamiltonian->differentiable(); }

    std::vector<Dual1> eval_d1(const std::vector<Dual1>& x) const override {
        Vec xv(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) xv[i] = x[i].v;
        sys_.require_admissible(xv);
        Dual2 h = sys_.hamiltonian->eval_d2(promote(x));
        const std::size_t n = sys_.n_dof;
        h.d.resize(2 * n, Dual1(0.0));
        std::vector<Dual1> v(2 * n);
        for (std::size_t a = 0; a < n; ++a) {
            v[a] = h.d[n + a];
            v[n + a] = -h.d[a];
        }
        return v;
    }

    Mat jacobian(const Vec& x) const override {
        if (!differentiable()) return VectorField::jacobian(x);
        sys_.require_admissible(x);
        const Mat h = sys_.hamiltonian->hessian(x);
        const auto n = static_cast<Eigen::Index>(sys_.n_dof);
        Mat j(2 * n, 2 * n);
        j.topRows(n) = h.bottomRows(n);
        j.bottomRows(n) = -h.topRows(n);
        return j;
    }

private:
    SymplecticSystem sys_;
};

} // namespace

VectorFieldPtr hamiltonian_field(const SymplecticSystem& sys) {
    return std::make_shared<HamiltonianField>(sys);
}

Mat darboux_matrix(std::size_t n_dof) {
    const auto n = static_cast<Eigen::Index>(n_dof);
    Mat o = Mat::Zero(2 * n, 2 * n);
    for (Eigen::Index a = 0; a < n; ++a) {
        o(n + a, a) = 1.0;
        o(a, n + a) = -1.0;
    }
    return o;
}

double gradient_fd_deviation(const ScalarField& f, const std::vector<Vec>& points) {
    double worst = 0.0;
    for (const Vec& x : points) {
        const Vec g = f.gradient(x);
        const Vec fd = fd_gradient([&f](const Vec& y) { return f.eval(y); }, x);
        const double scale = std::max(1.0, norm_inf(g));
        for (std::size_t i = 0; i < g.size(); ++i)
            worst = std::max(worst, std::abs(g[i] - fd[i]) / scale);
    }
    return worst;
}

} // namespace cr
