#include "cr/field.hpp"

#include <cmath>

namespace cr {

Dual1 ScalarField::eval_d1(const std::vector<Dual1>&) const {
    throw ContractError("scalar field is not differentiable by dual numbers");
}

Dual2 ScalarField::eval_d2(const std::vector<Dual2>&) const {
    throw ContractError("scalar field is not twice differentiable by dual numbers");
}

Vec ScalarField::gradient(const Vec& x) const {
    if (!differentiable()) return fd_gradient([this](const Vec& y) { return eval(y); }, x);
    Dual1 r = eval_d1(seed_gradient(x));
    r.d.resize(x.size(), 0.0);
    return r.d;
}

Mat ScalarField::hessian(const Vec& x) const {
    const std::size_t n = x.size();
    Mat h = Mat::Zero(n, n);
    if (!differentiable()) {
        // Differentiate the gradient once more.
        return fd_jacobian([this](const Vec& y) { return gradient(y); }, x, n);
    }
    Dual2 r = eval_d2(seed_hessian(x));
    for (std::size_t k = 0; k < r.d.size(); ++k)
        for (std::size_t i = 0; i < r.d[k].d.size(); ++i) h(i, k) = r.d[k].d[i];
    return h;
}

std::vector<Dual1> VectorField::eval_d1(const std::vector<Dual1>&) const {
    throw ContractError("vector field is not differentiable by dual numbers");
}

std::vector<Dual2> VectorField::eval_d2(const std::vector<Dual2>&) const {
    throw ContractError("vector field is not twice differentiable by dual numbers");
}

Mat VectorField::jacobian(const Vec& x) const {
    const std::size_t n = x.size(), m = dim_out();
    if (!differentiable()) return fd_jacobian([this](const Vec& y) { return eval(y); }, x, m);
    auto r = eval_d1(seed_gradient(x));
    Mat j = Mat::Zero(m, n);
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t i = 0; i < r[k].d.size(); ++i) j(k, i) = r[k].d[i];
    return j;
}

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x) {
    Vec g(x.size());
    Vec y = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = fd_step(x[i]);
        y[i] = x[i] + h;
        const double fp = f(y);
        y[i] = x[i] - h;
        const double fm = f(y);
        y[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, std::size_t m) {
    Mat j = Mat::Zero(m, x.size());
    Vec y = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = fd_step(x[i]);
        y[i] = x[i] + h;
        const Vec fp = f(y);
        y[i] = x[i] - h;
        const Vec fm = f(y);
        y[i] = x[i];
        for (std::size_t k = 0; k < m; ++k) j(k, i) = (fp[k] - fm[k]) / (2.0 * h);
    }
    return j;
}

namespace {

class PlainScalar final : public ScalarField {
public:
    PlainScalar(std::size_t n, std::function<double(const Vec&)> f) : n_(n), f_(std::move(f)) {}
    std::size_t dim() const override { return n_; }
    double eval(const Vec& x) const override { return f_(x); }

private:
    std::size_t n_;
    std::function<double(const Vec&)> f_;
};

class PlainVector final : public VectorField {
public:
    PlainVector(std::size_t n, std::size_t m, std::function<Vec(const Vec&)> f)
        : n_(n), m_(m), f_(std::move(f)) {}
    std::size_t dim_in() const override { return n_; }
    std::size_t dim_out() const override { return m_; }
    Vec eval(const Vec& x) const override { return f_(x); }

private:
    std::size_t n_, m_;
    std::function<Vec(const Vec&)> f_;
};

class ComposedScalar final : public ScalarField {
public:
    ComposedScalar(ScalarFieldPtr f, VectorFieldPtr g) : f_(std::move(f)), g_(std::move(g)) {}
    std::size_t dim() const override { return g_->dim_in(); }
    double eval(const Vec& x) const override { return f_->eval(g_->eval(x)); }
    bool differentiable() const override { return f_->differentiable() && g_->differentiable(); }
    Dual1 eval_d1(const std::vector<Dual1>& x) const override { return f_->eval_d1(g_->eval_d1(x)); }
    Dual2 eval_d2(const std::vector<Dual2>& x) const override { return f_->eval_d2(g_->eval_d2(x)); }

private:
    ScalarFieldPtr f_;
    VectorFieldPtr g_;
};

class ComposedVector final : public VectorField {
public:
    ComposedVector(VectorFieldPtr f, VectorFieldPtr g) : f_(std::move(f)), g_(std::move(g)) {}
    std::size_t dim_in() const override { return g_->dim_in(); }
    std::size_t dim_out() const override { return f_->dim_out(); }
    Vec eval(const Vec& x) const override { return f_->eval(g_->eval(x)); }
    bool differentiable() const override { return f_->differentiable() && g_->differentiable(); }
    std::vector<Dual1> eval_d1(const std::vector<Dual1>& x) const override {
        return f_->eval_d1(g_->eval_d1(x));
    }
    std::vector<Dual2> eval_d2(const std::vector<Dual2>& x) const override {
        return f_->eval_d2(g_->eval_d2(x));
    }

private:
    VectorFieldPtr f_, g_;
};

} // namespace

ScalarFieldPtr make_scalar_fd(std::size_t n, std::function<double(const Vec&)> f) {
    return std::make_shared<PlainScalar>(n, std::move(f));
}

VectorFieldPtr make_vector_fd(std::size_t n, std::size_t m, std::function<Vec(const Vec&)> f) {
    return std::make_shared<PlainVector>(n, m, std::move(f));
}

ScalarFieldPtr compose(ScalarFieldPtr f, VectorFieldPtr g) {
    if (f->dim() != g->dim_out()) throw ContractError("compose: dimension mismatch");
    return std::make_shared<ComposedScalar>(std::move(f), std::move(g));
}

VectorFieldPtr compose(VectorFieldPtr f, VectorFieldPtr g) {
    if (f->dim_in() != g->dim_out()) throw ContractError("compose: dimension mismatch");
    return std::make_shared<ComposedVector>(std::move(f), std::move(g));
}

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

Vec axpy(double a, const Vec& x, const Vec& y) {
    Vec r(y);
    for (std::size_t i = 0; i < x.size(); ++i) r[i] += a * x[i];
    return r;
}

Vec to_vec(const Eigen::VectorXd& v) { return Vec(v.data(), v.data() + v.size()); }

Eigen::VectorXd to_eigen(const Vec& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace cr
