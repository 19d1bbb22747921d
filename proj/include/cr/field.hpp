#pragma once

// Scalar and vector fields on coordinate spaces. A field is "differentiable" when it can be
// evaluated on dual numbers; otherwise gradients and Jacobians fall back to central differences.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "cr/dual.hpp"

namespace cr {

using Vec = std::vector<double>;
using Mat = Eigen::MatrixXd;

// Central-difference step used everywhere a finite difference is taken.
inline double fd_step(double x) { return 1e-6 * (std::abs(x) > 1.0 ? std::abs(x) : 1.0); }

class ScalarField {
public:
    virtual ~ScalarField() = default;

    virtual std::size_t dim() const = 0;
    virtual double eval(const Vec& x) const = 0;
    virtual bool differentiable() const { return false; }
    virtual Dual1 eval_d1(const std::vector<Dual1>& x) const;
    virtual Dual2 eval_d2(const std::vector<Dual2>& x) const;

    virtual Vec gradient(const Vec& x) const;
    Mat hessian(const Vec& x) const;

    template <class T> T at(const std::vector<T>& x) const {
        if constexpr (std::is_same_v<T, double>) return eval(x);
        else if constexpr (std::is_same_v<T, Dual1>) return eval_d1(x);
        else return eval_d2(x);
    }
};

class VectorField {
public:
    virtual ~VectorField() = default;

    virtual std::size_t dim_in() const = 0;
    virtual std::size_t dim_out() const = 0;
    virtual Vec eval(const Vec& x) const = 0;
    virtual bool differentiable() const { return false; }
    virtual std::vector<Dual1> eval_d1(const std::vector<Dual1>& x) const;
    virtual std::vector<Dual2> eval_d2(const std::vector<Dual2>& x) const;

    // Row k, column i holds d out_k / d x_i.
    virtual Mat jacobian(const Vec& x) const;

    template <class T> std::vector<T> at(const std::vector<T>& x) const {
        if constexpr (std::is_same_v<T, double>) return eval(x);
        else if constexpr (std::is_same_v<T, Dual1>) return eval_d1(x);
        else return eval_d2(x);
    }
};

using ScalarFieldPtr = std::shared_ptr<const ScalarField>;
using VectorFieldPtr = std::shared_ptr<const VectorField>;

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x);
Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, std::size_t m);

namespace detail {

template <class F>
class GenericScalar final : public ScalarField {
public:
    GenericScalar(std::size_t n, F f, std::function<Vec(const Vec&)> grad)
        : n_(n), f_(std::move(f)), grad_(std::move(grad)) {}
    std::size_t dim() const override { return n_; }
    double eval(const Vec& x) const override { return f_(x); }
    bool differentiable() const override { return true; }
    Dual1 eval_d1(const std::vector<Dual1>& x) const override { return f_(x); }
    Dual2 eval_d2(const std::vector<Dual2>& x) const override { return f_(x); }
    Vec gradient(const Vec& x) const override {
        return grad_ ? grad_(x) : ScalarField::gradient(x);
    }

private:
    std::size_t n_;
    F f_;
    std::function<Vec(const Vec&)> grad_;
};

template <class F>
class GenericVector final : public VectorField {
public:
    GenericVector(std::size_t n, std::size_t m, F f) : n_(n), m_(m), f_(std::move(f)) {}
    std::size_t dim_in() const override { return n_; }
    std::size_t dim_out() const override { return m_; }
    Vec eval(const Vec& x) const override { return f_(x); }
    bool differentiable() const override { return true; }
    std::vector<Dual1> eval_d1(const std::vector<Dual1>& x) const override { return f_(x); }
    std::vector<Dual2> eval_d2(const std::vector<Dual2>& x) const override { return f_(x); }

private:
    std::size_t n_, m_;
    F f_;
};

} // namespace detail

// f must be callable as template<class T> T f(const std::vector<T>&) for double, Dual1, Dual2.
template <class F>
ScalarFieldPtr make_scalar(std::size_t n, F f, std::function<Vec(const Vec&)> grad = {}) {
    return std::make_shared<detail::GenericScalar<F>>(n, std::move(f), std::move(grad));
}

// f must be callable as template<class T> std::vector<T> f(const std::vector<T>&).
template <class F>
VectorFieldPtr make_vector(std::size_t n, std::size_t m, F f) {
    return std::make_shared<detail::GenericVector<F>>(n, m, std::move(f));
}

// Value-only fields: derivatives by central differences.
ScalarFieldPtr make_scalar_fd(std::size_t n, std::function<double(const Vec&)> f);
VectorFieldPtr make_vector_fd(std::size_t n, std::size_t m, std::function<Vec(const Vec&)> f);

ScalarFieldPtr compose(ScalarFieldPtr f, VectorFieldPtr g);
VectorFieldPtr compose(VectorFieldPtr f, VectorFieldPtr g);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);
Vec axpy(double a, const Vec& x, const Vec& y); // a*x + y
Vec to_vec(const Eigen::VectorXd& v);
Eigen::VectorXd to_eigen(const Vec& v);

} // namespace cr
