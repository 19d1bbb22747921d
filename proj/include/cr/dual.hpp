#pragma once

// Forward-mode dual numbers with a dynamic partials vector.
// Dual<double> carries a gradient, Dual<Dual<double>> a gradient and a Hessian.
// An empty partials vector means "all zero", so constants cost nothing.

#include <cmath>
#include <cstddef>
#include <type_traits>
#include <vector>

#include "cr/errors.hpp"

namespace cr {

using std::abs;
using std::atan2;
using std::cos;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sqrt;

template <class T>
struct Dual {
    T v{};
    std::vector<T> d;

    Dual() = default;
    Dual(double c) : v(c) {} // NOLINT: constants convert implicitly
    Dual(T value, std::vector<T> partials) : v(std::move(value)), d(std::move(partials)) {}
    template <class U = T, class = std::enable_if_t<!std::is_same_v<U, double>>>
    Dual(const U& value) : v(value) {} // NOLINT
};

using Dual1 = Dual<double>;
using Dual2 = Dual<Dual<double>>;

template <class T> struct is_dual : std::false_type {};
template <class T> struct is_dual<Dual<T>> : std::true_type {};
template <class T> inline constexpr bool is_dual_v = is_dual<T>::value;

inline double value_of(double x) { return x; }
template <class T> double value_of(const Dual<T>& x) { return value_of(x.v); }

namespace detail {

// r = a.d * ca + b.d * cb, treating missing entries as zero.
template <class T>
std::vector<T> lin(const std::vector<T>& a, const T& ca, const std::vector<T>& b, const T& cb) {
    const std::size_t n = a.size() > b.size() ? a.size() : b.size();
    std::vector<T> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i < a.size() && i < b.size())
            r[i] = a[i] * ca + b[i] * cb;
        else if (i < a.size())
            r[i] = a[i] * ca;
        else
            r[i] = b[i] * cb;
    }
    return r;
}

template <class T>
std::vector<T> scale(const std::vector<T>& a, const T& c) {
    std::vector<T> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * c;
    return r;
}

// Chain rule for a unary function with derivative fp at a.v.
template <class T>
Dual<T> chain(const Dual<T>& a, T fv, const T& fp) {
    return Dual<T>(std::move(fv), scale(a.d, fp));
}

} // namespace detail

template <class T> Dual<T> operator+(const Dual<T>& a) { return a; }
template <class T> Dual<T> operator-(const Dual<T>& a) {
    return Dual<T>(-a.v, detail::scale(a.d, T(-1.0)));
}

template <class T> Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
    return Dual<T>(a.v + b.v, detail::lin(a.d, T(1.0), b.d, T(1.0)));
}
template <class T> Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
    return Dual<T>(a.v - b.v, detail::lin(a.d, T(1.0), b.d, T(-1.0)));
}
template <class T> Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
    return Dual<T>(a.v * b.v, detail::lin(a.d, b.v, b.d, a.v));
}
template <class T> Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    T inv = T(1.0) / b.v;
    T q = a.v * inv;
    return Dual<T>(q, detail::lin(a.d, inv, b.d, -q * inv));
}

template <class T> Dual<T> operator+(const Dual<T>& a, double c) { return Dual<T>(a.v + c, a.d); }
template <class T> Dual<T> operator+(double c, const Dual<T>& a) { return Dual<T>(a.v + c, a.d); }
template <class T> Dual<T> operator-(const Dual<T>& a, double c) { return Dual<T>(a.v - c, a.d); }
template <class T> Dual<T> operator-(double c, const Dual<T>& a) {
    return Dual<T>(c - a.v, detail::scale(a.d, T(-1.0)));
}
template <class T> Dual<T> operator*(const Dual<T>& a, double c) {
    return Dual<T>(a.v * c, detail::scale(a.d, T(c)));
}
template <class T> Dual<T> operator*(double c, const Dual<T>& a) { return a * c; }
template <class T> Dual<T> operator/(const Dual<T>& a, double c) { return a * (1.0 / c); }
template <class T> Dual<T> operator/(double c, const Dual<T>& a) { return Dual<T>(c) / a; }

template <class T> Dual<T>& operator+=(Dual<T>& a, const Dual<T>& b) { return a = a + b; }
template <class T> Dual<T>& operator-=(Dual<T>& a, const Dual<T>& b) { return a = a - b; }
template <class T> Dual<T>& operator*=(Dual<T>& a, const Dual<T>& b) { return a = a * b; }
template <class T> Dual<T>& operator/=(Dual<T>& a, const Dual<T>& b) { return a = a / b; }
template <class T> Dual<T>& operator+=(Dual<T>& a, double c) { return a = a + c; }
template <class T> Dual<T>& operator-=(Dual<T>& a, double c) { return a = a - c; }
template <class T> Dual<T>& operator*=(Dual<T>& a, double c) { return a = a * c; }
template <class T> Dual<T>& operator/=(Dual<T>& a, double c) { return a = a / c; }

template <class T> Dual<T> sqrt(const Dual<T>& a) {
    T s = sqrt(a.v);
    return detail::chain(a, s, T(0.5) / s);
}
template <class T> Dual<T> exp(const Dual<T>& a) {
    T e = exp(a.v);
    return detail::chain(a, e, e);
}
template <class T> Dual<T> log(const Dual<T>& a) { return detail::chain(a, log(a.v), T(1.0) / a.v); }
template <class T> Dual<T> sin(const Dual<T>& a) { return detail::chain(a, sin(a.v), cos(a.v)); }
template <class T> Dual<T> cos(const Dual<T>& a) { return detail::chain(a, cos(a.v), -sin(a.v)); }

// The derivative of |x| is sign(x); it does not exist at 0.
template <class T> Dual<T> abs(const Dual<T>& a) {
    const double x = value_of(a.v);
    if (x == 0.0) {
        for (const auto& di : a.d)
            if (value_of(di) != 0.0) throw DomainError("derivative of abs at 0");
        return a;
    }
    return x > 0.0 ? a : -a;
}

template <class T> Dual<T> pow(const Dual<T>& a, double c) {
    if (c == 0.0) return Dual<T>(T(1.0));
    if (c == 1.0) return a;
    if (c == 2.0) return a * a;
    T p = pow(a.v, c);
    return detail::chain(a, p, T(c) * pow(a.v, c - 1.0));
}
template <class T> Dual<T> pow(const Dual<T>& a, int k) { return pow(a, static_cast<double>(k)); }
template <class T> Dual<T> pow(const Dual<T>& a, const Dual<T>& b) { return exp(b * log(a)); }
template <class T> Dual<T> pow(double c, const Dual<T>& b) { return exp(b * std::log(c)); }

template <class T> Dual<T> atan2(const Dual<T>& y, const Dual<T>& x) {
    T r2 = x.v * x.v + y.v * y.v;
    return Dual<T>(atan2(y.v, x.v), detail::lin(y.d, x.v / r2, x.d, -y.v / r2));
}

template <class X> X sq(const X& x) { return x * x; }

// Seed a point for gradient evaluation: partial i of coordinate i is 1.
inline std::vector<Dual1> seed_gradient(const std::vector<double>& x) {
    std::vector<Dual1> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        r[i].v = x[i];
        r[i].d.assign(x.size(), 0.0);
        r[i].d[i] = 1.0;
    }
    return r;
}

// Seed a point for gradient and Hessian evaluation.
inline std::vector<Dual2> seed_hessian(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<Dual2> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> e(n, 0.0);
        e[i] = 1.0;
        r[i].v = Dual1(x[i], e);
        r[i].d.assign(n, Dual1(0.0));
        r[i].d[i] = Dual1(1.0);
    }
    return r;
}

// Lift a Dual1 point to Dual2 so that a first-order result can be differentiated once more.
// The inner partials carry the original seed, the outer ones are seeded fresh.
inline std::vector<Dual2> promote(const std::vector<Dual1>& x) {
    const std::size_t n = x.size();
    std::vector<Dual2> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        r[i].v = x[i];
        r[i].d.assign(n, Dual1(0.0));
        r[i].d[i] = Dual1(1.0);
    }
    return r;
}

} // namespace cr
