#pragma once

// Phase-space systems and their vector fields in Darboux coordinates.
// Conventions: omega = dp ^ dq, i_{X_H} omega = -dH, eta = dS - p.dq, Reeb field = d/dS.
// Symplectic points are laid out (q_1..q_n, p_1..p_n); contact points append S.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cr/field.hpp"

namespace cr {

using Guard = std::function<bool(const Vec&)>;

struct SymplecticSystem {
    std::string id;
    std::size_t n_dof = 0;
    ScalarFieldPtr hamiltonian;
    std::vector<std::string> names;
    std::map<std::string, double> params;
    Guard guard;
    // Coordinate block sizes used when drawing sample points; defaults to {n, n}.
    std::vector<std::size_t> blocks;
    // H = T(p) + V(q); enables the Stormer-Verlet integrator.
    bool separable = false;

    std::size_t dim() const { return 2 * n_dof; }
    bool admissible(const Vec& x) const;
    void require_admissible(const Vec& x) const;
    double energy(const Vec& x) const;
    Vec gradient(const Vec& x) const;
    std::vector<std::size_t> sample_blocks() const;
};

struct ContactSystem {
    std::string id;
    std::size_t n_dof = 0;
    ScalarFieldPtr hamiltonian;
    double degree = 1.0;
    std::vector<std::string> names;
    Guard guard;

    std::size_t dim() const { return 2 * n_dof + 1; }
    bool admissible(const Vec& x) const;
    void require_admissible(const Vec& x) const;
    double energy(const Vec& x) const;
    Vec gradient(const Vec& x) const;
};

// Default coordinate names q1..qn, p1..pn (and S for contact spaces).
std::vector<std::string> darboux_names(std::size_t n, bool contact = false);

// (dH/dp, -dH/dq).
Vec symplectic_vf(const SymplecticSystem& sys, const Vec& x);

// Contact Hamiltonian field; the system must have degree 1.
Vec contact_vf(const ContactSystem& sys, const Vec& x);

// (dK/dp, -dK/dq - p dK/dS, p.dK/dp - degree*K).
Vec lambda_vf(const ContactSystem& sys, const Vec& x);

// X_H as a field that can itself be differentiated (needs a twice differentiable H).
VectorFieldPtr hamiltonian_field(const SymplecticSystem& sys);

// Constant matrix of omega in (q, p) layout: Omega(p_a, q_a) = 1, Omega(q_a, p_a) = -1.
Mat darboux_matrix(std::size_t n_dof);

// Largest relative deviation between the system's gradient and central differences.
double gradient_fd_deviation(const ScalarField& f, const std::vector<Vec>& points);

void require_finite(const Vec& v, const std::string& what);

} // namespace cr
