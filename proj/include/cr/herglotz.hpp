#pragma once
// Herglotz variational dynamics: S' = L(q, v, S) with the Herglotz-Lagrange equations for q,
// the Lambda-corrected action law, the Legendre bridge to contact systems, reduction of
// Lagrangians by scaling symmetries and lifted Lagrangians.
//
// Herglotz states are laid out (q_1..q_n, v_1..v_n, S); plain Lagrangians act on (q, v).
#include <string>
#include <vector>

#include "cr/core.hpp"
#include "cr/integrate.hpp"

namespace cr {

struct HerglotzSystem {
    std::string id;
    std::size_t n = 0;
    ScalarFieldPtr lagrangian;        // on (q, v, S)
    double degree = 1.0;
    std::vector<std::string> names;   // configuration names
    Guard guard;
    ScalarFieldPtr hamiltonian;       // optional closed-form Legendre dual on (q, p, S)
    std::string expression;           // closed form of the Lagrangian, when known

    std::size_t dim() const { return 2 * n + 1; }
    void require_admissible(const Vec& x) const;
};

struct LagrangianSystem {
    std::string id;
    std::size_t n = 0;
    ScalarFieldPtr lagrangian;        // on (q, v)
    std::vector<std::string> names;
    Guard guard;

    std::size_t dim() const { return 2 * n; }
};

// The same Lagrangian read as an S-independent Herglotz system of degree one.
HerglotzSystem as_herglotz(const LagrangianSystem& sys);

// Condition number of the velocity Hessian at a state.
double velocity_condition(const HerglotzSystem& sys, const Vec& x);

// (v, a, S') for a degree one system. Singular velocity Hessians raise RegularityError.
Vec herglotz_rhs(const HerglotzSystem& sys, const Vec& x);
// Same equations for q with S' = L + (1 - degree) E.
Vec lambda_herglotz_rhs(const HerglotzSystem& sys, const Vec& x);
// E = dL/dv . v - L.
double herglotz_energy(const HerglotzSystem& sys, const Vec& x);
OdeProblem ode_problem(const HerglotzSystem& sys);

struct LegendreOptions {
    double tol = 1e-13;
    std::size_t max_iterations = 100;
    double max_condition = 1e12;
};

// (q, v, S) -> (q, dL/dv, S).
Vec legendre_point(const HerglotzSystem& sys, const Vec& x);
// Inverse of legendre_point by damped Newton on dL/dv = p.
Vec inverse_legendre_point(const HerglotzSystem& sys, const Vec& y, const LegendreOptions& options = {});
// Contact system H = p.v - L with v solved from p. The closed-form dual is used when the system
// carries one; otherwise H is evaluated by Newton and differentiated through the envelope identity.
ContactSystem legendre_to_contact(const HerglotzSystem& sys, const LegendreOptions& options = {});

// Configuration chart q <-> (rho, qbar) whose first coordinate is the scaling function.
struct ConfigurationChart {
    std::string id;
    std::size_t n = 0;
    VectorFieldPtr forward;
    VectorFieldPtr inverse;
    std::vector<std::string> reduced_names;
};

struct BasicnessReport {
    double degree_residual = 0.0;   // |D(L) - degree L| relative to max(1, |L|)
    double form_residual = 0.0;     // |L_D lambda_L - lambda_L| relative to max(1, |lambda_L|)
    std::size_t samples = 0;
};

// d is a vector field on (q, v); lambda_L = dL/dv . dq.
BasicnessReport check_basic_symmetry(const LagrangianSystem& sys, const VectorField& d, double degree,
                                     const std::vector<Vec>& samples);

struct LagrangianReductionOptions {
    double tol = 1e-6;
    double newton_tol = 1e-13;
};

// Herglotz system on (qbar, qbar', S) obtained at rho = 1 by solving S = -i_D lambda_L for the
// radial velocity and setting the reduced Lagrangian to -(L + rho' S). Refused with a
// ContractError when d is not a basic symmetry of the given degree at the samples.
HerglotzSystem lagrangian_scale_reduce(const LagrangianSystem& sys, const VectorFieldPtr& d,
                                       const ConfigurationChart& chart, double degree,
                                       const std::vector<Vec>& samples,
                                       const LagrangianReductionOptions& options = {});

// Reduced Herglotz state (qbar, dqbar/dtau, S) of a point (q, v), with dtau/dt = rho^(degree-1).
Vec reduced_herglotz_state(const LagrangianSystem& sys, const VectorField& d, const ConfigurationChart& chart,
                           double degree, const Vec& x);

// L_hat = T + sum_j X_j' (L_j / X_j')^(1/degree_j) on (q, X, v, X').
struct LiftedLagrangian {
    LagrangianSystem system;
    ScalarFieldPtr base;
    std::vector<ScalarFieldPtr> terms;
    Vec degrees;
    std::size_t n = 0;   // base configuration dimension

    std::size_t k() const { return terms.size(); }
};

LiftedLagrangian lift_lagrangian(const LagrangianSystem& base, std::vector<ScalarFieldPtr> terms,
                                 Vec degrees, std::vector<std::string> lift_names = {});

// a_j = (X_j' / L_j)^(1 - 1/degree_j) / degree_j at a lifted point (q, X, v, X').
Vec recovered_couplings(const LiftedLagrangian& lifted, const Vec& x);

// T + sum_j a_j L_j on (q, v).
LagrangianSystem coupled_lagrangian(const LiftedLagrangian& lifted, const Vec& couplings);

} // namespace cr
