#pragma once

// Lifted systems: couplings a_i of H = sum a_i H_i promoted to coordinates with conjugates b_i.
// Layout (q_1..q_n, b_1..b_k, p_1..p_n, a_1..a_k), so the a_i are momentum-like and
// omega_hat = omega + da ^ db.

#include <string>
#include <vector>

#include "cr/reduction.hpp"

namespace cr {

// Linear: H = sum a_i H_i. Power: the coordinate is c_i > 0 with a_i = s_i c_i^(1 - degree_i),
// s_i the sign of the initial coupling; then D_hat acts on every c_i with the same weight.
enum class CouplingForm { Linear, Power };

struct CouplingSpec {
    std::string name;
    double degree = 0.0;     // of its term under D
    double value = 1.0;      // initial coupling a_i
    double momentum = 0.0;   // initial b_i
};

struct LiftOptions {
    CouplingForm form = CouplingForm::Linear;
    double target_degree = 1.0;
    std::size_t samples = 100;
    std::uint64_t seed = 42;
    double tol = 1e-6;
};

struct LiftedSystem {
    SymplecticSystem base;
    ScalingSymmetry base_symmetry;
    std::vector<ScalarFieldPtr> terms;
    std::vector<CouplingSpec> couplings;
    CouplingForm form = CouplingForm::Linear;
    Vec signs;                  // s_i, power form only
    Vec coupling_weights;       // D_hat weight on each coupling coordinate
    Vec momentum_weights;       // D_hat weight on each b_i
    SymplecticSystem system;
    ScalingSymmetry symmetry;   // D_hat

    std::size_t n() const { return base.n_dof; }
    std::size_t k() const { return couplings.size(); }
    // Coupling coordinate for a coupling value (c_i in the power form, a_i otherwise).
    double coordinate_of(std::size_t i, double value) const;
    // (q, b0, p, coupling coordinates) from a base point and the couplings' initial data.
    Vec initial_state(const Vec& x) const;
    // (q, p) part of a lifted point.
    Vec base_point(const Vec& xl) const;
};

// Assemble the lifted system. Every term must satisfy D(H_i) = degree_i H_i at the samples,
// otherwise a ContractError reports the per-term residuals.
LiftedSystem lift(const SymplecticSystem& base, const ScalingSymmetry& d, std::vector<ScalarFieldPtr> terms,
                  std::vector<CouplingSpec> couplings, const LiftOptions& options = {});

// D + sum alpha_i a_i d/da_i + sum beta_i b_i d/db_i with alpha_i = target - degree_i (linear
// form) or (target - degree_i)/(1 - degree_i) (power form) and beta_i = 1 - alpha_i.
ScalingSymmetry lifted_scaling_symmetry(const ScalingSymmetry& d, const std::vector<CouplingSpec>& couplings,
                                        double target_degree = 1.0,
                                        CouplingForm form = CouplingForm::Linear);

Vec lifted_vf(const LiftedSystem& lifted, const Vec& x);

// Chart adapted to D_hat built from a chart adapted to D:
//   (rho, S - sum beta_i abar_i bbar_i, qbar, bbar, pbar, -abar), abar = a/rho^alpha, bbar = b/rho^beta.
// Reduced names are (qbar, b_<name>, pbar, pa_<name>, S) with pa_<name> = -abar.
AdaptedChart lift_chart(const AdaptedChart& base, const LiftedSystem& lifted);

// Scaling function of the base chart seen on the lifted space.
ScalingFunction lift_scaling_function(const ScalingFunction& rho, const LiftedSystem& lifted);

ReducedContactSystem reduce_lifted(const LiftedSystem& lifted, const ScalingFunction& rho_hat,
                                   const AdaptedChart& chart_hat, const ReductionOptions& options = {});

// Reduced coupling coordinates abar_i of a reduced lifted point.
Vec reduced_couplings(const LiftedSystem& lifted, const Vec& y);

// sign(abar_i) |abar_i|^(1/alpha_i); each satisfies d' = -R(H) d along the degree one reduced flow.
// Couplings with alpha_i = 0 are conserved instead and are returned unchanged.
Vec dissipated_couplings(const LiftedSystem& lifted, const Vec& y);

// Reeb derivative dH/dS of a contact Hamiltonian.
double reeb_derivative(const ContactSystem& sys, const Vec& y);

} // namespace cr
