#pragma once

// Reduction of a symplectic system with a scaling symmetry to a contact system on the space of
// D-orbits, realized through an adapted chart.
//
// Chart coordinates are (rho, S, qbar_1..qbar_{n-1}, pbar_1..pbar_{n-1}); reduced contact points
// use the contact layout (qbar, pbar, S). The chart must straighten D to rho d/drho and pull the
// Liouville form back to rho (dS - pbar dqbar).

#include <string>
#include <vector>

#include "cr/core.hpp"
#include "cr/integrate.hpp"
#include "cr/scaling.hpp"

namespace cr {

struct AdaptedChart {
    std::string id;
    std::size_t n_dof = 0;        // upstairs degrees of freedom
    VectorFieldPtr forward;       // x -> (rho, S, qbar, pbar)
    VectorFieldPtr inverse;       // (rho, S, qbar, pbar) -> x
    std::vector<std::string> reduced_names;
    std::vector<std::size_t> periodic;   // angle coordinates among the reduced ones
    Guard domain;                        // upstairs working region of the chart
};

struct ChartReport {
    double inverse_residual = 0.0;      // |inverse(forward(x)) - x|, relative to max(1, |x|)
    double rho_residual = 0.0;          // |forward(x)_0 - rho(x)|
    double pushforward_residual = 0.0;  // |d forward . D - (rho, 0, ..., 0)|
    double liouville_residual = 0.0;    // |i_D omega - rho (dS - pbar dqbar)| on a coordinate basis
    std::size_t samples = 0;
};

struct ChartTolerances {
    double inverse = 1e-10;
    double identities = 1e-8;
};

ChartReport validate_chart(const SymplecticSystem& sys, const ScalingSymmetry& d, const ScalingFunction& rho,
                           const AdaptedChart& chart, const std::vector<Vec>& samples);

struct ReducedContactSystem {
    ContactSystem system;        // H0 and the degree of D
    SymplecticSystem parent;
    ScalingSymmetry symmetry;
    ScalingFunction rho;
    AdaptedChart chart;
    ChartReport report;
    std::string expression;      // closed form of H0 over reduced_names, when known
};

struct ReductionOptions {
    std::size_t samples = 100;
    std::uint64_t seed = 42;
    ChartTolerances tol;
};

// H0(qbar, pbar, S) = -H(inverse(1, S, qbar, pbar)). The chart is validated first; residuals above
// tolerance refuse the construction with a ContractError listing them.
ReducedContactSystem contact_reduce(const SymplecticSystem& sys, const ScalingSymmetry& d,
                                    const ScalingFunction& rho, const AdaptedChart& chart,
                                    const ReductionOptions& options = {});

// Reduced point (qbar, pbar, S) of an upstairs point.
Vec reduced_point(const AdaptedChart& chart, const Vec& x);
// Upstairs point over a reduced point at the given value of the scaling function.
Vec upstairs_point(const AdaptedChart& chart, const Vec& reduced, double rho = 1.0);

// x -> (qbar, pbar, S).
VectorFieldPtr reduced_projection(const AdaptedChart& chart);
// (qbar, pbar, S) -> x on the level set rho = 1.
VectorFieldPtr unit_section(const AdaptedChart& chart);
// Reduced coordinates of one chart expressed in those of another.
VectorFieldPtr transition(const AdaptedChart& from, const AdaptedChart& to);

// max |H0(reduced(x)) + H(x)/rho(x)^degree| over the samples.
double reduction_identity_residual(const ReducedContactSystem& red, const std::vector<Vec>& samples);

// Degree one system H = -|H0|^(1/degree) on one side of the zero level of H0. Evaluation inside
// the band |H0| <= band is a domain error.
ContactSystem normalized_reduction(const ReducedContactSystem& red, double band = 1e-6);

// Factor f with (normalized field) = f * (lambda field of H0) at a reduced point.
double normalized_factor(const ReducedContactSystem& red, const Vec& y);

// (rho_tilde / rho)^(1 - degree).
double scaling_change_factor(const ScalarField& rho, const ScalarField& rho_tilde, double degree, const Vec& x);

// Symplectic system in (Q0, Q, P0, P) = (S, qbar, rho, -rho pbar) with
// H = -P0^degree H0(Q, -P/P0, Q0), on P0 > 0.
SymplecticSystem symplectic_lift(const ReducedContactSystem& red);
// x -> (S, qbar, rho, -rho pbar).
VectorFieldPtr lift_coordinates(const AdaptedChart& chart);

// Least-squares ratio r with a ~ r b and the remainder |a - r b| / |a|.
struct Parallelism {
    double ratio = 0.0;
    double residual = 0.0;
};
Parallelism parallelism(const Vec& a, const Vec& b);

// dH/dtau + degree * H * dH/dS along the lambda field at y; zero for every contact Hamiltonian.
double dissipation_residual(const ContactSystem& sys, const Vec& y);

// Upstairs and downstairs trajectories compared in tau through the chart projection.
Comparison compare_reduced(const Trajectory& up, const AdaptedChart& chart, const Trajectory& down,
                           std::size_t grid = 4001);

} // namespace cr
