#pragma once
// Catalogue of bundled models. Each bundle carries its scaling symmetries, charts, reductions
// computed by the generic machinery next to hand-written closed forms, and is refused at
// construction when the two disagree.
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cr/herglotz.hpp"
#include "cr/lifted.hpp"
#include "cr/reduction.hpp"

namespace cr {

struct BundleReduction {
    ReducedContactSystem generic;
    ContactSystem closed;             // closed-form H0 over the chart's reduced names
    std::string closed_text;
    double closed_residual = 0.0;     // max relative |generic - closed| at the samples
};

struct LiftedVariant {
    std::string id;                   // "linear" or "power"
    LiftedSystem lifted;
    ScalingFunction rho;
    AdaptedChart chart;
    ReducedContactSystem reduced;
    // Closed form of the reduced Hamiltonian, linear form only; empty otherwise.
    std::string closed_text;
    ContactSystem closed;
    double closed_residual = 0.0;
};

struct HerglotzCounterpart {
    LagrangianSystem lagrangian;      // on (q, v)
    VectorFieldPtr symmetry;          // on (q, v)
    double degree = 1.0;
    ConfigurationChart chart;
    HerglotzSystem closed;            // closed-form reduced Lagrangian with its closed Legendre dual
    HerglotzSystem generic;           // from lagrangian_scale_reduce
    BasicnessReport basicness;
    double closed_residual = 0.0;
};

// McGehee variables (s, y) = (q/rho^2, rho p) with rho = |q|^(1/2), for unit masses.
struct BlowUp {
    std::size_t bodies = 0;
    std::size_t space_dim = 0;
    VectorFieldPtr field;        // (s, y) -> (y - nu s, nu y/2 + grad U(s))
    ScalarFieldPtr energy;       // U(s) - |y|^2/2
    VectorFieldPtr projection;   // (q, p) -> (s, y)
};

struct SystemBundle {
    std::string id;
    std::string doc;
    std::map<std::string, double> params;
    SymplecticSystem system;
    std::vector<ScalingSymmetry> symmetries;
    std::vector<BundleReduction> reductions;
    std::vector<LiftedVariant> lifted;
    std::optional<HerglotzCounterpart> herglotz;
    std::optional<LiftedLagrangian> lifted_lagrangian;
    std::optional<BlowUp> blowup;

    const ScalingSymmetry& symmetry() const { return symmetries.front(); }
    const BundleReduction& reduction(const std::string& chart_id) const;
    const LiftedVariant& lifted_variant(const std::string& form) const;
};

// Ids: kepler, oscillator2d, kepler_hooke, laurent, flrw, nbody_blowup. Unknown parameter names
// are refused; missing ones take the documented defaults. texts["matter"] replaces the FLRW
// matter Hamiltonian, an expression over q and p.
SystemBundle instantiate(const std::string& id, const std::map<std::string, double>& params = {},
                         const std::map<std::string, std::string>& texts = {});
std::vector<std::string> bundle_ids();
// Parameter names with their defaults.
std::map<std::string, double> bundle_defaults(const std::string& id);

struct Scenario {
    std::string name;
    std::string description;
    std::string target;          // upstairs, reduced, lifted, herglotz, blowup
    std::string chart;           // reduced targets
    Vec x0;
    double t_end = 0.0;
    std::map<std::string, double> expected;
};

std::vector<Scenario> reference_scenarios(const std::string& id);

// Kepler charts: "rho", "kappa", "G", "J". Coordinates of the scale invariant equations of
// motion, laid out (J, G, theta), (J_kappa, G_kappa, phi), (J_G, rho_G, theta), (G_J, rho_J, theta).
VectorFieldPtr kepler_invariant_coordinates(const std::string& chart_id);
Vec kepler_invariant_rhs(const std::string& chart_id, const Vec& z);
// |d(coordinates) . X - rhs| relative to max(1, |rhs|) at a reduced point of the chart.
double kepler_invariant_residual(const SystemBundle& kepler, const std::string& chart_id, const Vec& y);

// FLRW: reduced field in (q, p, Pi) = (qbar, -pbar, -S) against (dHm/dp, -dHm/dq + 3 Pi p / 4 pi).
double flrw_friction_residual(const SystemBundle& flrw, const Vec& y);

// Two-body blow-up point -> (J, G, theta) of the rho-reduced Kepler problem.
Vec two_body_invariants(const Vec& sy);
// |d(two_body_invariants) . F_blowup - 2^(-1/4) F_kepler| on the invariant plane s2 = -s1, y2 = -y1.
double two_body_residual(const SystemBundle& nbody, const SystemBundle& kepler, const Vec& sy);

} // namespace cr
