#pragma once

// Scaling symmetries and scaling functions: residual checks of the defining identities, seeded
// sample sets, and the action integrals along Hamiltonian trajectories.

#include <cstdint>
#include <string>
#include <vector>

#include "cr/core.hpp"
#include "cr/integrate.hpp"
#include "cr/parallel.hpp"

namespace cr {

struct ScalingSymmetry {
    std::string id;
    VectorFieldPtr field;   // D on phase space
    double degree = 1.0;
};

struct ScalingFunction {
    std::string id;
    ScalarFieldPtr rho;
};

struct SymmetryReport {
    double liouville_residual = 0.0;
    double degree_residual = 0.0;
    double commutator_residual = 0.0;
    double condition_LH_residual = 0.0;
    std::size_t samples = 0;
    std::size_t skipped = 0;   // points where X_H vanishes; left out of the commutator residual
    double tolerance = 1e-6;
    bool verdict = false;

    // "key: value" lines.
    std::string to_text() const;
};

struct SimilarityResult {
    std::vector<double> f;           // NaN at skipped samples
    std::vector<std::size_t> skipped;
    double residual = 0.0;
};

// Least-squares f with [Y, X] ~ f X at each sample; residual is the largest orthogonal remainder
// relative to |X|.
SimilarityResult check_dynamical_similarity(const VectorField& x, const VectorField& y,
                                            const std::vector<Vec>& samples, Exec exec = Exec::Serial);

SymmetryReport check_scaling_symmetry(const SymplecticSystem& sys, const ScalingSymmetry& d,
                                      const std::vector<Vec>& samples, double tol = 1e-6,
                                      Exec exec = Exec::Serial);

// max |D(rho) - rho| over the samples.
double check_scaling_function(const ScalingSymmetry& d, const ScalingFunction& rho,
                              const std::vector<Vec>& samples);

// Per-block log-uniform radius in [r_min, r_max] with a Gaussian direction, rejected against
// the guard and against points where f cannot be evaluated.
struct SampleSpec {
    std::vector<std::size_t> blocks;
    std::size_t count = 100;
    std::uint64_t seed = 42;
    double r_min = 0.1;
    double r_max = 10.0;
};

std::vector<Vec> sample_points(const SampleSpec& spec, const Guard& guard,
                               const ScalarField* f = nullptr);
std::vector<Vec> sample_points(const SymplecticSystem& sys, std::size_t count = 100,
                               std::uint64_t seed = 42);

// D + X_F; a scaling symmetry again when F is a first integral of degree zero.
ScalingSymmetry add_hamiltonian_field(const ScalingSymmetry& d, const SymplecticSystem& f);

// Trajectory of the system augmented with S' = p.dH/dp - H, S(0) = 0; S is the last coordinate.
Trajectory local_action_solution(const SymplecticSystem& sys, const Vec& x0, double t_max,
                                 const IntegratorConfig& config = {});

struct LoopAction {
    double action = 0.0;
    double period = 0.0;
    double closure_gap = 0.0;
};

// Closed integral of the Lagrangian along the periodic orbit through x0. The return time is the
// first local minimum of |x - x0| after half the estimated period; the orbit must close there
// to within closure_tol in the max norm.
LoopAction loop_action(const SymplecticSystem& sys, const Vec& x0, double period_estimate,
                       double closure_tol = 1e-6, const IntegratorConfig& config = {});

} // namespace cr
