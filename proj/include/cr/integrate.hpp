#pragma once

// ODE drivers over autonomous right-hand sides, time reparametrization and trajectory comparison.

#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "cr/core.hpp"

namespace cr {

struct OdeProblem {
    std::string id;
    std::size_t dim = 0;
    std::function<Vec(const Vec&)> rhs;
    Guard guard;
    // Set for H = T(p) + V(q) in (q, p) layout; required by the Stormer-Verlet method.
    bool separable = false;
    std::size_t n_dof = 0;
};

OdeProblem ode_problem(const SymplecticSystem& sys);
// Lambda-Hamiltonian field of the contact system.
OdeProblem ode_problem(const ContactSystem& sys);

enum class Method { Rk45, Rk4Fixed, StormerVerlet };

Method parse_method(const std::string& name);
std::string method_name(Method m);

// Integration stops once value(x) drops below threshold; the crossing is refined by bisection.
struct Event {
    std::string name;
    std::function<double(const Vec&)> value;
    double threshold = 0.0;
};

struct IntegratorConfig {
    Method method = Method::Rk45;
    double step = 0.01;           // fixed-step methods
    double abs_tol = 1e-10;
    double rel_tol = 1e-9;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 1000000;
    double event_tol = 1e-10;
    std::vector<Event> events;
};

struct Sample {
    double t = 0.0;
    double tau = 0.0;
    double dtau_dt = 1.0;
    Vec x;
    Vec dx;     // dx/dt
    Vec diag;   // aligned with Trajectory::diag_names
};

struct Trajectory {
    std::string system_id;
    std::string method;
    std::string stop_reason;   // span_end, event, guard, max_steps, numerical_failure
    std::string stop_event;
    std::string stop_message;
    bool has_tau = false;
    std::vector<std::string> names;
    std::vector<std::string> diag_names;
    std::vector<Sample> samples;

    const Sample& front() const { return samples.front(); }
    const Sample& back() const { return samples.back(); }
    std::size_t size() const { return samples.size(); }
};

// Integrate from x0 at t0 to t1 >= t0. An inadmissible x0 is a domain error; later failures end
// the trajectory with a stop reason instead of throwing.
Trajectory integrate(const OdeProblem& problem, const Vec& x0, double t0, double t1,
                     const IntegratorConfig& config = {});

// Fill tau = integral of rho^(Lambda-1) dt with the trapezoid rule plus the Hermite end correction.
Trajectory reparametrize(Trajectory traj, const ScalarField& rho, double degree);

// State and time derivative at time t by cubic Hermite interpolation between samples.
struct Interpolant {
    std::vector<double> s;
    std::vector<Vec> y;
    std::vector<Vec> dy;
    Vec operator()(double at) const;
    Vec derivative(double at) const;

    // Build from the t column (tau when has_tau and use_tau) of a trajectory.
    static Interpolant of(const Trajectory& traj, bool use_tau = false);

private:
    std::size_t segment(double at) const;
};

struct ComparisonOptions {
    std::size_t grid = 4001;
    std::vector<std::size_t> periodic;   // angle coordinates unwrapped before comparing
};

struct Comparison {
    double sup = 0.0;
    Vec per_coordinate;
    double tau_begin = 0.0;
    double tau_end = 0.0;
};

// Compare two trajectories in their tau parameter (t when tau is absent) on a common grid.
// Each state is first mapped through its projection; a null projection is the identity.
Comparison compare_trajectories(const Trajectory& a, const VectorFieldPtr& pa, const Trajectory& b,
                                const VectorFieldPtr& pb, const ComparisonOptions& options = {});

// Compare the traced orbits with the parametrization removed: both projected curves are resampled
// densely, measured by arc length and compared at equal arc length from their starts over the
// shorter of the two. tau_begin and tau_end report the compared length.
Comparison compare_orbits(const Trajectory& a, const VectorFieldPtr& pa, const Trajectory& b, const VectorFieldPtr& pb,
                          const ComparisonOptions& options = {}, std::size_t dense = 20001);

double first_integral_drift(const Trajectory& traj, const std::function<double(const Vec&)>& f);

// Append a diagnostic column evaluated at every sample.
void annotate(Trajectory& traj, const std::string& name, const std::function<double(const Vec&)>& f);

// Header row, then t, tau (if present), state, diagnostics with 17 significant digits.
void write_csv(std::ostream& out, const Trajectory& traj);

} // namespace cr
