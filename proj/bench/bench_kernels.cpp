// Serial against OpenMP kernels. Thread count follows CONTACT_REDUCE_THREADS.
#include <benchmark/benchmark.h>

#include "cr/expr.hpp"
#include "cr/systems.hpp"

using namespace cr;

namespace {

const SystemBundle& kepler() {
    static const SystemBundle b = instantiate("kepler");
    return b;
}

void symmetry_check(benchmark::State& state, Exec exec) {
    const auto& k = kepler();
    const auto samples = sample_points(k.system, static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state) {
        auto r = check_scaling_symmetry(k.system, k.symmetry(), samples, 1e-6, exec);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void orbit_batch(benchmark::State& state, Exec exec) {
    const auto& k = kepler();
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::vector<Vec> starts;
    for (std::size_t i = 0; i < n; ++i) starts.push_back({1.0, 0.0, 0.0, 0.8 + 0.4 * static_cast<double>(i) / static_cast<double>(n)});
    std::vector<double> ends(n);
    const auto problem = ode_problem(k.system);
    for (auto _ : state) {
        for_each_index(n, exec, [&](std::size_t i) { ends[i] = integrate(problem, starts[i], 0.0, 20.0).back().x[0]; });
        benchmark::DoNotOptimize(ends.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void reduced_field(benchmark::State& state) {
    const auto& red = kepler().reduction("rho");
    const Vec y{0.3, -0.9, 0.2};
    const bool generic = state.range(0) != 0;
    for (auto _ : state) {
        Vec f = lambda_vf(generic ? red.generic.system : red.closed, y);
        benchmark::DoNotOptimize(f);
    }
}

void expression_gradient(benchmark::State& state) {
    const auto e = Expression::parse("(p1^2 + p2^2)/2 - 1/sqrt(q1^2 + q2^2)", {"q1", "q2", "p1", "p2"});
    const Vec x{1.0, 0.2, 0.1, 1.1};
    for (auto _ : state) {
        auto g = e.eval_with_grad(x);
        benchmark::DoNotOptimize(g);
    }
}

} // namespace

BENCHMARK_CAPTURE(symmetry_check, serial, Exec::Serial)->Arg(200)->Arg(2000);
BENCHMARK_CAPTURE(symmetry_check, parallel, Exec::Parallel)->Arg(200)->Arg(2000);
BENCHMARK_CAPTURE(orbit_batch, serial, Exec::Serial)->Arg(16);
BENCHMARK_CAPTURE(orbit_batch, parallel, Exec::Parallel)->Arg(16);
BENCHMARK(reduced_field)->Arg(0)->Arg(1);
BENCHMARK(expression_gradient);

BENCHMARK_MAIN();
