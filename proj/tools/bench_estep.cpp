// Benchmark: OpenMP-parallel E-step against the serial reference, with a
// bitwise identity check between the two.

#include <chrono>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bgmoe/em.hpp"
#include "bgmoe/simulate.hpp"

using namespace bgmoe;

namespace {

double time_ms(const std::function<void()>& f, int reps) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n = 400;
    int reps = 3;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (!std::strcmp(argv[i], "--n")) n = std::strtoull(argv[i + 1], nullptr, 10);
        if (!std::strcmp(argv[i], "--reps")) reps = std::atoi(argv[i + 1]);
    }

    const SimOutput sim = simulate_study2(n, 42);
    const Dataset data = sim.to_dataset(false);

    ModelSpec spec;
    spec.g = 2;
    spec.gating.kind = NetworkKind::V;
    spec.gating.covariates = {"w1", "w2", "w3"};
    for (auto& a : spec.alpha) a.kind = NetworkKind::V;
    spec.alpha[0].covariates = {"w1", "w2"};
    spec.alpha[1].covariates = {"w2", "w3"};
    spec.alpha[2].covariates = {"w2", "w3"};
    spec.beta.kind = NetworkKind::C;

    const FittedModel model = initialize(data, spec, 42);
    const DesignSet design = DesignSet::build(data, spec);
    const QuadratureConfig q;

    const EStepCache serial = e_step_serial(data, design, model, q);
    const EStepCache parallel = e_step(data, design, model, q);
    const bool identical = serial.loglik == parallel.loglik &&
                           serial.z == parallel.z && serial.x3 == parallel.x3 &&
                           serial.lx3 == parallel.lx3;

    const double t_serial =
        time_ms([&] { (void)e_step_serial(data, design, model, q); }, reps);
    const double t_parallel = time_ms([&] { (void)e_step(data, design, model, q); }, reps);

#ifdef _OPENMP
    const int threads = effective_threads();
#else
    const int threads = 1;
#endif
    std::printf("n=%zu cells=%zu threads=%d\n", n, n * 2, threads);
    std::printf("%-16s %10.2f ms\n", "serial", t_serial);
    std::printf("%-16s %10.2f ms  (x%.2f)\n", "openmp", t_parallel, t_serial / t_parallel);
    std::printf("bitwise identical: %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
