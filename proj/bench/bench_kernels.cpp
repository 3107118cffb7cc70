// Serial vs OpenMP timings of the data-parallel kernels.  Also checks that
// both forms produce identical results.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include <omp.h>

#include "twoatom/sweep.hpp"

using namespace twoatom;

namespace {

template <typename F>
double seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double serial, double parallel, bool same) {
    std::printf("%-22s serial %8.3f s   openmp %8.3f s   speedup %5.2f   identical %s\n", name, serial, parallel,
                serial / parallel, same ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
    const double scale = argc > 1 ? std::atof(argv[1]) : 1.0;
    std::printf("threads: %d\n", omp_get_max_threads());

    {
        TrajectoryConfig tc;
        tc.coupling = DipoleCoupling::from_c3({0.1, 0.1});
        tc.params.omega2 = 0.02;
        tc.total_time = 50.0;
        const std::vector<double> cps{10.0, 25.0, 50.0};
        const int n = static_cast<int>(400 * scale);
        std::vector<Matrix9c> a, b;
        const double ts = seconds([&] { a = ensemble_density(tc, n, cps, Execution::Serial); });
        const double tp = seconds([&] { b = ensemble_density(tc, n, cps, Execution::Parallel); });
        report("ensemble_density", ts, tp, a == b);
    }
    {
        const TransitionRates r{8e-4, 2.6666666666666667e-4, 4e-4, 5.3333333333333333e-4};
        const int n = static_cast<int>(32 * scale);
        std::vector<PeriodSequence> a, b;
        const double ts = seconds([&] { a = telegraph_batch(r, 1e7, 7, n, Execution::Serial); });
        const double tp = seconds([&] { b = telegraph_batch(r, 1e7, 7, n, Execution::Parallel); });
        report("telegraph_batch", ts, tp, a == b);
    }
    {
        SweepConfig cfg;
        cfg.r_steps = static_cast<int>(400 * scale);
        std::vector<SweepRow> a, b;
        const double ts = seconds([&] { a = run_sweep(cfg, Execution::Serial); });
        const double tp = seconds([&] { b = run_sweep(cfg, Execution::Parallel); });
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i) same = a[i].stats.n_dj == b[i].stats.n_dj;
        report("analytic sweep", ts, tp, same);
    }
    return 0;
}
