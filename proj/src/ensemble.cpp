#include "twoatom/ensemble.hpp"

#include <mutex>

#include <omp.h>

namespace twoatom {

void for_each_index(long n, Execution exec, int jobs, const std::function<void(long)>& body) {
    if (exec == Execution::Serial) {
        for (long i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

std::vector<Matrix9c> ensemble_density(const TrajectoryConfig& config, int n,
                                       const std::vector<double>& checkpoints, Execution exec,
                                       int jobs) {
    if (n <= 0) throw DomainError("ensemble size must be positive");
    const TrajectoryEngine engine(config);
    std::vector<std::vector<Vector9c>> per(n);
    for_each_index(n, exec, jobs, [&](long i) { engine.run(static_cast<std::uint64_t>(i), checkpoints, per[i]); });

    std::vector<Matrix9c> avg(checkpoints.size(), Matrix9c::Zero());
    for (int i = 0; i < n; ++i)
        for (std::size_t c = 0; c < checkpoints.size(); ++c) avg[c] += per[i][c] * per[i][c].adjoint();
    for (auto& m : avg) m /= static_cast<double>(n);
    return avg;
}

std::vector<EmissionRecord> emission_batch(const TrajectoryConfig& config, int n, Execution exec,
                                           int jobs) {
    const TrajectoryEngine engine(config);
    std::vector<EmissionRecord> out(n);
    for_each_index(n, exec, jobs, [&](long i) { out[i] = engine.run(static_cast<std::uint64_t>(i)); });
    return out;
}

std::vector<PeriodSequence> telegraph_batch(const TransitionRates& rates, double total_time,
                                            std::uint64_t seed, int n, Execution exec, int jobs) {
    std::vector<PeriodSequence> out(n);
    for_each_index(n, exec, jobs, [&](long i) {
        out[i] = simulate_telegraph(rates, total_time, seed, static_cast<std::uint64_t>(i));
    });
    return out;
}

std::vector<PeriodSequence> classify_batch(const std::vector<EmissionRecord>& records, double dt_w,
                                           int k, const ClassifierConfig& cfg, Execution exec,
                                           int jobs) {
    std::vector<PeriodSequence> out(records.size());
    for_each_index(static_cast<long>(records.size()), exec, jobs, [&](long i) {
        out[i] = classify_periods(intensity_trace(records[i], dt_w, k), cfg);
    });
    return out;
}

}  // namespace twoatom
