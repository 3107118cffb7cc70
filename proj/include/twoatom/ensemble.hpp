#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <vector>

#include "twoatom/telegraph_stats.hpp"
#include "twoatom/trajectory_sim.hpp"

namespace twoatom {

/// Every kernel exists in a serial reference form and an OpenMP form.  Work
/// item i always uses random stream i and results are reduced in index order,
/// so both forms return bit-identical results.
enum class Execution { Serial, Parallel };

/// Runs body(i) for i in [0, n).  jobs <= 0 means the OpenMP default.  The
/// first exception thrown by any item is rethrown after the loop.
void for_each_index(long n, Execution exec, int jobs, const std::function<void(long)>& body);

/// Ensemble average of |psi><psi| over n trajectories at each checkpoint.
std::vector<Matrix9c> ensemble_density(const TrajectoryConfig& config, int n,
                                       const std::vector<double>& checkpoints,
                                       Execution exec = Execution::Parallel, int jobs = 0);

/// n independent emission records (streams 0..n-1).
std::vector<EmissionRecord> emission_batch(const TrajectoryConfig& config, int n,
                                           Execution exec = Execution::Parallel, int jobs = 0);

/// n independent telegraph sequences (streams 0..n-1).
std::vector<PeriodSequence> telegraph_batch(const TransitionRates& rates, double total_time,
                                            std::uint64_t seed, int n,
                                            Execution exec = Execution::Parallel, int jobs = 0);

/// Emission records classified into period sequences.
std::vector<PeriodSequence> classify_batch(const std::vector<EmissionRecord>& records, double dt_w,
                                           int k, const ClassifierConfig& cfg,
                                           Execution exec = Execution::Parallel, int jobs = 0);

}  // namespace twoatom
