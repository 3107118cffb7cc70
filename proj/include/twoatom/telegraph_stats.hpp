#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "twoatom/analytic_rates.hpp"

namespace twoatom {

/// Period rates n_i, mean durations T_i and double-jump rates of the
/// three-level telegraph process.  The *_cor fields hold the values an
/// observer with a finite averaging window records; they equal the ideal
/// ones for ideal_statistics().
struct TelegraphStatistics {
    double n0 = 0, n1 = 0, n2 = 0;
    double t0 = 0, t1 = 0, t2 = 0;
    double n_dj_up = 0, n_dj_down = 0, n_dj = 0;
    double n_dj_linear = 0;  // small-window expansion

    double dtau = 0;
    double n2_cor = 0;
    double t0_cor = 0, t1_cor = 0, t2_cor = 0;
    double n_dj_cor = 0;

    std::vector<std::string> warnings;

    [[nodiscard]] double sum_rule() const { return n0 * t0 + n1 * t1 + n2 * t2; }
};

struct TelegraphModel {
    TransitionRates rates;
    double dt_dj = 160.0;
    double dt_w = 114.0;
    double cutoff_fraction = 2.0 / 3.0;

    [[nodiscard]] double dtau() const { return cutoff_fraction * dt_w; }
    /// dt_dj > dt_w, cutoff fraction in [0.5, 0.8], positive rates.
    void validate() const;
};

TelegraphStatistics ideal_statistics(const TransitionRates& rates, double dt_dj);
TelegraphStatistics window_corrected_statistics(const TelegraphModel& model);

/// Density (per unit time and duration) of recorded single-intensity periods
/// of duration t when periods shorter than dtau are missed.
double recorded_single_density(const TransitionRates& rates, double dtau, double t);
/// Its integral over [dtau, inf).
double recorded_single_rate(const TransitionRates& rates, double dtau);

struct Period {
    int level = 0;
    double start = 0.0;
    double duration = 0.0;

    [[nodiscard]] double end() const { return start + duration; }
    bool operator==(const Period&) const = default;
};

using PeriodSequence = std::vector<Period>;

/// Markov-chain telegraph signal on [0, total_time]; the first level is drawn
/// from the stationary occupancy, the last period is truncated.
PeriodSequence simulate_telegraph(const TransitionRates& rates, double total_time,
                                  std::uint64_t seed, std::uint64_t stream = 0);

struct DoubleJumpCounts {
    long up = 0;
    long down = 0;
    [[nodiscard]] long total() const { return up + down; }
};

/// 0->1->2 (up) and 2->1->0 (down) with a level-1 period shorter than dt_dj;
/// direct 0->2 / 2->0 transitions (possible after censoring) count as well.
DoubleJumpCounts count_double_jumps(const PeriodSequence& seq, double dt_dj);

/// Drops every period shorter than dtau; its time is split evenly between the
/// neighbours, and equal-level neighbours are merged.
PeriodSequence censor_sequence(const PeriodSequence& seq, double dtau);

/// Text format: one "level start duration" line per period, 12 significant digits.
void write_periods(std::ostream& out, const PeriodSequence& seq);
PeriodSequence read_periods(std::istream& in);

}  // namespace twoatom
