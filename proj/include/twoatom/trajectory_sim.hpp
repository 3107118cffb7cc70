#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "twoatom/atomic_model.hpp"
#include "twoatom/telegraph_stats.hpp"

namespace twoatom {

struct TrajectoryConfig {
    ModelParams params;
    DipoleCoupling coupling;
    double total_time = 1e5;
    double dt = 0.01;
    std::uint64_t seed = 1;
    Vector9c initial = Vector9c::Unit(idx(Dicke::g));

    /// Hard checks: valid parameters, physical channels, dt small enough.
    void validate() const;
};

enum class Channel : int { Plus = 0, Minus = 1 };

struct Emission {
    double time = 0.0;
    Channel channel = Channel::Plus;
    bool operator==(const Emission&) const = default;
};

struct EmissionRecord {
    std::vector<Emission> emissions;
    double total_time = 0.0;
    bool operator==(const EmissionRecord&) const = default;
};

/// Quantum-jump unraveling of the Bloch equation for one configuration.
///
/// The no-emission evolution uses exact step propagators exp(-i H dt); a jump
/// is taken once the squared norm falls below a uniform variate, and the jump
/// time is located by halving the step ten times.  Each trajectory index owns
/// its own counter-based random stream.
class TrajectoryEngine {
public:
    explicit TrajectoryEngine(TrajectoryConfig config);

    [[nodiscard]] EmissionRecord run(std::uint64_t stream) const;

    /// Same trajectory, additionally returning the normalized state at the
    /// given (sorted, within [0, total_time]) times.
    EmissionRecord run(std::uint64_t stream, const std::vector<double>& checkpoints,
                       std::vector<Vector9c>& states) const;

    /// Only the time of the first emission (or +inf if none before total_time).
    [[nodiscard]] double first_emission_time(std::uint64_t stream) const;

    [[nodiscard]] const TrajectoryConfig& config() const { return cfg_; }

private:
    static constexpr int kHalvings = 10;
    struct StepTable {
        double h = 0.0;
        std::array<Matrix9c, kHalvings + 1> u;  // u[k] = exp(-i H h / 2^k)
    };

    [[nodiscard]] StepTable make_table(double h) const;
    EmissionRecord evolve(std::uint64_t stream, const std::vector<double>* checkpoints,
                          std::vector<Vector9c>* states, bool stop_at_first) const;

    TrajectoryConfig cfg_;
    DickeOperators ops_;
    Matrix9c h_;
    StepTable table_;
};

EmissionRecord run_trajectory(const TrajectoryConfig& config);

/// "# total_time=..." header, then "time channel" lines (channel: + or -).
void write_emissions(std::ostream& out, const EmissionRecord& rec);
EmissionRecord read_emissions(std::istream& in);

/// Photon counts in a sliding window [g, g + dt_w) divided by dt_w, on the
/// grid g = i * dt_w / k covering [0, total_time - dt_w].
struct IntensityTrace {
    std::vector<double> times;
    std::vector<double> values;
    double dt_w = 0.0;
    int k = 0;

    [[nodiscard]] double step() const { return dt_w / k; }
};

IntensityTrace intensity_trace(const EmissionRecord& rec, double dt_w, int k);

/// Band classifier.  The intensity levels 0, 1, 2 are centred at 0,
/// (t1 + t2)/2 and t2 + (t2 - t1)/2.  Around each centre a band reaching the
/// fraction band_fraction of the way to the neighbouring thresholds is laid;
/// the level switches once `hysteresis` consecutive points lie in the band of
/// a new level, and the period boundary is placed at the last crossing of a
/// plain threshold.  band_fraction = 1, hysteresis = 1 is the plain threshold
/// classifier.
struct ClassifierConfig {
    double t1 = 0.0;
    double t2 = 0.0;
    int hysteresis = 2;
    double band_fraction = 0.5;

    /// Thresholds at 0.5 and 1.5 times the single-atom emission rate in a light period.
    static ClassifierConfig defaults(const ModelParams& params);
    static ClassifierConfig no_hysteresis(const ModelParams& params);

    void validate() const;

    /// Shortest period the classifier reliably records, given the window and
    /// grid; replaces two thirds of the window in the censoring corrections.
    [[nodiscard]] double effective_cutoff(double dt_w, int k) const;
};

/// Single-atom photon emission rate of a light period, A Omega3^2 / (A^2 + 2 Omega3^2).
double single_light_rate(const ModelParams& params);

PeriodSequence classify_periods(const IntensityTrace& trace, const ClassifierConfig& cfg);

/// Empirical period statistics of classified (or simulated) sequences.
struct EstimatedStatistics {
    long periods[3] = {0, 0, 0};
    double observed_time = 0.0;
    double t[3] = {0, 0, 0};     // mean durations
    double t_se[3] = {0, 0, 0};  // their standard errors
    double n[3] = {0, 0, 0};     // periods per unit time
    double n_se[3] = {0, 0, 0};  // Poisson
    long transitions_10 = 0;
    long transitions_12 = 0;
    DoubleJumpCounts double_jumps;
    double n_dj = 0.0;
    double n_dj_se = 0.0;

    TransitionRates naive_rates;      // 1/T0, b/T1, (1-b)/T1, 1/T2
    TransitionRates corrected_rates;  // inverted censoring corrections
    TransitionRates corrected_se;     // jackknife over blocks
    double cutoff = 0.0;
};

/// The first and last period of every sequence are dropped as incomplete.
/// With cutoff > 0 the censoring corrections are inverted to recover the
/// underlying rates.  Throws EstimationError below 100 periods.
EstimatedStatistics estimate_statistics(const std::vector<PeriodSequence>& sequences, double dt_dj,
                                        double cutoff = 0.0, int jackknife_blocks = 10);

}  // namespace twoatom
